"""Models on disk, prediction, and five-fold cross-validation."""
import tempfile
from pathlib import Path

import numpy as np

from deepice import Model, cv_run, fit, gen_data
from deepice.io import ingest, save_dataset
from deepice.model import decision_grid

tmp = Path(tempfile.mkdtemp())
save_dataset(gen_data(60, 2, seed=5, kind="wedge", flip=0.1), tmp / "train.csv")

# ingestion drops duplicate rows, adds N(0, 1e-8) jitter, and shuffles by seed
ds = ingest(tmp / "train.csv", seed=0)
model = fit(ds, 2, seed=0)
model.save(tmp / "model.json")
back = Model.load(tmp / "model.json")
print("training loss", model.training_loss, "replayed after reload:", back.loss(ds))
print("predictions for (0, 0) and (3, 3):", back.predict(np.array([[0.0, 0.0], [3.0, 3.0]])))

grid = decision_grid(back, ds.points.min(axis=0), ds.points.max(axis=0), resolution=50)
print("decision grid rows (x, y, label):", grid.shape)

report = cv_run(ds, 1, folds=5, seed=0, log_sink=print)
print("Train/Test (std_train/std_test):", report.table_cell())
