import json

import numpy as np
import pytest

from deepice.cli import main
from deepice.io import save_dataset

from conftest import random_dataset


@pytest.fixture
def data(tmp_path):
    p = tmp_path / "d.csv"
    save_dataset(random_dataset(14, 2, 1), p)
    return p


def _json_lines(text):
    return [json.loads(l) for l in text.splitlines() if l.startswith("{")]


def test_gen_data(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gen-data", str(out), "--n", "12", "--kind", "linear"]) == 0
    assert len(out.read_text().splitlines()) == 13


def test_fit_exact_predict_roundtrip(tmp_path, data, capsys):
    model = tmp_path / "m.json"
    grid = tmp_path / "grid.csv"
    assert main(["fit-exact", str(data), "--k", "2", "--out", str(model), "--grid", str(grid), "--progress",
                 "--sigma", "0"]) == 0
    lines = _json_lines(capsys.readouterr().out)
    assert lines[-1]["training_loss"] == lines[-2]["best_loss"]
    assert len(grid.read_text().splitlines()) == 200 * 200 + 1
    assert main(["predict", str(model), str(data), "--label-column", "label"]) == 0
    cap = capsys.readouterr()
    assert len(cap.out.split()) == 14
    assert json.loads(cap.err)["loss"] == lines[-1]["training_loss"]


def test_fit_coreset(data, capsys):
    assert main(["fit-coreset", str(data), "--block-size", "5", "--bmax", "6", "--heap", "1"]) == 0
    recs = _json_lines(capsys.readouterr().out)
    assert recs[0]["round"] == 0 and "training_loss" in recs[-1]


def test_cv_and_enum_and_oracle(tmp_path, data, capsys):
    log = tmp_path / "folds.jsonl"
    assert main(["cv", str(data), "--folds", "3", "--log", str(log)]) == 0
    assert len(log.read_text().splitlines()) == 3
    assert "(" in capsys.readouterr().out
    assert main(["oracle", str(data), "--k", "1"]) == 0
    best = json.loads(capsys.readouterr().out)["loss"]
    assert main(["enum-solutions", str(data), "--threshold", str(best + 1)]) == 0
    assert _json_lines(capsys.readouterr().out)[0]["loss"] == best


def test_exit_codes(tmp_path, data, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,label\n1,oops,1\n")
    assert main(["fit-exact", str(bad)]) == 2
    assert main(["fit-exact", str(tmp_path / "missing.csv")]) == 2
    coll = tmp_path / "coll.csv"
    coll.write_text("x,y,label\n0,0,1\n1,1,-1\n2,2,1\n0,1,-1\n")
    assert main(["fit-exact", str(coll), "--sigma", "0"]) == 3
    assert main(["enum-solutions", str(data), "--k", "2", "--threshold", "3", "--cap", "10"]) == 4
    m = tmp_path / "m.json"
    main(["fit-exact", str(data), "--out", str(m)])
    wide = tmp_path / "wide.csv"
    wide.write_text("a,b,c\n1,2,3\n")
    assert main(["predict", str(m), str(wide)]) == 2
