"""Exact 0-1 loss training of two-layer maxout and ReLU networks."""
__version__ = "0.1.0"

from .core import (  # noqa: E402
    MAXOUT,
    RELU,
    BudgetExceededError,
    CacheMissError,
    Config,
    ConfigurationError,
    Dataset,
    DeepIceError,
    DegenerateError,
    InvalidCombinationError,
    NoConfigError,
    ScoredConfig,
)
from .combinatorics import CombTable, kcombs_merge, nested_merge, rank_combination, unrank_combination  # noqa: E402
from .geometry import fit_hyperplane, sign_row  # noqa: E402
from .evaluator import PredictionCache, eval_assignments, min_01  # noqa: E402
from .solver import count_candidates, deep_ice, search, split_strategy  # noqa: E402
from .oracle import enumerate_solutions, oracle_exact, oracle_search  # noqa: E402
from .coreset import CoresetError, FilterParams, coreset_fit  # noqa: E402
from .io import gen_data, ingest  # noqa: E402
from .model import Model, fit, predict  # noqa: E402
from .cv import cv_run  # noqa: E402
