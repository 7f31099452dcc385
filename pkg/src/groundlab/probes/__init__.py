"""Statistical estimators shared by all benchmarks."""

from .metrics import accuracy, macro_f1, map_at_k
from .mlp import MLPProbe, fit_mlp
from .pls import PLSModel, fit_pls, predict_pls
from .ridge import RidgeModel, fit_ridge, predict_ridge
from .stats import pearson, rankdata, spearman
from .svc import C_GRID, SVCProbe, fit_svc, grid_select_svc

__all__ = [
    "C_GRID",
    "MLPProbe",
    "PLSModel",
    "RidgeModel",
    "SVCProbe",
    "accuracy",
    "fit_mlp",
    "fit_pls",
    "fit_ridge",
    "fit_svc",
    "grid_select_svc",
    "macro_f1",
    "map_at_k",
    "pearson",
    "predict_pls",
    "predict_ridge",
    "rankdata",
    "spearman",
]
