"""Complex support vector regression and quaternary classification."""

from .csvm import (
    QUATERNARY_LABELS,
    CsvmModel,
    classify_binary_complexified,
    decision_function,
    fit_csvm,
    fit_one_vs_all,
    predict_csvm,
    sign_i,
)
from .csvr import CsvrModel, DrcModel, fit_complexified_svr, fit_csvr, fit_drc_svr, mse_db, predict_csvr
from .kernels import (
    ComplexGaussian,
    InducedReal,
    Precomputed,
    RealGaussian,
    Scaled,
    build_gram,
    eval_kernel,
)
from .qp import SvcModel, SvcParams, SvrModel, SvrParams, count_solves, solve_svc_dual, solve_svr_dual

__version__ = "0.1.0"

__all__ = [
    "QUATERNARY_LABELS",
    "ComplexGaussian",
    "CsvmModel",
    "CsvrModel",
    "DrcModel",
    "InducedReal",
    "Precomputed",
    "RealGaussian",
    "Scaled",
    "SvcModel",
    "SvcParams",
    "SvrModel",
    "SvrParams",
    "build_gram",
    "classify_binary_complexified",
    "count_solves",
    "decision_function",
    "eval_kernel",
    "fit_complexified_svr",
    "fit_csvm",
    "fit_csvr",
    "fit_drc_svr",
    "fit_one_vs_all",
    "mse_db",
    "predict_csvm",
    "predict_csvr",
    "sign_i",
    "solve_svc_dual",
    "solve_svr_dual",
]
