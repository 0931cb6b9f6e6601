"""Linear nonparallel support vector ordinal regression.

One proximal hyperplane ``w_k`` is fitted per rank by dual coordinate descent
on sparse data. Ranks are predicted from the fitted hyperplanes either by the
nearest hyperplane (``"old"``) or by counting adjacent-pair decisions
(``"new"``, the default).

    >>> from lnpsvor import load_libsvm, train, SolverConfig
    >>> data = load_libsvm("train.svm", bias=1.0)         # doctest: +SKIP
    >>> model = train(data, SolverConfig(C1=1.0, eps=0.1))  # doctest: +SKIP
    >>> model.predict(data)                                # doctest: +SKIP

One-vs-all SVC, epsilon-SVR with rounding and RedSVM baselines share the same
coordinate-descent engine. Metrics, cross-validation, TF-IDF text features
and benchmark drivers live in the submodules of the same names.
"""
from .baselines import (OvaModel, RedSvmModel, SvrModel, extend_redsvm, predict_redsvm, predict_svr,
                        train_redsvm, train_svc_ova, train_svr)
from .dcd import ConvergenceWarning, DualProblem, box_step, soft_thresh_step, solve
from .evaluation import EvalReport, GridResult, cross_validate, evaluate, grid_search
from .modelio import ModelFormatError, load_model, save_model
from .npsvor import (OrdinalModel, SolverConfig, dual_objective_dcd1, dual_objective_dcd2, predict_new,
                     predict_old, train, train_rank_dcd1, train_rank_dcd2)
from .sparse import (DataFormatError, SparseDataset, SparseVector, decompose, load_libsvm,
                     stratified_split, write_libsvm)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceWarning", "DataFormatError", "DualProblem", "EvalReport", "GridResult",
    "ModelFormatError", "OrdinalModel", "OvaModel", "RedSvmModel", "SolverConfig", "SparseDataset",
    "SparseVector", "SvrModel", "box_step", "cross_validate", "decompose", "dual_objective_dcd1",
    "dual_objective_dcd2", "evaluate", "extend_redsvm", "grid_search", "load_libsvm", "load_model",
    "predict_new", "predict_old", "predict_redsvm", "predict_svr", "save_model", "soft_thresh_step",
    "solve", "stratified_split", "train", "train_rank_dcd1", "train_rank_dcd2", "train_redsvm",
    "train_svc_ova", "train_svr", "write_libsvm",
]
