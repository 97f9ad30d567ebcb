"""rbfdmd: parametric reduced-order modeling with RBF snapshot interpolation
and dynamic mode decomposition.

Offline, snapshot matrices simulated at a handful of parameter samples train
a radial-basis-function network over the parameter domain. Online, the
network predicts the snapshot matrix at a new parameter value and exact or
kernel DMD extrapolates the dynamics beyond the training time window.
"""

from .dmd import DmdModel, SnapshotPair, fit_exact_dmd, predict_series, reconstruct, select_rank
from .kdmd import KdmdModel, KernelSpec, eigenfunction_values, fit_kernel_dmd, gram_matrices, kdmd_predict
from .linalg import CompactSvd, EigenPairs, NumericsWarning, compact_svd, eig_general, least_squares_solve, spd_solve
from .pipeline import DmdConfig, ErrorReport, ParametricRom, TrainingSet, error_report, predict, predict_snapshots, split, train
from .rbf import ParamTransform, RbfInterpolant, RbfKernel, kernel_value

__all__ = [
    "CompactSvd", "EigenPairs", "NumericsWarning",
    "compact_svd", "eig_general", "least_squares_solve", "spd_solve",
    "SnapshotPair", "DmdModel", "select_rank", "fit_exact_dmd", "reconstruct",
    "predict_series",
    "KernelSpec", "KdmdModel", "gram_matrices", "fit_kernel_dmd",
    "eigenfunction_values", "kdmd_predict",
    "RbfKernel", "ParamTransform", "RbfInterpolant", "kernel_value",
    "TrainingSet", "DmdConfig", "ParametricRom", "ErrorReport",
    "train", "predict_snapshots", "split", "predict", "error_report",
]

__version__ = "0.1.0"
