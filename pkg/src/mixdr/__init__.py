"""mixdr: model-based mixture discriminant analysis and projections.

Per-class Gaussian mixtures under twelve parsimonious covariance
parametrizations, BIC model selection, and a discriminant dimension
reduction subspace with a tunable location/dispersion blend.
"""

__version__ = "0.1.0"

from .classifier import (EDDAClassifier, MclustDAClassifier,
                         MixtureClassifier, Prediction,
                         classifier_from_moments, fit_edda, fit_mclustda)
from .covariance import MODELS, legal_models, n_covariance_params
from .datasets import (LabeledDataset, bh_filter, diag_sigma,
                       gen_mean_vs_variance, gen_scenario5, gen_waveform,
                       load_csv, save_csv)
from .dimred import (DimRedBasis, DiscriminantSubspace, KernelParts, LrTrace,
                     ProjectionFrame, eigen_decomposition_terms, kernel_parts,
                     lda_canonical, lr_criterion, project, save_directions,
                     sir_directions, solve_basis, tune_lambda)
from .gmm import FitResult, MixtureModel, em_fit, log_density, select_mixture
from .linalg import (EigenPairs, generalized_eigen, inv_sqrt, principal_angle,
                     sym_eigen)

__all__ = [
    "__version__",
    "EDDAClassifier", "MclustDAClassifier", "MixtureClassifier", "Prediction",
    "classifier_from_moments", "fit_edda", "fit_mclustda",
    "MODELS", "legal_models", "n_covariance_params",
    "LabeledDataset", "bh_filter", "diag_sigma", "gen_mean_vs_variance",
    "gen_scenario5", "gen_waveform", "load_csv", "save_csv",
    "DimRedBasis", "DiscriminantSubspace", "KernelParts", "LrTrace",
    "ProjectionFrame", "eigen_decomposition_terms", "kernel_parts",
    "lda_canonical", "lr_criterion", "project", "save_directions",
    "sir_directions", "solve_basis", "tune_lambda",
    "FitResult", "MixtureModel", "em_fit", "log_density", "select_mixture",
    "EigenPairs", "generalized_eigen", "inv_sqrt", "principal_angle",
    "sym_eigen",
]
