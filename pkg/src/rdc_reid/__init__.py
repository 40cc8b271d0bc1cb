"""Person re-identification with region covariances and the Stein divergence."""

__version__ = "0.1.0"

from .descriptor import (
    CovarianceDescriptor,
    ForegroundMask,
    Image,
    covariance,
    describe,
    extract_features,
)
from .divergence import airm, bregman_logdet, js_symmetrized, pairwise_stein, stein
from .evaluation import Dataset, Experiment, cmc, generate_synthetic, run_experiment, split
from .lda import LdaModel, fit_lda, project
from .rdc import (
    RdcClassifier,
    TrainingSet,
    classify,
    classify_direct_stein,
    similarity_query,
    similarity_train,
)
from .spd import SpdMatrix, congruence, inverse, log_det, sym_log, validate

__all__ = [
    "CovarianceDescriptor", "Dataset", "Experiment", "ForegroundMask", "Image",
    "LdaModel", "RdcClassifier", "SpdMatrix", "TrainingSet",
    "airm", "bregman_logdet", "classify", "classify_direct_stein", "cmc",
    "congruence", "covariance", "describe", "extract_features", "fit_lda",
    "generate_synthetic", "inverse", "js_symmetrized", "log_det", "pairwise_stein",
    "project", "run_experiment", "similarity_query", "similarity_train", "split",
    "stein", "sym_log", "validate",
]
