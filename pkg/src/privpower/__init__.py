"""Differentially private randomized power iteration with data-adaptive noise."""

from .accounting import PrivacyBudget, ZcdpLedger, calibrate_sigma, verify_algorithm_budget, zcdp_to_dp
from .errors import (ConfigError, EmptyDataset, EmptyInput, InvalidBudget, MagnitudeTooLarge,
                     NonPositiveSigma, NotSymmetric, ParseError, RankDeficient, ShapeMismatch,
                     ZeroGap, ZeroReference)
from .federated import InteractionShard, PartyShard, overhead, run_federated, sec_agg
from .linalg import qr_orthonormalize, symmetric_eig
from .ppm import IterationTrace, PowerMethodConfig, run_centralized
from .rng import RngStream, StreamTape
from .sensitivity import SensitivityPolicy, coherence

__version__ = "0.1.0"

__all__ = [
    "PrivacyBudget", "ZcdpLedger", "calibrate_sigma", "verify_algorithm_budget", "zcdp_to_dp",
    "ConfigError", "EmptyDataset", "EmptyInput", "InvalidBudget", "MagnitudeTooLarge",
    "NonPositiveSigma", "NotSymmetric", "ParseError", "RankDeficient", "ShapeMismatch",
    "ZeroGap", "ZeroReference", "InteractionShard", "PartyShard", "overhead", "run_federated",
    "sec_agg", "qr_orthonormalize", "symmetric_eig", "IterationTrace", "PowerMethodConfig",
    "run_centralized", "RngStream", "StreamTape", "SensitivityPolicy", "coherence",
]
