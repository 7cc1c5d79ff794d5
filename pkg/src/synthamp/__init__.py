"""Rényi-DP amplification accountant and numerical verifier for synthetic data
released by linear generators ``Z = N v`` with Gaussian latent noise."""

__version__ = "0.1.0"

from .mathkit import DomainError, NumericalError, RngStream
from .distributions import GeneratorPair, NoncentralChiSq, PrivacyParams
from .accountant import BoundReport, account, bound_report, rdp_gaussian

__all__ = [
    "__version__",
    "DomainError",
    "NumericalError",
    "RngStream",
    "GeneratorPair",
    "NoncentralChiSq",
    "PrivacyParams",
    "BoundReport",
    "account",
    "bound_report",
    "rdp_gaussian",
]
