"""Two-party secure chi-squared feature scoring over Paillier encryption."""

from securechi2.chi2core import (
    ConfidenceLevel,
    ContingencyTable,
    build_table,
    chi2_decomposed,
    chi2_exact,
    confidence,
)
from securechi2.paillier import Ciphertext, PublicKey, SecretKey, keygen
from securechi2.protocol import BlindingVariant, run_session

__all__ = [
    "BlindingVariant",
    "Ciphertext",
    "ConfidenceLevel",
    "ContingencyTable",
    "PublicKey",
    "SecretKey",
    "build_table",
    "chi2_decomposed",
    "chi2_exact",
    "confidence",
    "keygen",
    "run_session",
]
