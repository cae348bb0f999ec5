"""Irregular QC-LDPC McEliece workbench."""

from .codes import DegreeProfile
from .crypto import PrivateKey, PublicKey, SystemParams, decrypt, encrypt, keygen
from .errors import (
    DecodingFailure,
    DesignError,
    DimensionError,
    GenerationExhausted,
    InfeasibleProfile,
    QcmceError,
    Singular,
    ValidationError,
)

__all__ = [
    "DecodingFailure",
    "DegreeProfile",
    "DesignError",
    "DimensionError",
    "GenerationExhausted",
    "InfeasibleProfile",
    "PrivateKey",
    "PublicKey",
    "QcmceError",
    "Singular",
    "SystemParams",
    "ValidationError",
    "decrypt",
    "encrypt",
    "keygen",
]
