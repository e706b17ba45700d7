"""Single-server shuffling: verifiable mixing over committee-held keys."""

from .group import (
    MODP_GROUP,
    TINY_GROUP,
    MICRO_GROUP,
    GROUPS,
    SchnorrGroup,
    ExpCounter,
    KeyPair,
    Ciphertext,
    keygen,
    encrypt,
    decrypt,
    shift_key,
    reencrypt,
    rerandomize,
)

__all__ = [
    "MODP_GROUP",
    "TINY_GROUP",
    "MICRO_GROUP",
    "GROUPS",
    "SchnorrGroup",
    "ExpCounter",
    "KeyPair",
    "Ciphertext",
    "keygen",
    "encrypt",
    "decrypt",
    "shift_key",
    "reencrypt",
    "rerandomize",
]

__version__ = "0.1.0"
