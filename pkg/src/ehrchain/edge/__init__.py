"""Off-chain storage, integrity digests, and one-time URL release."""

from .digest import DIGEST_HEX_LEN, IntegrityVerdict, compute_digest
from .node import EdgeNode, EhrRecord, RecordMeta, RedeemResult
from .vault import (
    DEFAULT_TTL_MS,
    OneTimeToken,
    OneTimeVault,
    SealedAddress,
    TokenState,
    URL_SCHEME,
)

__all__ = [
    "DEFAULT_TTL_MS",
    "DIGEST_HEX_LEN",
    "EdgeNode",
    "EhrRecord",
    "IntegrityVerdict",
    "OneTimeToken",
    "OneTimeVault",
    "RecordMeta",
    "RedeemResult",
    "SealedAddress",
    "TokenState",
    "URL_SCHEME",
    "compute_digest",
]
