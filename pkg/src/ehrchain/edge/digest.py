"""Payload fingerprinting.

SHA3-256, lowercase hex. The chain stores this digest permanently; the edge
node recomputes it on every read so any byte-level alteration of a stored
record is visible as a mismatch.
"""

from __future__ import annotations

import hashlib
from enum import Enum

DIGEST_HEX_LEN = 64


def compute_digest(payload: bytes) -> str:
    return hashlib.sha3_256(payload).hexdigest()


class IntegrityVerdict(Enum):
    MATCH = "MATCH"
    TAMPERED = "TAMPERED"
