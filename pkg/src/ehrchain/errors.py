"""Error hierarchy shared by every service layer.

Each error carries a stable ``code`` string; the HTTP gateway maps codes to
``{code, message}`` JSON bodies, so subclasses must not invent per-instance
codes.
"""

from __future__ import annotations


class EhrChainError(Exception):
    """Base class; ``code`` identifies the error in API responses."""

    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# -- registry / ledger ------------------------------------------------------

class DuplicateId(EhrChainError):
    code = "DuplicateId"


class MissingField(EhrChainError):
    code = "MissingField"


class UnknownParticipant(EhrChainError):
    code = "UnknownParticipant"


class UnknownPatient(EhrChainError):
    code = "UnknownPatient"


class DuplicateAsset(EhrChainError):
    code = "DuplicateAsset"


class BadDigest(EhrChainError):
    code = "BadDigest"


class NotAuthorized(EhrChainError):
    code = "NotAuthorized"


class Blacklisted(EhrChainError):
    code = "Blacklisted"


# -- edge node ---------------------------------------------------------------

class EmptyPayload(EhrChainError):
    code = "EmptyPayload"


class PolicyRejected(EhrChainError):
    code = "PolicyRejected"


class UnknownRecord(EhrChainError):
    code = "UnknownRecord"


class UnknownEvent(EhrChainError):
    code = "UnknownEvent"


class TokenGone(EhrChainError):
    """Redeemed, expired, or never existed; deliberately indistinguishable."""

    code = "TokenGone"


class AccessDenied(EhrChainError):
    code = "AccessDenied"


# -- gateway -----------------------------------------------------------------

class Unauthenticated(EhrChainError):
    code = "Unauthenticated"


class WrongPatient(EhrChainError):
    code = "WrongPatient"


class BadParameter(EhrChainError):
    code = "BadParameter"


class EmptyDocument(EhrChainError):
    code = "EmptyDocument"


# -- bench -------------------------------------------------------------------

class EmptyData(EhrChainError):
    code = "EmptyData"


class SetupFailure(EhrChainError):
    code = "SetupFailure"
