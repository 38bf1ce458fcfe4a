"""Exception hierarchy.

Every error carries a short stable ``code`` (used in abort frames and by the
CLI to pick an exit status) and an optional ``round`` that the session layer
fills in when an error escapes a protocol round.
"""

from __future__ import annotations


class SecureChi2Error(Exception):
    code = "Error"

    def __init__(self, message: str = "", *, round: int | None = None):
        super().__init__(message or self.code)
        self.round = round


# arithmetic


class NotInvertible(SecureChi2Error, ArithmeticError):
    code = "NotInvertible"


class ReconstructionFailed(SecureChi2Error, ArithmeticError):
    code = "ReconstructionFailed"


# cryptosystem


class KeyMismatch(SecureChi2Error):
    code = "KeyMismatch"


class MalformedCiphertext(SecureChi2Error):
    code = "MalformedCiphertext"


# statistics


class DataError(SecureChi2Error, ValueError):
    """Input data cannot be used; maps to CLI exit status 2."""

    code = "DataError"


class LengthMismatch(DataError):
    code = "LengthMismatch"


class DegenerateTable(DataError):
    code = "DegenerateTable"

    def __init__(self, marginal: str, **kw):
        super().__init__(f"marginal {marginal} is zero", **kw)
        self.marginal = marginal


class NegativeStatistic(DataError):
    code = "NegativeStatistic"


# protocol


class ProtocolError(SecureChi2Error):
    code = "ProtocolError"


class DegenerateClassVector(DataError, ProtocolError):
    code = "DegenerateClassVector"


class DegenerateFeatureVector(DataError, ProtocolError):
    code = "DegenerateFeatureVector"


class KeyTooSmall(ProtocolError):
    code = "KeyTooSmall"


class WrongCiphertextCount(ProtocolError):
    code = "WrongCiphertextCount"


class UnexpectedMessage(ProtocolError):
    """Out-of-order call or undecodable message."""

    code = "UnexpectedMessage"


# dataset ingestion


class MissingColumn(DataError):
    code = "MissingColumn"


class NonBinaryValue(DataError):
    code = "NonBinaryValue"

    def __init__(self, row: int, value: str, **kw):
        super().__init__(f"row {row}: expected 0 or 1, got {value!r}", **kw)
        self.row = row


class DuplicateId(DataError):
    code = "DuplicateId"

    def __init__(self, record_id: str, **kw):
        super().__init__(f"duplicate record id {record_id!r}", **kw)
        self.record_id = record_id


class IdSetMismatch(DataError):
    code = "IdSetMismatch"

    def __init__(self, missing: int, extra: int, **kw):
        super().__init__(f"id sets differ: missing={missing} extra={extra}", **kw)
        self.missing = missing
        self.extra = extra


# transport


class TransportError(SecureChi2Error):
    code = "TransportError"


class HandshakeVersionMismatch(TransportError):
    code = "HandshakeVersionMismatch"


class PeerAbort(SecureChi2Error):
    """The peer sent an abort frame instead of the expected message."""

    code = "PeerAbort"

    def __init__(self, round: int, error_code: str, detail: str = ""):
        super().__init__(f"peer aborted in round {round}: {error_code} {detail}".rstrip(), round=round)
        self.error_code = error_code
        self.detail = detail


def _all_subclasses(cls):
    for sub in cls.__subclasses__():
        yield sub
        yield from _all_subclasses(sub)


ERRORS_BY_CODE = {cls.code: cls for cls in _all_subclasses(SecureChi2Error)}
