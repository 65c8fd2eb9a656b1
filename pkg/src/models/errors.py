"""
Error types raised by the verification services.

Every error carries a short machine-readable `kind` and a `details` dict so
that the pipeline can store it in a report without losing the witness data.
"""

from typing import Any, Dict, Optional


class SpinDRGError(Exception):
    """Base class for all toolkit errors."""

    kind = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "message": self.message, "details": self.details}


class ParseError(SpinDRGError):
    kind = "ParseError"


class DiameterTooSmall(SpinDRGError):
    kind = "DiameterTooSmall"


class NotConnected(SpinDRGError):
    kind = "NotConnected"


class NotDistanceRegular(SpinDRGError):
    """Raised with the witness (h, i, j, y, z, y', z') of an inconsistent count."""

    kind = "NotDistanceRegular"


class EigCountMismatch(SpinDRGError):
    kind = "EigCountMismatch"


class SingularP(SpinDRGError):
    kind = "SingularP"


class NotQRacah(SpinDRGError):
    kind = "NotQRacah"


class Degenerate(SpinDRGError):
    kind = "Degenerate"


class Inadmissible(SpinDRGError):
    kind = "Inadmissible"


class ToleranceExceeded(SpinDRGError):
    kind = "ToleranceExceeded"


class AssumptionFails(SpinDRGError):
    """The two sides of the central-element gate disagree."""

    kind = "AssumptionFails"

    def __init__(self, message: str, residual: float, dominant: str,
                 details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        details.update({"residual": residual, "dominant": dominant})
        super().__init__(message, details)
        self.residual = residual
        self.dominant = dominant


class ZeroSum(SpinDRGError):
    kind = "ZeroSum"


class EntryZero(SpinDRGError):
    kind = "EntryZero"


class ConstancyViolation(SpinDRGError):
    """Two configurations of the same shape gave different counts."""

    kind = "ConstancyViolation"
