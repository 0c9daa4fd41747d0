import re
from typing import Any, Dict, List, Optional


class QhaError(ValueError):
    """Base class of every error raised by qha

    :param message: Human readable message
    :param details: Machine readable payload copied into reports
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}

    @property
    def reason(self) -> str:
        return re.sub(r"(?<!^)(?=[A-Z])", "_", type(self).__name__).lower()


class ParseError(QhaError):
    pass


class ValidationError(QhaError):
    pass


class UnknownArrow(ValidationError):
    pass


class AlgebraMismatch(ValidationError):
    pass


class NotAdmissible(QhaError):
    pass


class NotAdmissibleUpToCap(QhaError):
    pass


class CapExceeded(QhaError):
    def __init__(self, which: str, history: List[int], message: Optional[str] = None):
        super().__init__(
            message or f"reflection exceeded {which}", {"which": which, "history": history}
        )
        self.which = which
        self.history = history


class ResolutionCapExceeded(QhaError):
    pass


class ProjectiveDimensionTooLarge(QhaError):
    pass


class NotFinite(QhaError):
    pass


class HypothesesNotMet(QhaError):
    def __init__(self, failed: List[str]):
        super().__init__(f"hypotheses not met: {', '.join(failed)}", {"failed": failed})
        self.failed = failed


class HypothesisFailed(QhaError):
    def __init__(self, which: List[str]):
        super().__init__(f"hypothesis failed: {', '.join(which)}", {"which": which})
        self.which = which


class InvariantError(QhaError):
    pass
