"""
Workbench Errors
================
Exception hierarchy shared by every cwcodes module.

The CLI maps each class onto a process exit status (see ``EXIT_CODES``).
"""

from typing import Any, Dict, Optional


class WorkbenchError(Exception):
    """Root of all workbench failures"""


class ParameterError(WorkbenchError, ValueError):
    """A precondition on the inputs does not hold"""


class FormatError(WorkbenchError, ValueError):
    """A code or design file could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigurationError(WorkbenchError):
    """Malformed workbench configuration"""


class VerificationError(WorkbenchError):
    """A constructed object failed its validity check"""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class SearchBudgetExhausted(WorkbenchError):
    """A randomized or exhaustive search ran out of budget.

    ``partial`` holds the best object reached so far. Running out of budget
    never proves that the target object does not exist.
    """

    def __init__(self, message: str, partial: Any = None, moves_used: int = 0):
        super().__init__(message)
        self.partial = partial
        self.moves_used = moves_used


class InconsistentBoundsError(WorkbenchError):
    """A lower bound exceeded an upper bound; always a bug"""


EXIT_CODES: Dict[type, int] = {
    VerificationError: 1,
    ParameterError: 2,
    FormatError: 2,
    ConfigurationError: 2,
    SearchBudgetExhausted: 3,
    InconsistentBoundsError: 4,
}


def exit_code_for(error: BaseException) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return 4
