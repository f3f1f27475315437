"""
cwcodes
=======
Workbench for q-ary constant-weight codes: exact verification, design
constructions, lifting of disjoint binary codes, and a ledger of bounds on
A_q(n, d, w).
"""

from .core_codes import Code, CodeParams, SetSystem, Word, verify_code
from .errors import (
    ConfigurationError,
    FormatError,
    InconsistentBoundsError,
    ParameterError,
    SearchBudgetExhausted,
    VerificationError,
    WorkbenchError,
)

__version__ = "1.0.0"

__all__ = [
    "Code",
    "CodeParams",
    "SetSystem",
    "Word",
    "verify_code",
    "ConfigurationError",
    "FormatError",
    "InconsistentBoundsError",
    "ParameterError",
    "SearchBudgetExhausted",
    "VerificationError",
    "WorkbenchError",
]
