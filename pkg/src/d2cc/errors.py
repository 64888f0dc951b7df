"""Exception hierarchy shared across the toolkit.

``DataError`` subclasses mark problems with user-supplied input (malformed
files, vocabulary misses, bad CLI usage); the command line maps them to exit
code 2.  Everything else derived from ``D2ccError`` maps to exit code 1.
"""


class D2ccError(Exception):
    """Base class for all toolkit errors."""


class DataError(D2ccError):
    """Malformed or inconsistent input data."""


class CategoryParseError(DataError):
    """Unparseable category text."""


class AutoParseError(DataError):
    """Malformed AUTO bracketing."""


class ConlluError(DataError):
    """Malformed or structurally invalid CoNLL-U input."""


class AlignmentError(DataError):
    """Paired dependency/CCG files disagree in length or tokenization."""


class VocabularyError(DataError):
    """A symbol is outside the model's inventory."""


class ConstraintError(DataError):
    """Inconsistent or unusable decoding constraints."""


class CheckpointError(DataError):
    """Unreadable or incompatible model checkpoint."""


class ExtractionError(D2ccError):
    """Predicate-argument extraction failed (e.g. unification clash)."""


class NoParseError(D2ccError):
    """The decoder exhausted its agenda without reaching a goal item.

    ``reason`` is ``"grammar"`` when even the unconstrained search fails,
    ``"constraint"`` when constraints pruned away all parses, and
    ``"unknown"`` when the distinction was not determined.
    """

    def __init__(self, message: str, reason: str = "unknown"):
        super().__init__(message)
        self.reason = reason


class BudgetError(D2ccError):
    """The decoder popped more items than its budget allows."""


class TrainingError(D2ccError):
    """Training aborted (e.g. non-finite loss)."""
