"""Exception hierarchy shared by all hccmetrics modules."""

from __future__ import annotations


class HccError(Exception):
    """Base class for data/runtime errors raised by this package."""


class ParseError(SyntaxError):
    """Source text falls outside the supported Java subset.

    Carries ``filename``, ``lineno`` and ``offset`` (1-based column) like the
    builtin :class:`SyntaxError`.
    """

    def __init__(self, message: str, filename: str | None = None, line: int = 0, column: int = 0):
        super().__init__(message, (filename, line, column, None))
        self.msg = message
        self.filename = filename
        self.lineno = line
        self.offset = column

    def __str__(self) -> str:
        where = self.filename or "<source>"
        return f"{where}:{self.lineno}:{self.offset}: {self.msg}"


class SourceEncodingError(HccError, ValueError):
    """Source file is not valid UTF-8."""


class DuplicateClassError(HccError):
    def __init__(self, qualified_name: str, first: str, second: str):
        super().__init__(f"class {qualified_name!r} declared in both {first} and {second}")
        self.qualified_name = qualified_name
        self.paths = (first, second)


class CycleError(HccError):
    def __init__(self, chain: list[str]):
        super().__init__("inheritance cycle: " + " -> ".join(chain))
        self.chain = chain


class MissingColumnError(HccError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing column"


class CellTypeError(HccError, TypeError):
    def __init__(self, row: int, column: str, value: str, expected: str):
        super().__init__(f"row {row}: column {column!r} value {value!r} is not {expected}")
        self.row = row
        self.column = column
        self.value = value


class IdentityViolationError(HccError):
    """One or more rows have ``hcc != wmc + iwmc``."""

    def __init__(self, violations: list[tuple[int, str, int, int, int]]):
        lines = [f"row {i} ({name}): hcc={h} != wmc={w} + iwmc={iw}" for i, name, w, iw, h in violations]
        super().__init__("HCC identity violated:\n  " + "\n  ".join(lines))
        self.violations = violations


class EmptyDatasetError(HccError):
    pass


class DegenerateColumnError(HccError, ValueError):
    pass


class LengthMismatchError(HccError, ValueError):
    pass


class EmptyGroupError(HccError):
    pass


class InsufficientDataError(HccError):
    pass


class SingleClassError(HccError):
    pass


class NonFiniteError(HccError, ArithmeticError):
    pass


class DimensionMismatchError(HccError, ValueError):
    pass


class RepresentationMismatchError(HccError):
    pass
