"""Exception types shared across the package.

The CLI maps these onto exit codes: parse/I-O problems exit with 2,
domain violations (validation failures, preconditions, resource caps,
infeasible programs) exit with 1.
"""

from __future__ import annotations


class CCLError(Exception):
    """Base class for all package-specific errors."""


class ParseError(CCLError):
    """Malformed input text; carries a 1-based line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class ArityConflictError(ParseError):
    """The same relation symbol is used with two different arities."""


class CyclicityError(CCLError):
    """The ground dependency graph has a cycle; ``cycle`` lists one."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        names = " -> ".join(str(a) for a in self.cycle)
        super().__init__(f"program is not acyclic: {names} -> {self.cycle[0] if self.cycle else '?'}")


class UnknownAtomError(CCLError):
    """A query or lookup mentioned an atom outside the interpretation domain."""


class TheoryValidationError(CCLError):
    """A theory failed validation; ``report`` holds the violations."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid theory: {lines}")


class CapExceededError(CCLError):
    """An enumeration grew past its configured size cap."""


class InfeasibleError(CCLError):
    """The linear program has no feasible point."""


class UnboundedError(CCLError):
    """The linear program is unbounded in the optimization direction."""
