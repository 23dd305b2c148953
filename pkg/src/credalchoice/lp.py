"""Exact linear programming over the rationals.

A small two-phase simplex on ``Fraction`` tableaus.  All variables are
implicitly non-negative; constraints are ``(coefficients, relation,
rhs)`` triples with relation one of ``<=``, ``==``, ``>=``.  Bland's
rule picks the pivots, so the method terminates even on degenerate
problems, and every reported optimum and witness point is exact.

The same machinery enumerates the vertices of a bounded polyhedron in
equality form ``{x >= 0 : Ax = b}`` by breadth-first search over
feasible bases, starting from a phase-one basis.  Degenerate vertices
are reached through multiple bases; points are deduplicated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .errors import CapExceededError, InfeasibleError, UnboundedError

Row = list[Fraction]


class Constraint(NamedTuple):
    coeffs: Sequence[Fraction]
    sense: str  # "<=" | "==" | ">="
    rhs: Fraction

DEFAULT_BASIS_CAP = 200_000

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class LPSolution:
    value: Fraction
    point: tuple[Fraction, ...]


def _pivot(rows: list[Row], obj: Row, basis: list[int], r: int, c: int) -> None:
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    prow = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            rows[i] = [v - f * p for v, p in zip(row, prow)]
    if obj[c] != 0:
        f = obj[c]
        for j, p in enumerate(prow):
            obj[j] -= f * p
    basis[r] = c


def _bland_minimize(rows: list[Row], obj: Row, basis: list[int]) -> None:
    ncols = len(obj) - 1
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return
        best_ratio = None
        leave = None
        for r, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[r] < basis[leave]
                ):
                    best_ratio = ratio
                    leave = r
        if leave is None:
            raise UnboundedError("objective improves without bound")
        _pivot(rows, obj, basis, leave, enter)


def _phase_one(rows: list[Row], nreal: int) -> list[int]:
    """Bring the tableau to a feasible basis; may drop redundant rows.

    ``rows`` holds equality rows with non-negative right-hand sides over
    ``nreal`` columns plus the rhs.  On return the rows are rewritten in
    terms of a feasible basis over the real columns and the basis (one
    real column per remaining row) is returned.
    """
    m = len(rows)
    for r, row in enumerate(rows):
        art = [_ZERO] * m
        art[r] = _ONE
        rows[r] = row[:-1] + art + [row[-1]]
    basis = [nreal + r for r in range(m)]
    obj: Row = [_ZERO] * (nreal + m + 1)
    for row in rows:
        for j in range(nreal):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    _bland_minimize(rows, obj, basis)
    if -obj[-1] != 0:
        raise InfeasibleError("no feasible point")

    for r in range(len(rows)):
        if basis[r] >= nreal:
            col = next((j for j in range(nreal) if rows[r][j] != 0), None)
            if col is not None:
                _pivot(rows, obj, basis, r, col)

    keep = [r for r in range(len(rows)) if basis[r] < nreal]
    pruned = [rows[r][:nreal] + [rows[r][-1]] for r in keep]
    new_basis = [basis[r] for r in keep]
    rows.clear()
    rows.extend(pruned)
    return new_basis


def _standardize(n: int, constraints: Iterable[Constraint]) -> tuple[list[Row], int]:
    """Equality rows with slack columns appended and non-negative rhs."""
    cons = []
    nslack = 0
    for coeffs, rel, rhs in constraints:
        if rel not in ("<=", "==", ">="):
            raise ValueError(f"unknown relation {rel!r}")
        coeffs = list(coeffs)
        if len(coeffs) != n:
            raise ValueError(f"constraint has {len(coeffs)} coefficients, expected {n}")
        cons.append((coeffs, rel, Fraction(rhs)))
        if rel != "==":
            nslack += 1
    rows: list[Row] = []
    slack_at = 0
    for coeffs, rel, rhs in cons:
        row = [Fraction(c) for c in coeffs] + [_ZERO] * nslack + [rhs]
        if rel != "==":
            row[n + slack_at] = _ONE if rel == "<=" else -_ONE
            slack_at += 1
        if row[-1] < 0:
            row = [-v for v in row]
        rows.append(row)
    return rows, n + nslack


def solve_lp(
    objective: Sequence[Fraction],
    constraints: Iterable[Constraint],
    *,
    maximize: bool = False,
) -> LPSolution:
    """Optimize ``objective . x`` over ``x >= 0`` under the constraints.

    Returns the exact optimum and a witness point.  Raises
    :class:`InfeasibleError` or :class:`UnboundedError` accordingly.
    """
    n = len(objective)
    rows, ncols = _standardize(n, constraints)
    basis = _phase_one(rows, ncols)

    costs = [Fraction(c) for c in objective] + [_ZERO] * (ncols - n)
    if maximize:
        costs = [-c for c in costs]
    obj: Row = costs + [_ZERO]
    for r, b in enumerate(basis):
        if obj[b] != 0:
            f = obj[b]
            for j, v in enumerate(rows[r]):
                obj[j] -= f * v
    _bland_minimize(rows, obj, basis)

    point = [_ZERO] * n
    for r, b in enumerate(basis):
        if b < n:
            point[b] = rows[r][-1]
    value = -obj[-1]
    if maximize:
        value = -value
    return LPSolution(value, tuple(point))


def feasible_point(n: int, constraints: Iterable[Constraint]) -> tuple[Fraction, ...]:
    """Any feasible point (a phase-one basic solution), exact."""
    rows, ncols = _standardize(n, constraints)
    basis = _phase_one(rows, ncols)
    point = [_ZERO] * n
    for r, b in enumerate(basis):
        if b < n:
            point[b] = rows[r][-1]
    return tuple(point)


# ---------------------------------------------------------------------------
# Vertex enumeration for {x >= 0 : Ax = b}.


def _independent_rows(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Row]:
    """Gaussian elimination keeping one row per pivot; detects inconsistency."""
    aug = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]
    n = len(aug[0]) - 1 if aug else 0
    kept: list[Row] = []
    for col in range(n):
        src = next((r for r in range(len(aug)) if aug[r][col] != 0), None)
        if src is None:
            continue
        row = aug.pop(src)
        row = [v / row[col] for v in row]
        kept.append(row)
        for r in range(len(aug)):
            if aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * p for v, p in zip(aug[r], row)]
    for row in aug:
        if row[-1] != 0:
            raise InfeasibleError("inconsistent equality system")
    return kept


def _tableau_for_basis(rows: list[Row], basis: Sequence[int]) -> list[Row] | None:
    """Rewrite independent equality rows in terms of the given basis.

    Returns None when the basis columns are singular.  Row ``k`` of the
    result is the unit row of ``basis[k]``.
    """
    aug = [row[:] for row in rows]
    m = len(aug)
    for k, col in enumerate(basis):
        src = next((r for r in range(k, m) if aug[r][col] != 0), None)
        if src is None:
            return None
        aug[k], aug[src] = aug[src], aug[k]
        piv = aug[k][col]
        aug[k] = [v / piv for v in aug[k]]
        for r in range(m):
            if r != k and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * p for v, p in zip(aug[r], aug[k])]
    return aug


def enumerate_vertices_eq(
    a: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    *,
    cap: int = DEFAULT_BASIS_CAP,
) -> list[tuple[Fraction, ...]]:
    """All vertices of the bounded polyhedron ``{x >= 0 : Ax = b}``.

    Walks the graph of feasible bases by single pivots, so the polytope
    must be bounded (unbounded edge directions are ignored).  Raises
    :class:`InfeasibleError` when the polyhedron is empty and
    :class:`CapExceededError` when more than ``cap`` bases are visited.
    """
    a = [list(row) for row in a]
    if not a:
        return [()]
    n = len(a[0])
    reduced = _independent_rows(a, b)
    if not reduced:
        return [tuple([_ZERO] * n)]

    rows = [row[:] for row in reduced]
    for r, row in enumerate(rows):
        if row[-1] < 0:
            rows[r] = [-v for v in row]
    start = _phase_one(rows, n)

    m = len(start)
    first = tuple(sorted(start))
    seen: set[tuple[int, ...]] = {first}
    queue: deque[tuple[int, ...]] = deque([first])
    points: dict[tuple[Fraction, ...], None] = {}

    while queue:
        basis = queue.popleft()
        tab = _tableau_for_basis(reduced, basis)
        if tab is None:
            continue
        point = [_ZERO] * n
        for k, col in enumerate(basis):
            point[col] = tab[k][-1]
        points.setdefault(tuple(point))

        basic = set(basis)
        for j in range(n):
            if j in basic:
                continue
            best = None
            leave: list[int] = []
            for r in range(m):
                if tab[r][j] > 0:
                    ratio = tab[r][-1] / tab[r][j]
                    if best is None or ratio < best:
                        best = ratio
                        leave = [r]
                    elif ratio == best:
                        leave.append(r)
            if best is None:
                continue  # unbounded edge; irrelevant for bounded polytopes
            for r in leave:
                nb = tuple(sorted(basic - {basis[r]} | {j}))
                if nb not in seen:
                    seen.add(nb)
                    if len(seen) > cap:
                        raise CapExceededError(f"more than {cap} feasible bases")
                    queue.append(nb)
    return sorted(points)
