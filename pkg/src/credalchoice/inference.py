"""Interval-valued query probabilities, computed exactly.

For each choice space the admissible mass assignments over its classes
form a polytope: non-negative weights that sum to one and whose totals
over the classes containing each atomic choice equal that atom's mass.
Queries are then bounded in three ways:

* ``credal_bounds_single_space`` - exact bounds by linear programming,
  for theories with a single choice space;
* ``credal_bounds_strong_extension`` - exact bounds for any number of
  spaces, optimizing the product objective over combinations of the
  per-space polytope vertices (the objective is linear in each factor,
  so the optimum is attained at such a combination);
* ``outer_bound`` - a cheap factorized relaxation: per-world products of
  classwise probability bounds, summed over the worlds satisfying the
  query (upper end clipped to one).  Always contains the exact interval.

When every space holds exactly one alternative the theory reads as a
fully independent one and ``icl_probability`` returns the point value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp
from .errors import CapExceededError
from .rational import format_fraction
from .theory import CCLTheory, Query
from .worlds import WorldSpace, build_world_space, satisfies

DEFAULT_COMBO_CAP = 1_000_000

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class MassFunction:
    """Non-negative weights summing to one, aligned with a domain order."""

    values: tuple[Fraction, ...]

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise ValueError("mass values must be non-negative")
        if sum(self.values, _ZERO) != _ONE:
            raise ValueError("mass values must sum to 1")


@dataclass(frozen=True)
class IntervalResult:
    """A closed probability interval with the method that produced it."""

    lower: Fraction
    upper: Fraction
    method: str
    epsilon: Fraction = _ZERO

    def __post_init__(self):
        if not (_ZERO <= self.lower <= self.upper <= _ONE):
            raise ValueError(f"not a probability interval: [{self.lower}, {self.upper}]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "lower": format_fraction(self.lower),
            "upper": format_fraction(self.upper),
            "lower_dec": float(self.lower),
            "upper_dec": float(self.upper),
            "method": self.method,
            "epsilon": format_fraction(self.epsilon),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


@dataclass(frozen=True)
class MarginalPolytope:
    """Admissible class masses of one space, as an equality system."""

    space_index: int
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]

    @property
    def n_classes(self) -> int:
        return len(self.rows[0])

    def contains(self, values: Sequence[Fraction]) -> bool:
        if len(values) != self.n_classes or any(v < 0 for v in values):
            return False
        return all(
            sum(c * v for c, v in zip(row, values)) == b
            for row, b in zip(self.rows, self.rhs)
        )


def marginal_polytope(ws: WorldSpace, space_index: int) -> MarginalPolytope:
    """Constraint system for the classes of one space."""
    t = ws.theory
    classes = ws.classes_by_space[space_index]
    n = len(classes)
    rows: list[tuple[Fraction, ...]] = [tuple([_ONE] * n)]
    rhs: list[Fraction] = [_ONE]
    for a in t.spaces[space_index].atomic_choices:
        rows.append(tuple(_ONE if a in cls.partial.image else _ZERO for cls in classes))
        rhs.append(t.mu[a])
    return MarginalPolytope(space_index, tuple(rows), tuple(rhs))


def _eq_constraints(p: MarginalPolytope) -> list[lp.Constraint]:
    return [(row, "==", b) for row, b in zip(p.rows, p.rhs)]


def enumerate_vertices(p: MarginalPolytope, *, cap: int = lp.DEFAULT_BASIS_CAP) -> list[MassFunction]:
    """All extreme points of the class-mass polytope, exact and deduplicated."""
    vertices = lp.enumerate_vertices_eq(p.rows, p.rhs, cap=cap)
    return [MassFunction(v) for v in vertices]


def _query_worlds(ws: WorldSpace, q: Query) -> list[int]:
    q.check_against(ws.theory)
    return [w.index for w in ws.worlds if satisfies(w, q)]


def icl_probability(t: CCLTheory, q: Query, *, world_space: WorldSpace | None = None) -> Fraction:
    """Point-valued query probability under the independence reading.

    Requires every choice space to hold exactly one alternative; the
    probability of a world is then the product of its selected masses.
    """
    for sp in t.spaces:
        if len(sp.alternatives) != 1:
            raise ValueError("icl_probability needs every choice space to be a single alternative")
    ws = world_space or build_world_space(t)
    total = _ZERO
    for i in _query_worlds(ws, q):
        total += _world_weight(t, ws.worlds[i])
    return total


def _world_weight(t: CCLTheory, world) -> Fraction:
    # an atom selected by several overlapping alternatives counts once
    weight = _ONE
    for part in world.choice.parts:
        for a in part.image:
            weight *= t.mu[a]
    return weight


def icl_mass_function(t: CCLTheory, *, world_space: WorldSpace | None = None) -> MassFunction:
    """The world mass function of an independence-reading theory."""
    for sp in t.spaces:
        if len(sp.alternatives) != 1:
            raise ValueError("icl_mass_function needs every choice space to be a single alternative")
    ws = world_space or build_world_space(t)
    return MassFunction(tuple(_world_weight(t, w) for w in ws.worlds))


def credal_bounds_single_space(
    t: CCLTheory, q: Query, *, world_space: WorldSpace | None = None
) -> IntervalResult:
    """Exact lower/upper query probabilities for a one-space theory."""
    if len(t.spaces) != 1:
        raise ValueError("credal_bounds_single_space needs exactly one choice space")
    ws = world_space or build_world_space(t)
    polytope = marginal_polytope(ws, 0)
    classes = ws.classes_by_space[0]
    sat = set(_query_worlds(ws, q))
    # with one space each class holds exactly one world
    objective = [
        _ONE if cls.world_indices[0] in sat else _ZERO for cls in classes
    ]
    constraints = _eq_constraints(polytope)
    lo = lp.solve_lp(objective, constraints).value
    hi = lp.solve_lp(objective, constraints, maximize=True).value
    return IntervalResult(lo, hi, "lp")


def credal_bounds_strong_extension(
    t: CCLTheory,
    q: Query,
    *,
    world_space: WorldSpace | None = None,
    vertex_cap: int = lp.DEFAULT_BASIS_CAP,
    combo_cap: int = DEFAULT_COMBO_CAP,
) -> IntervalResult:
    """Exact bounds over products of per-space admissible masses."""
    ws = world_space or build_world_space(t)
    sat = _query_worlds(ws, q)
    k = len(t.spaces)
    if k == 0:
        value = _ONE if sat else _ZERO
        return IntervalResult(value, value, "vertex_product")

    vertex_sets = [
        [mf.values for mf in enumerate_vertices(marginal_polytope(ws, i), cap=vertex_cap)]
        for i in range(k)
    ]
    combos = 1
    for vs in vertex_sets:
        combos *= len(vs)
    if combos > combo_cap:
        raise CapExceededError(f"{combos} vertex combinations, more than the cap of {combo_cap}")

    # class index per space for every satisfying world
    sat_profile = [
        tuple(ws.class_index_of(i, ws.worlds[wi]) for i in range(k)) for wi in sat
    ]

    lo = hi = None
    stack = [(0, [])]
    chosen: list[tuple[Fraction, ...]] = []

    def evaluate(parts: list[tuple[Fraction, ...]]) -> Fraction:
        total = _ZERO
        for profile in sat_profile:
            term = _ONE
            for i, ci in enumerate(profile):
                term *= parts[i][ci]
            total += term
        return total

    def walk(i: int) -> None:
        nonlocal lo, hi
        if i == k:
            v = evaluate(chosen)
            lo = v if lo is None or v < lo else lo
            hi = v if hi is None or v > hi else hi
            return
        for vs in vertex_sets[i]:
            chosen.append(vs)
            walk(i + 1)
            chosen.pop()

    walk(0)
    return IntervalResult(lo, hi, "vertex_product")


def outer_bound(t: CCLTheory, q: Query, *, world_space: WorldSpace | None = None) -> IntervalResult:
    """Factorized relaxation: products of classwise bounds, summed."""
    ws = world_space or build_world_space(t)
    sat = _query_worlds(ws, q)
    k = len(t.spaces)
    if k == 0:
        value = _ONE if sat else _ZERO
        return IntervalResult(value, value, "outer_bound")

    class_lo: list[list[Fraction]] = []
    class_hi: list[list[Fraction]] = []
    for i in range(k):
        polytope = marginal_polytope(ws, i)
        constraints = _eq_constraints(polytope)
        n = polytope.n_classes
        lows, highs = [], []
        for j in range(n):
            objective = [_ONE if jj == j else _ZERO for jj in range(n)]
            lows.append(lp.solve_lp(objective, constraints).value)
            highs.append(lp.solve_lp(objective, constraints, maximize=True).value)
        class_lo.append(lows)
        class_hi.append(highs)

    lo_total = _ZERO
    hi_total = _ZERO
    for wi in sat:
        w = ws.worlds[wi]
        lo_term = hi_term = _ONE
        for i in range(k):
            ci = ws.class_index_of(i, w)
            lo_term *= class_lo[i][ci]
            hi_term *= class_hi[i][ci]
        lo_total += lo_term
        hi_total += hi_term
    return IntervalResult(lo_total, min(hi_total, _ONE), "outer_bound")


# ---------------------------------------------------------------------------
# The independence-style point proxy for general theories.


def proxy_mass_function(t: CCLTheory, *, world_space: WorldSpace | None = None) -> MassFunction:
    """Product-of-masses weights over the worlds, renormalized.

    With pairwise-disjoint alternatives in every space the raw weights
    already sum to one and the proxy is a genuine member of the credal
    set; with overlapping alternatives it is only a heuristic reference
    point (use :func:`proxy_in_credal_set` to check membership).
    """
    ws = world_space or build_world_space(t)
    raw = [_world_weight(t, w) for w in ws.worlds]
    total = sum(raw, _ZERO)
    if total == 0:
        raise ValueError("every world has zero product weight; proxy undefined")
    return MassFunction(tuple(v / total for v in raw))


def proxy_query_value(
    t: CCLTheory, q: Query, *, world_space: WorldSpace | None = None
) -> Fraction:
    ws = world_space or build_world_space(t)
    proxy = proxy_mass_function(t, world_space=ws)
    return sum((proxy.values[i] for i in _query_worlds(ws, q)), _ZERO)


def proxy_in_credal_set(t: CCLTheory, *, world_space: WorldSpace | None = None) -> bool:
    """Does the proxy factor into admissible per-space class masses?

    The proxy always factorizes across spaces, so membership reduces to
    each factor satisfying its own marginal constraints.
    """
    ws = world_space or build_world_space(t)
    for i in range(len(t.spaces)):
        polytope = marginal_polytope(ws, i)
        classes = ws.classes_by_space[i]
        raw = []
        for cls in classes:
            weight = _ONE
            for a in cls.partial.image:
                weight *= t.mu[a]
            raw.append(weight)
        total = sum(raw, _ZERO)
        if total == 0:
            return False
        if not polytope.contains([v / total for v in raw]):
            return False
    return True
