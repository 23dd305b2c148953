"""Reduction of one-space theories to probabilistic satisfiability.

A probabilistic satisfiability instance is a set of assessments
``P(formula) = value``; it is satisfiable when some distribution over
truth assignments matches every assessment.  A theory with a single
choice space turns into such an instance: a hard (probability-one)
formula whose models are exactly the worlds, one assessment per atomic
choice, and one assessment ``P(query) = alpha`` for the probe value.
Deciding a sequence of probes brackets the exact query interval by
bisection, without ever enumerating the credal set itself.

Satisfiability is decided exactly: the models of the hard formula are
enumerated by backtracking over its CNF, and a rational linear program
looks for a distribution over them meeting the soft assessments.

The ``xor`` connective here is n-ary *exclusive selection*: true when
exactly one operand is true.  Its CNF is one disjunction plus pairwise
negative clauses, so no auxiliary variables are introduced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import lp
from .errors import CapExceededError, InfeasibleError
from .inference import IntervalResult, marginal_polytope, _eq_constraints, _query_worlds
from .logic import Atom, GroundProgram, Literal, check_acyclic
from .rational import format_fraction
from .theory import CCLTheory, Query
from .worlds import WorldSpace, build_world_space

DEFAULT_CLAUSE_CAP = 100_000
DEFAULT_VAR_CAP = 24

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class Formula:
    """A boolean formula tree over ground atoms.

    ``kind`` is one of ``var``, ``not``, ``and``, ``or``, ``xor``; the
    empty conjunction serves as truth, the empty disjunction as falsity.
    """

    kind: str
    atom: Atom | None = None
    children: tuple["Formula", ...] = ()

    def atoms(self) -> list[Atom]:
        seen: dict[Atom, None] = {}

        def walk(f: "Formula") -> None:
            if f.kind == "var":
                seen.setdefault(f.atom)
            for c in f.children:
                walk(c)

        walk(self)
        return list(seen)

    def evaluate(self, true_atoms: frozenset[Atom] | set[Atom]) -> bool:
        if self.kind == "var":
            return self.atom in true_atoms
        if self.kind == "not":
            return not self.children[0].evaluate(true_atoms)
        if self.kind == "and":
            return all(c.evaluate(true_atoms) for c in self.children)
        if self.kind == "or":
            return any(c.evaluate(true_atoms) for c in self.children)
        if self.kind == "xor":
            return sum(1 for c in self.children if c.evaluate(true_atoms)) == 1
        raise ValueError(f"unknown formula kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "var":
            return str(self.atom)
        if self.kind == "not":
            inner = self.children[0]
            text = str(inner)
            return f"~{text}" if inner.kind == "var" else f"~({text})"
        if not self.children:
            return "true" if self.kind == "and" else "false"
        sep = {"and": " & ", "or": " | ", "xor": " ^ "}[self.kind]
        parts = [
            str(c) if c.kind in ("var", "not") else f"({c})" for c in self.children
        ]
        return sep.join(parts)


def var_(a: Atom) -> Formula:
    return Formula("var", atom=a)


def not_(f: Formula) -> Formula:
    return Formula("not", children=(f,))


def and_(*fs: Formula) -> Formula:
    return Formula("and", children=tuple(fs))


def or_(*fs: Formula) -> Formula:
    return Formula("or", children=tuple(fs))


def xor_(*fs: Formula) -> Formula:
    if len(fs) == 1:
        return fs[0]
    return Formula("xor", children=tuple(fs))


TRUE = and_()
FALSE = or_()

Clause = tuple[tuple[Atom, bool], ...]


def _mk_clause(literals: Iterable[tuple[Atom, bool]]) -> Clause | None:
    """Normalize a clause; None means it is a tautology."""
    seen: dict[Atom, bool] = {}
    for a, pos in literals:
        if a in seen and seen[a] != pos:
            return None
        seen[a] = pos
    return tuple(sorted(seen.items()))


def _xor_as_or(children: Sequence[Formula]) -> Formula:
    """Exclusive selection as a plain disjunction of minterms."""
    return or_(
        *(
            and_(c, *(not_(d) for j, d in enumerate(children) if j != i))
            for i, c in enumerate(children)
        )
    )


def cnf(f: Formula, *, cap: int = DEFAULT_CLAUSE_CAP) -> tuple[Clause, ...]:
    """An equivalent CNF over the same variables (no auxiliaries).

    Exclusive selections over plain literals use the pairwise encoding;
    everything else is negation-pushed and distributed, with a guard on
    the clause count.
    """
    out: dict[Clause, None] = {}

    def emit(cl: Clause | None) -> None:
        if cl is not None:
            out.setdefault(cl)
            if len(out) > cap:
                raise CapExceededError(f"CNF grew past {cap} clauses")

    def literal_of(g: Formula) -> tuple[Atom, bool] | None:
        if g.kind == "var":
            return (g.atom, True)
        if g.kind == "not" and g.children[0].kind == "var":
            return (g.children[0].atom, False)
        return None

    def clauses_of(g: Formula, negate: bool) -> list[Clause]:
        kind = g.kind
        if kind == "var":
            return [((g.atom, not negate),)]
        if kind == "not":
            return clauses_of(g.children[0], not negate)
        if kind == "xor":
            lits = [literal_of(c) for c in g.children]
            if not negate and all(l is not None for l in lits):
                cls: list[Clause] = []
                whole = _mk_clause(lits)
                if whole is not None:
                    cls.append(whole)
                for i in range(len(lits)):
                    for j in range(i + 1, len(lits)):
                        pair = _mk_clause(
                            [(lits[i][0], not lits[i][1]), (lits[j][0], not lits[j][1])]
                        )
                        if pair is not None:
                            cls.append(pair)
                return cls
            return clauses_of(_xor_as_or(g.children), negate)
        if (kind == "and" and not negate) or (kind == "or" and negate):
            result: list[Clause] = []
            for c in g.children:
                result.extend(clauses_of(c, negate))
                if len(result) > cap:
                    raise CapExceededError(f"CNF grew past {cap} clauses")
            return result
        # disjunction: distribute the children's clause sets
        parts = [clauses_of(c, negate) for c in g.children]
        result = [()]
        for clauses in parts:
            merged: list[Clause] = []
            for acc in result:
                for cl in clauses:
                    combined = _mk_clause(list(acc) + list(cl))
                    if combined is not None:
                        merged.append(combined)
                if len(merged) > cap:
                    raise CapExceededError(f"CNF grew past {cap} clauses")
            result = merged
            if not result:
                return []  # one child is tautologically true
        return result

    for cl in clauses_of(f, False):
        emit(cl)
    return tuple(out)


def enumerate_models(
    formulas: Sequence[Formula],
    variables: Sequence[Atom] | None = None,
    *,
    var_cap: int = DEFAULT_VAR_CAP,
    clause_cap: int = DEFAULT_CLAUSE_CAP,
) -> list[frozenset[Atom]]:
    """All assignments over the variables satisfying every formula.

    Backtracks over the variables in sorted order, pruning with the
    formulas' CNF.  The variable set may be widened explicitly so that
    assignments cover atoms the formulas do not mention.
    """
    var_set: dict[Atom, None] = {}
    for f in formulas:
        for a in f.atoms():
            var_set.setdefault(a)
    for a in variables or ():
        var_set.setdefault(a)
    atoms = sorted(var_set)
    if len(atoms) > var_cap:
        raise CapExceededError(f"{len(atoms)} variables, more than the cap of {var_cap}")

    index = {a: i for i, a in enumerate(atoms)}
    clauses: list[tuple[tuple[int, bool], ...]] = []
    for f in formulas:
        for cl in cnf(f, cap=clause_cap):
            clauses.append(tuple((index[a], pos) for a, pos in cl))
    by_var: list[list[int]] = [[] for _ in atoms]
    for ci, cl in enumerate(clauses):
        for vi, _ in cl:
            by_var[vi].append(ci)

    n = len(atoms)
    assign: list[bool | None] = [None] * n
    out: list[frozenset[Atom]] = []

    def violated(ci: int) -> bool:
        undecided = False
        for vi, pos in clauses[ci]:
            v = assign[vi]
            if v is None:
                undecided = True
            elif v == pos:
                return False
        return not undecided

    def walk(i: int) -> None:
        if i == n:
            out.append(frozenset(a for a, v in zip(atoms, assign) if v))
            return
        for value in (False, True):
            assign[i] = value
            if not any(violated(ci) for ci in by_var[i]):
                walk(i + 1)
        assign[i] = None

    walk(0)
    return out


# ---------------------------------------------------------------------------
# From theories to instances.


def completion_formula(gp: GroundProgram, open_atoms: Iterable[Atom] = ()) -> Formula:
    """The program as a formula: each head equivalent to its bodies.

    Atoms heading no clause are forced false unless listed in
    ``open_atoms`` (external inputs such as atomic choices), which are
    left unconstrained.  For acyclic programs the models, restricted to
    assignments of the open atoms, are exactly the stable models.
    """
    check_acyclic(gp)
    rules = gp.rules_by_head()
    opened = frozenset(open_atoms)
    conjuncts: list[Formula] = []
    for a in sorted(gp.herbrand_base):
        if a in rules:
            bodies = or_(
                *(
                    and_(*(_lit_formula(l) for l in cl.body))
                    for cl in rules[a]
                )
            )
            head = var_(a)
            conjuncts.append(and_(or_(not_(head), bodies), or_(head, not_(bodies))))
        elif a not in opened:
            conjuncts.append(not_(var_(a)))
    return and_(*conjuncts)


def _lit_formula(l: Literal) -> Formula:
    return var_(l.atom) if l.positive else not_(var_(l.atom))


def choice_formula(space) -> Formula:
    """Exactly one atom per alternative, conjoined over the space."""
    return and_(*(xor_(*(var_(a) for a in alt.atoms)) for alt in space.alternatives))


@dataclass(frozen=True)
class Assessment:
    formula: Formula
    prob: Fraction


@dataclass(frozen=True)
class PSATInstance:
    assessments: tuple[Assessment, ...]

    def variables(self) -> list[Atom]:
        seen: dict[Atom, None] = {}
        for a in self.assessments:
            for at in a.formula.atoms():
                seen.setdefault(at)
        return sorted(seen)

    def hard_formulas(self) -> list[Formula]:
        return [a.formula for a in self.assessments if a.prob == 1]


def build_psat_instance(t: CCLTheory, q: Query, alpha: Fraction) -> PSATInstance:
    """Hard world formula, one assessment per atomic choice, one probe."""
    if len(t.spaces) != 1:
        raise ValueError("the reduction needs exactly one choice space")
    alpha = Fraction(alpha)
    if not (0 <= alpha <= 1):
        raise ValueError(f"probe probability {alpha} outside [0, 1]")
    q.check_against(t)
    space = t.spaces[0]
    hard = and_(choice_formula(space), completion_formula(t.ground_program, space.atomic_choices))
    assessments = [Assessment(hard, _ONE)]
    assessments += [Assessment(var_(a), Fraction(t.mu[a])) for a in space.atomic_choices]
    query_formula = and_(*(_lit_formula(l) for l in sorted(q.literals)))
    assessments.append(Assessment(query_formula, alpha))
    return PSATInstance(tuple(assessments))


def psat_decide(
    inst: PSATInstance,
    *,
    var_cap: int = DEFAULT_VAR_CAP,
    clause_cap: int = DEFAULT_CLAUSE_CAP,
) -> bool:
    """True iff some distribution over assignments meets every assessment."""
    variables = inst.variables()
    models = enumerate_models(
        inst.hard_formulas(), variables, var_cap=var_cap, clause_cap=clause_cap
    )
    n = len(models)
    constraints: list[lp.Constraint] = [([_ONE] * n, "==", _ONE)]
    for a in inst.assessments:
        if a.prob == 1:
            continue  # the models already satisfy hard formulas
        coeffs = [_ONE if a.formula.evaluate(m) else _ZERO for m in models]
        constraints.append((coeffs, "==", a.prob))
    try:
        lp.feasible_point(n, constraints)
    except InfeasibleError:
        return False
    return True


# ---------------------------------------------------------------------------
# Bracketing the exact interval by bisection.


@dataclass
class BracketState:
    """Bisection bookkeeping; ``None`` marks a side settled exactly."""

    epsilon: Fraction = Fraction(1, 1024)
    sat_low: Fraction | None = None
    sat_high: Fraction | None = None
    unsat_low: Fraction | None = None
    unsat_high: Fraction | None = None
    probes: list[tuple[Fraction, bool]] = field(default_factory=list)

    @property
    def calls(self) -> int:
        return len(self.probes)


def inner_point(t: CCLTheory, q: Query, *, world_space: WorldSpace | None = None) -> Fraction:
    """A query value attained by some admissible mass assignment.

    Computed from a feasible point of the single-space marginal system,
    so probing it always answers satisfiable.
    """
    if len(t.spaces) != 1:
        raise ValueError("inner_point needs exactly one choice space")
    ws = world_space or build_world_space(t)
    polytope = marginal_polytope(ws, 0)
    point = lp.feasible_point(polytope.n_classes, _eq_constraints(polytope))
    sat = set(_query_worlds(ws, q))
    classes = ws.classes_by_space[0]
    return sum(
        (v for cls, v in zip(classes, point) if cls.world_indices[0] in sat), _ZERO
    )


def bisect_bounds(
    t: CCLTheory,
    q: Query,
    epsilon: Fraction = Fraction(1, 1024),
    *,
    state: BracketState | None = None,
    var_cap: int = DEFAULT_VAR_CAP,
) -> IntervalResult:
    """Bracket the exact interval with probes, to within ``epsilon``.

    Probes 0 and 1 first (a satisfiable boundary is an exact endpoint),
    then runs two independent bisections between the inner point and the
    nearest unsatisfiable probe.  The returned interval contains the
    exact one and each endpoint is within ``epsilon`` of it.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mid_value = inner_point(t, q)
    st = state if state is not None else BracketState(epsilon)
    st.epsilon = epsilon
    st.sat_low = st.sat_high = mid_value

    def probe(alpha: Fraction) -> bool:
        result = psat_decide(build_psat_instance(t, q, alpha), var_cap=var_cap)
        st.probes.append((alpha, result))
        return result

    if probe(_ZERO):
        lower = _ZERO
        st.sat_low = _ZERO
    else:
        st.unsat_low = _ZERO
        while st.sat_low - st.unsat_low > epsilon:
            mid = (st.sat_low + st.unsat_low) / 2
            if probe(mid):
                st.sat_low = mid
            else:
                st.unsat_low = mid
        lower = st.unsat_low

    if probe(_ONE):
        upper = _ONE
        st.sat_high = _ONE
    else:
        st.unsat_high = _ONE
        while st.unsat_high - st.sat_high > epsilon:
            mid = (st.sat_high + st.unsat_high) / 2
            if probe(mid):
                st.sat_high = mid
            else:
                st.unsat_high = mid
        upper = st.unsat_high

    return IntervalResult(lower, upper, "psat_bisect", epsilon)


# ---------------------------------------------------------------------------
# Plain-text export.


def export_psat(inst: PSATInstance) -> str:
    """The instance as text: assessments, then the hard CNF in DIMACS form."""
    lines = [f"{format_fraction(a.prob)} {a.formula}" for a in inst.assessments]
    variables = inst.variables()
    index = {a: i + 1 for i, a in enumerate(variables)}
    clauses: list[Clause] = []
    for f in inst.hard_formulas():
        clauses.extend(cnf(f))
    lines.append("c hard formula as CNF")
    for a in variables:
        lines.append(f"c {index[a]} = {a}")
    lines.append(f"p cnf {len(variables)} {len(clauses)}")
    for cl in clauses:
        nums = [index[a] if pos else -index[a] for a, pos in cl]
        lines.append(" ".join(str(v) for v in nums + [0]))
    return "\n".join(lines) + "\n"
