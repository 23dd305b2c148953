"""Pairwise object comparison from observed rankings.

From a multiset of complete rankings we count how often each object
takes each position, smooth the counts into an exact doubly stochastic
marginal matrix, and encode the matrix as a one-space theory: for every
object, an alternative over its possible positions; for every position,
an alternative over the objects that may take it.  The two families
overlap atom by atom, so coherent selections are exactly the
permutations, and the credal machinery yields interval probabilities
for "object A is ranked better than object B" without inventing a joint
distribution the marginals do not determine.

Ranking files hold one ranking per line, best first, comma separated,
with an optional ``xK`` multiplicity suffix::

    a,b,c x3
    b,a,c

Counts files are CSV: a header of object names, one row per position,
and a final ``N=<total>`` line.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParseError
from .inference import (
    IntervalResult,
    credal_bounds_single_space,
    proxy_query_value,
)
from .logic import Atom, Clause, Literal, Program, atom
from .psat import bisect_bounds
from .rational import format_fraction
from .theory import Alternative, CCLTheory, ChoiceSpace, Query, validate_theory
from .worlds import build_world_space

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class RankingDataset:
    """Named objects and a multiset of complete rankings (best first)."""

    objects: tuple[str, ...]
    rankings: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.objects)
        if len(set(self.objects)) != n:
            raise ValueError("object names must be distinct")
        expected = frozenset(range(n))
        for r in self.rankings:
            if frozenset(r) != expected or len(r) != n:
                names = ",".join(self.objects[i] for i in r if i < n)
                raise ValueError(f"malformed ranking (not a permutation): {names}")

    @property
    def n(self) -> int:
        return len(self.objects)

    @property
    def total(self) -> int:
        return len(self.rankings)


@dataclass(frozen=True)
class CountMatrix:
    """``counts[j][i]``: how many rankings put object ``i`` at position ``j``."""

    objects: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    total: int

    def __post_init__(self):
        n = len(self.objects)
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ValueError("counts must be a square matrix over the objects")
        for j, row in enumerate(self.counts):
            if any(c < 0 for c in row):
                raise ValueError("counts must be non-negative")
            if sum(row) != self.total:
                raise ValueError(f"row {j} sums to {sum(row)}, expected {self.total}")
        for i in range(n):
            col = sum(row[i] for row in self.counts)
            if col != self.total:
                raise ValueError(f"column {i} sums to {col}, expected {self.total}")


def counts_from_rankings(d: RankingDataset) -> CountMatrix:
    n = d.n
    counts = [[0] * n for _ in range(n)]
    for r in d.rankings:
        for position, obj in enumerate(r):
            counts[position][obj] += 1
    return CountMatrix(d.objects, tuple(tuple(row) for row in counts), d.total)


@dataclass(frozen=True)
class MarginalMatrix:
    """``alpha[i][j]``: probability that object ``i`` takes position ``j``.

    Exactly doubly stochastic, with every entry strictly inside (0, 1).
    """

    objects: tuple[str, ...]
    alpha: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.objects)
        for row in self.alpha:
            if sum(row, _ZERO) != _ONE:
                raise ValueError("marginal rows must sum to 1")
            if any(not (0 < v < 1) for v in row):
                raise ValueError("marginal entries must lie strictly between 0 and 1")
        for j in range(n):
            if sum((row[j] for row in self.alpha), _ZERO) != _ONE:
                raise ValueError("marginal columns must sum to 1")


def smooth_marginals(c: CountMatrix, equivalent_size: Fraction = Fraction(2)) -> MarginalMatrix:
    """Additive smoothing with total prior weight ``equivalent_size``.

    ``alpha[i][j] = (counts[j][i] + s/n) / (N + s)``; the uniform prior
    keeps the matrix exactly doubly stochastic and every entry positive.
    """
    s = Fraction(equivalent_size)
    if s <= 0:
        raise ValueError("equivalent_size must be positive")
    n = len(c.objects)
    if n < 2:
        raise ValueError("need at least two objects")
    denom = c.total + s
    prior = s / n
    alpha = tuple(
        tuple((c.counts[j][i] + prior) / denom for j in range(n)) for i in range(n)
    )
    return MarginalMatrix(c.objects, alpha)


def position_atom(position: int, obj_name: str) -> Atom:
    """The atom saying ``obj_name`` sits at 1-based ``position``."""
    return atom(f"r{position}", obj_name)


def build_ranking_theory(m: MarginalMatrix) -> CCLTheory:
    """One space: per-object position alternatives and per-position object
    alternatives, sharing their atoms."""
    n = len(m.objects)
    mu: dict[Atom, Fraction] = {}
    per_object = []
    for i, name in enumerate(m.objects):
        atoms = tuple(position_atom(j + 1, name) for j in range(n))
        for j, a in enumerate(atoms):
            mu[a] = m.alpha[i][j]
        per_object.append(Alternative(atoms))
    per_position = [
        Alternative(tuple(position_atom(j + 1, name) for name in m.objects))
        for j in range(n)
    ]
    theory = CCLTheory(Program(), (ChoiceSpace(tuple(per_object + per_position)),), mu)
    report = validate_theory(theory)
    if not report.ok:
        raise ValueError(f"ranking theory failed validation: {report}")
    return theory


def pairwise_query(
    t: CCLTheory, m: MarginalMatrix, first: int, second: int, *, better: bool = True
) -> tuple[CCLTheory, Query]:
    """Extend the theory with a fresh atom true iff ``first`` beats ``second``.

    ``better=True`` reads "beats" as taking a smaller position index;
    ``better=False`` flips the comparison.  One clause is added per
    position pair, so the query atom is decided in every world.
    """
    if first == second:
        raise ValueError("need two distinct objects")
    n = len(m.objects)
    name = "q"
    taken = {a.relation for a in t.herbrand_base}
    while name in taken:
        name += "q"
    q_atom = Atom(name)
    clauses = []
    for j1 in range(1, n + 1):
        for j2 in range(1, n + 1):
            ahead = j1 < j2 if better else j1 > j2
            if ahead:
                body = (
                    Literal(position_atom(j1, m.objects[first])),
                    Literal(position_atom(j2, m.objects[second])),
                )
                clauses.append(Clause(q_atom, body))
    extended = CCLTheory(t.program.extend(clauses), t.spaces, t.mu)
    return extended, Query(frozenset({Literal(q_atom)}))


@dataclass(frozen=True)
class PreferenceDecision:
    """Verdict for one ordered pair at a given threshold."""

    pair: tuple[int, int]
    interval: IntervalResult
    threshold: Fraction
    verdict: str  # "first" | "second" | "indeterminate"


def decide_preference(
    interval: IntervalResult,
    threshold: Fraction = Fraction(1, 2),
    pair: tuple[int, int] = (0, 1),
) -> PreferenceDecision:
    """Dominance at the threshold; a touching endpoint stays indeterminate."""
    threshold = Fraction(threshold)
    if interval.lower > threshold:
        verdict = "first"
    elif interval.upper < threshold:
        verdict = "second"
    else:
        verdict = "indeterminate"
    return PreferenceDecision((pair[0], pair[1]), interval, threshold, verdict)


# ---------------------------------------------------------------------------
# End-to-end evaluation.


@dataclass(frozen=True)
class PairOutcome:
    pair: tuple[str, str]
    interval: IntervalResult
    ccl_verdict: str  # "first" | "second" | "indeterminate"
    icl_value: Fraction
    icl_verdict: str | None  # None when the point value hits the threshold
    truth: str | None  # None for ties or missing ground truth


@dataclass(frozen=True)
class EvaluationReport:
    objects: tuple[str, ...]
    pairs: tuple[PairOutcome, ...]
    determinacy_rate: Fraction
    icl_acc_determinate: Fraction | None
    icl_acc_indeterminate: Fraction | None
    counts: CountMatrix | None = None

    def to_json_dict(self) -> dict:
        def verdict_label(pair: tuple[str, str], verdict: str | None) -> str | None:
            if verdict == "first":
                return f"{pair[0]}>{pair[1]}"
            if verdict == "second":
                return f"{pair[1]}>{pair[0]}"
            return verdict

        counts = None
        if self.counts is not None:
            counts = {
                "matrix": [list(row) for row in self.counts.counts],
                "total": self.counts.total,
            }
        return {
            "objects": list(self.objects),
            "counts": counts,
            "pairs": [
                {
                    "pair": list(p.pair),
                    "interval": p.interval.to_json_dict(),
                    "ccl_verdict": verdict_label(p.pair, p.ccl_verdict),
                    "icl_value": format_fraction(p.icl_value),
                    "icl_value_dec": float(p.icl_value),
                    "icl_verdict": verdict_label(p.pair, p.icl_verdict),
                    "truth": verdict_label(p.pair, p.truth),
                }
                for p in self.pairs
            ],
            "determinacy_rate": _rate_json(self.determinacy_rate),
            "icl_acc_determinate": _rate_json(self.icl_acc_determinate),
            "icl_acc_indeterminate": _rate_json(self.icl_acc_indeterminate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _rate_json(x: Fraction | None):
    if x is None:
        return None
    return {"value": format_fraction(x), "dec": float(x)}


def _majority_truth(rankings: Sequence[tuple[int, ...]], first: int, second: int) -> str | None:
    wins = losses = 0
    for r in rankings:
        if r.index(first) < r.index(second):
            wins += 1
        else:
            losses += 1
    if wins > losses:
        return "first"
    if losses > wins:
        return "second"
    return None


def report_from_marginals(
    marginals: MarginalMatrix,
    *,
    threshold: Fraction = Fraction(1, 2),
    backend: str = "lp",
    epsilon: Fraction = Fraction(1, 1024),
    truth_rankings: Sequence[tuple[int, ...]] | None = None,
    counts: CountMatrix | None = None,
) -> EvaluationReport:
    """Interval and point decisions for every unordered pair.

    Ground truth (majority preference) is filled in when rankings are
    provided; otherwise the truth fields stay empty and no accuracies
    are reported.  ``counts`` is echoed into the report untouched.
    """
    base_theory = build_ranking_theory(marginals)
    outcomes: list[PairOutcome] = []
    n = len(marginals.objects)
    for i in range(n):
        for j in range(i + 1, n):
            extended, q = pairwise_query(base_theory, marginals, i, j)
            ws = build_world_space(extended)
            if backend == "lp":
                interval = credal_bounds_single_space(extended, q, world_space=ws)
            elif backend == "psat":
                interval = bisect_bounds(extended, q, epsilon)
            else:
                raise ValueError(f"unknown backend {backend!r}")
            decision = decide_preference(interval, threshold, (i, j))
            point = proxy_query_value(extended, q, world_space=ws)
            if point > threshold:
                icl_verdict: str | None = "first"
            elif point < threshold:
                icl_verdict = "second"
            else:
                icl_verdict = None
            truth = (
                _majority_truth(truth_rankings, i, j) if truth_rankings is not None else None
            )
            outcomes.append(
                PairOutcome(
                    (marginals.objects[i], marginals.objects[j]),
                    interval,
                    decision.verdict,
                    point,
                    icl_verdict,
                    truth,
                )
            )

    total_pairs = len(outcomes)
    determinate = [p for p in outcomes if p.ccl_verdict != "indeterminate"]
    rate = Fraction(len(determinate), total_pairs) if total_pairs else Fraction(0)

    def accuracy(group: list[PairOutcome]) -> Fraction | None:
        scored = [p for p in group if p.truth is not None and p.icl_verdict is not None]
        if not scored:
            return None
        hits = sum(1 for p in scored if p.icl_verdict == p.truth)
        return Fraction(hits, len(scored))

    indeterminate = [p for p in outcomes if p.ccl_verdict == "indeterminate"]
    return EvaluationReport(
        marginals.objects,
        tuple(outcomes),
        rate,
        accuracy(determinate),
        accuracy(indeterminate),
        counts,
    )


def evaluate(
    d: RankingDataset,
    *,
    equivalent_size: Fraction = Fraction(2),
    threshold: Fraction = Fraction(1, 2),
    backend: str = "lp",
    epsilon: Fraction = Fraction(1, 1024),
    holdout: Fraction | None = None,
    seed: int = 0,
) -> EvaluationReport:
    """Interval decisions for every pair, checked against majority truth.

    With ``holdout`` a fraction of the rankings is split off: marginals
    are learned on the remainder while ground truth comes from the
    held-out part.  Accuracy of the point-valued (independence-proxy)
    verdicts is reported separately on the pairs where the interval
    decision is determinate and where it is not; pairs without defined
    truth or verdict are left out of the accuracy denominators.
    """
    truth_rankings: Sequence[tuple[int, ...]] = d.rankings
    train = d
    if holdout is not None:
        frac = Fraction(holdout)
        if not (0 < frac < 1):
            raise ValueError("holdout must lie strictly between 0 and 1")
        shuffled = list(d.rankings)
        random.Random(seed).shuffle(shuffled)
        cut = max(1, int(len(shuffled) * frac))
        if cut >= len(shuffled):
            raise ValueError("holdout leaves no training rankings")
        truth_rankings = tuple(shuffled[:cut])
        train = RankingDataset(d.objects, tuple(shuffled[cut:]))

    counts = counts_from_rankings(train)
    return report_from_marginals(
        smooth_marginals(counts, equivalent_size),
        threshold=threshold,
        backend=backend,
        epsilon=epsilon,
        truth_rankings=truth_rankings,
        counts=counts,
    )


# ---------------------------------------------------------------------------
# File ingestion.


def parse_rankings(text: str) -> RankingDataset:
    """Read the rankings file format (see the module docstring)."""
    names: list[str] = []
    index: dict[str, int] = {}
    rankings: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        count = 1
        parts = line.rsplit(None, 1)
        if len(parts) == 2 and parts[1].startswith("x") and parts[1][1:].isdigit():
            line, count = parts[0], int(parts[1][1:])
            if count < 1:
                raise ParseError("multiplicity must be at least 1", lineno)
        items = [p.strip() for p in line.split(",")]
        if any(not p for p in items):
            raise ParseError("empty object name in ranking", lineno)
        for p in items:
            if p not in index:
                index[p] = len(names)
                names.append(p)
        rankings.extend([tuple(index[p] for p in items)] * count)
    if not rankings:
        raise ParseError("no rankings found")
    try:
        return RankingDataset(tuple(names), tuple(rankings))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse_counts_csv(text: str) -> CountMatrix:
    """Read the counts CSV format (see the module docstring)."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if len(lines) < 3:
        raise ParseError("counts file needs a header, rows, and an N= line")
    objects = tuple(name.strip() for name in lines[0].split(","))
    last = lines[-1]
    if not last.startswith("N="):
        raise ParseError("counts file must end with an N=<total> line")
    try:
        total = int(last[2:])
    except ValueError as exc:
        raise ParseError(f"bad total: {last!r}") from exc
    rows = []
    for lineno, line in enumerate(lines[1:-1], start=2):
        try:
            row = tuple(int(v.strip()) for v in line.split(","))
        except ValueError as exc:
            raise ParseError(f"bad count row: {line!r}", lineno) from exc
        rows.append(row)
    try:
        return CountMatrix(objects, tuple(rows), total)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
