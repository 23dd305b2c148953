"""Possible worlds of a theory and their grouping into classes.

A partial choice picks one atom from every alternative of a single
choice space, coherently: when the picked atom of one alternative also
belongs to another alternative of the same space, that other alternative
must pick the very same atom.  A total choice combines one partial
choice per space; its image, asserted as facts, determines a world (the
stable model of the program).

Worlds are enumerated in a canonical order: alternatives in declaration
order, atoms inside an alternative in declaration order, spaces in
declaration order.  Re-running the enumeration therefore reproduces
identical indices, which the textual world tables rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .errors import CapExceededError
from .logic import Atom, Interpretation, stable_model
from .theory import CCLTheory, ChoiceSpace, Query

DEFAULT_WORLD_CAP = 2**20


@dataclass(frozen=True)
class PartialChoice:
    """One coherent selection for a single choice space."""

    space_index: int
    selected: tuple[Atom, ...]  # aligned with the space's alternatives
    image: frozenset[Atom]

    def __str__(self) -> str:
        return "{" + ", ".join(str(a) for a in sorted(self.image)) + "}"


def partial_choice(space_index: int, selected: Sequence[Atom]) -> PartialChoice:
    return PartialChoice(space_index, tuple(selected), frozenset(selected))


@dataclass(frozen=True)
class TotalChoice:
    """One partial choice per space."""

    parts: tuple[PartialChoice, ...]

    @property
    def image(self) -> frozenset[Atom]:
        return frozenset(a for p in self.parts for a in p.image)


@dataclass(frozen=True)
class World:
    """A total choice together with the stable model it induces."""

    index: int
    choice: TotalChoice
    model: Interpretation


@dataclass(frozen=True)
class WorldClass:
    """All worlds sharing one partial choice on one space."""

    partial: PartialChoice
    world_indices: tuple[int, ...]


@dataclass(frozen=True)
class WorldSpace:
    """Every world of a theory plus, per space, its partition into classes."""

    theory: CCLTheory
    worlds: tuple[World, ...]
    classes_by_space: tuple[tuple[WorldClass, ...], ...]

    def class_index_of(self, space_index: int, world: World) -> int:
        return self._class_lookup[space_index][world.choice.parts[space_index].selected]

    @property
    def _class_lookup(self):
        lookup = getattr(self, "_lookup_cache", None)
        if lookup is None:
            lookup = tuple(
                {cls.partial.selected: j for j, cls in enumerate(classes)}
                for classes in self.classes_by_space
            )
            object.__setattr__(self, "_lookup_cache", lookup)
        return lookup


def _coherent(selected: Sequence[Atom], alternatives: Sequence, candidate: Atom, upto: int) -> bool:
    cand_alt = alternatives[upto]
    for k in range(upto):
        prev = selected[k]
        prev_alt = alternatives[k]
        if candidate in prev_alt.atom_set and prev != candidate:
            return False
        if prev in cand_alt.atom_set and prev != candidate:
            return False
    return True


def coherent_partial_choices(
    space: ChoiceSpace, space_index: int = 0, cap: int = DEFAULT_WORLD_CAP
) -> list[PartialChoice]:
    """All coherent selections of one space, in canonical order."""
    alts = space.alternatives
    out: list[PartialChoice] = []
    chosen: list[Atom] = []

    def walk(i: int) -> None:
        if i == len(alts):
            out.append(partial_choice(space_index, chosen))
            if len(out) > cap:
                raise CapExceededError(
                    f"more than {cap} coherent selections in choice space {space_index}"
                )
            return
        for a in alts[i].atoms:
            if _coherent(chosen, alts, a, i):
                chosen.append(a)
                walk(i + 1)
                chosen.pop()

    walk(0)
    return out


def enumerate_total_choices(t: CCLTheory, cap: int = DEFAULT_WORLD_CAP) -> list[TotalChoice]:
    """All total choices of a theory, in canonical order."""
    per_space = [coherent_partial_choices(sp, i, cap) for i, sp in enumerate(t.spaces)]
    total = reduce(lambda acc, lst: acc * len(lst), per_space, 1)
    if total > cap:
        raise CapExceededError(f"theory has {total} total choices, more than the cap of {cap}")

    combos: list[TotalChoice] = [TotalChoice(())]
    for lst in per_space:
        combos = [TotalChoice(tc.parts + (pc,)) for tc in combos for pc in lst]
    return combos


def build_world_space(t: CCLTheory, cap: int = DEFAULT_WORLD_CAP) -> WorldSpace:
    """Materialize every world and the per-space classes."""
    gp = t.ground_program
    choices = enumerate_total_choices(t, cap)
    worlds = tuple(
        World(i, tc, stable_model(gp, tc.image)) for i, tc in enumerate(choices)
    )

    classes: list[tuple[WorldClass, ...]] = []
    for si, sp in enumerate(t.spaces):
        groups: dict[tuple[Atom, ...], list[int]] = {}
        order: list[PartialChoice] = []
        for w in worlds:
            pc = w.choice.parts[si]
            if pc.selected not in groups:
                groups[pc.selected] = []
                order.append(pc)
            groups[pc.selected].append(w.index)
        classes.append(tuple(WorldClass(pc, tuple(groups[pc.selected])) for pc in order))
    return WorldSpace(t, worlds, tuple(classes))


def satisfies(world: World, q: Query) -> bool:
    """True when every literal of the query holds in the world's model."""
    return all(world.model.holds(lit) for lit in q.literals)


# ---------------------------------------------------------------------------
# Debug views.


def world_table(ws: WorldSpace) -> str:
    """A truth table over the worlds, atoms as rows, worlds as columns."""
    t = ws.theory
    derived = sorted(a for a in t.herbrand_base if a not in set(t.atomic_choices))
    rows = list(t.atomic_choices) + derived
    width = max((len(str(a)) for a in rows), default=1)
    headers = [f"w{w.index + 1}" for w in ws.worlds]
    colw = max([len(h) for h in headers] + [1])
    lines = [" " * width + "  " + " ".join(h.rjust(colw) for h in headers)]
    for a in rows:
        cells = ["t" if w.model.is_true(a) else "f" for w in ws.worlds]
        lines.append(str(a).ljust(width) + "  " + " ".join(c.rjust(colw) for c in cells))
    return "\n".join(lines)


def class_table(ws: WorldSpace) -> str:
    """Per space, each class's image and the worlds it contains."""
    lines: list[str] = []
    for si, classes in enumerate(ws.classes_by_space):
        lines.append(f"space {si + 1}:")
        for cls in classes:
            members = ", ".join(f"w{i + 1}" for i in cls.world_indices)
            lines.append(f"  {cls.partial} -> {members}")
    return "\n".join(lines)


def world_space_json(ws: WorldSpace) -> dict:
    """A JSON-friendly dump of worlds and classes."""
    return {
        "worlds": [
            {
                "index": w.index + 1,
                "image": [str(a) for a in sorted(w.choice.image)],
                "true_atoms": [str(a) for a in sorted(w.model.true_atoms)],
            }
            for w in ws.worlds
        ],
        "classes": [
            {
                "space": si + 1,
                "image": [str(a) for a in sorted(cls.partial.image)],
                "worlds": [i + 1 for i in cls.world_indices],
            }
            for si, classes in enumerate(ws.classes_by_space)
            for cls in classes
        ],
    }
