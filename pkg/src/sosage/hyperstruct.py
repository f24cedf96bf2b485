"""Executable algebra of ordered structures.

A universe holds immutable structures arranged in a cumulative hierarchy:
order-1 primitives carry opaque payloads, higher orders aggregate lower ones
(overlap allowed, constituents may span several lower orders). Two relations
are tracked between structures: symmetric interaction edges and directed
dependency edges, each tagged with the observation level that recorded it.
Direct dependency edges must span exactly one order. Per-level observer
functions supply observable properties; a property of a composite is emergent
when it is observable at the composite's level but at the level below on none
of its constituents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .errors import (
    EmptyConstituents,
    NotComposite,
    OrderCapExceeded,
    OrderGapViolation,
    UnknownStructure,
)

StructureId = int

DEFAULT_MAX_ORDER = 8


@dataclass(frozen=True)
class Structure:
    """One node of the hierarchy. Immutable once created.

    order == 1 exactly when constituents is empty exactly when a payload is
    present; for composites order == 1 + max(constituent orders).
    """

    id: StructureId
    order: int
    constituents: frozenset[StructureId]
    payload: Any = None
    tag: str = ""


@dataclass(frozen=True)
class ObsRecord:
    """A named property observed on a structure at a given level."""

    property: str
    value: Any
    level: int


# Observer: pure function (structure, universe) -> iterable of ObsRecord,
# registered for one level and required to emit records at that level only.
Observer = Callable[[Structure, "Universe"], Iterable[ObsRecord]]


class ObserverRegistry:
    """Per-level lists of pure observer functions."""

    def __init__(self) -> None:
        self._by_level: dict[int, list[Observer]] = {}

    def register(self, level: int, observer: Observer) -> None:
        if level < 1:
            raise ValueError("observer level must be >= 1")
        self._by_level.setdefault(level, []).append(observer)

    def at_level(self, level: int) -> list[Observer]:
        return list(self._by_level.get(level, ()))


class InteractionGraph:
    """Interaction (symmetric) and dependency (directed) edges, level-tagged.

    Interaction pairs are stored normalized (low id first); reflexivity is a
    query-level guarantee, never storage. Every dependency edge implies the
    matching interaction edge.
    """

    def __init__(self) -> None:
        self._interacts: dict[tuple[StructureId, StructureId], set[int]] = {}
        self._depends: dict[tuple[StructureId, StructureId], set[int]] = {}
        self._dependees: dict[StructureId, set[StructureId]] = {}

    @staticmethod
    def _norm(a: StructureId, b: StructureId) -> tuple[StructureId, StructureId]:
        return (a, b) if a <= b else (b, a)

    def add_interaction(self, a: StructureId, b: StructureId, level: int) -> None:
        self._interacts.setdefault(self._norm(a, b), set()).add(level)

    def add_dependency(self, dependent: StructureId, dependee: StructureId, level: int) -> None:
        self._depends.setdefault((dependent, dependee), set()).add(level)
        self._dependees.setdefault(dependent, set()).add(dependee)
        self.add_interaction(dependent, dependee, level)

    def interacts(self, a: StructureId, b: StructureId) -> bool:
        if a == b:
            return True
        return self._norm(a, b) in self._interacts

    def direct_dependees(self, dependent: StructureId) -> frozenset[StructureId]:
        return frozenset(self._dependees.get(dependent, ()))

    def dependency_levels(self, dependent: StructureId, dependee: StructureId) -> frozenset[int]:
        return frozenset(self._depends.get((dependent, dependee), ()))

    def interaction_edges(self) -> list[tuple[StructureId, StructureId, int]]:
        return sorted(
            (a, b, lv) for (a, b), levels in self._interacts.items() for lv in levels
        )

    def dependency_edges(self) -> list[tuple[StructureId, StructureId, int]]:
        return sorted(
            (d, e, lv) for (d, e), levels in self._depends.items() for lv in levels
        )


@dataclass
class Universe:
    """Id-indexed structure store plus its interaction graph and observers.

    Mutation is single-writer; queries are pure. Structure ids are assigned
    sequentially and never reused, even after a structure leaves every active
    roster.
    """

    max_order: int = DEFAULT_MAX_ORDER
    structures: dict[StructureId, Structure] = field(default_factory=dict)
    graph: InteractionGraph = field(default_factory=InteractionGraph)
    observers: ObserverRegistry = field(default_factory=ObserverRegistry)
    _next_id: StructureId = 0

    # --- store primitives ---

    def __contains__(self, structure_id: StructureId) -> bool:
        return structure_id in self.structures

    def get(self, structure_id: StructureId) -> Structure:
        try:
            return self.structures[structure_id]
        except KeyError:
            raise UnknownStructure(structure_id) from None

    def _fresh_id(self) -> StructureId:
        i = self._next_id
        self._next_id += 1
        return i

    def peek_next_id(self) -> StructureId:
        """The id the next created structure will receive."""
        return self._next_id

    # --- construction ---

    def add_primitive(self, payload: Any, tag: str = "") -> StructureId:
        """Create an order-1 structure carrying `payload`."""
        i = self._fresh_id()
        self.structures[i] = Structure(id=i, order=1, constituents=frozenset(), payload=payload, tag=tag)
        return i

    def construct(self, constituents: Iterable[StructureId], tag: str = "") -> StructureId:
        """Aggregate existing structures into a new one-order-higher composite.

        The new order is 1 + max(constituent orders); constituents may span
        multiple lower orders and may already belong to other composites.
        Interaction edges to each constituent are recorded at the new level.
        """
        members = frozenset(constituents)
        if not members:
            raise EmptyConstituents("construct() requires at least one constituent")
        orders = [self.get(c).order for c in sorted(members)]
        order = 1 + max(orders)
        if order > self.max_order:
            raise OrderCapExceeded(
                f"constructing order {order} exceeds max_order {self.max_order}"
            )
        i = self._fresh_id()
        self.structures[i] = Structure(id=i, order=order, constituents=members, tag=tag)
        for c in sorted(members):
            self.graph.add_interaction(i, c, order)
        return i

    # --- queries ---

    def structural_order(self, structure_id: StructureId) -> int:
        return self.get(structure_id).order

    def depends_on(self, a: StructureId, b: StructureId) -> bool:
        """True iff b is reachable from a over one or more direct dependency edges."""
        self.get(a)
        self.get(b)
        seen = set()
        frontier = [a]
        while frontier:
            cur = frontier.pop()
            for dep in self.graph.direct_dependees(cur):
                if dep == b:
                    return True
                if dep not in seen:
                    seen.add(dep)
                    frontier.append(dep)
        return False

    # --- relations ---

    def declare_interaction(self, a: StructureId, b: StructureId, level: int) -> None:
        self.get(a)
        self.get(b)
        if level < 1:
            raise ValueError("interaction level must be >= 1")
        self.graph.add_interaction(a, b, level)

    def declare_dependency(self, dependent: StructureId, dependee: StructureId, level: int) -> None:
        """Record a direct dependency edge; the order gap must be exactly 1.

        The implied interaction edge is added when absent.
        """
        gap = self.get(dependent).order - self.get(dependee).order
        if level < 1:
            raise ValueError("dependency level must be >= 1")
        if gap != 1:
            raise OrderGapViolation(dependent, dependee, gap)
        self.graph.add_dependency(dependent, dependee, level)

    # --- observation & emergence ---

    def observe(self, structure_id: StructureId, level: int) -> frozenset[ObsRecord]:
        """Union of all level-`level` observer outputs on the structure."""
        s = self.get(structure_id)
        if level < 1:
            raise ValueError("observation level must be >= 1")
        records: set[ObsRecord] = set()
        for obs in self.observers.at_level(level):
            for rec in obs(s, self):
                if rec.level != level:
                    raise ValueError(
                        f"observer at level {level} produced a record at level {rec.level}"
                    )
                records.add(rec)
        return frozenset(records)

    def is_emergent(self, property_name: str, structure_id: StructureId) -> bool:
        """True iff the property shows at the composite's level and at the level
        below on none of its constituents."""
        s = self.get(structure_id)
        if s.order < 2:
            raise NotComposite(f"structure {structure_id} has order 1; emergence needs order >= 2")
        here = {r.property for r in self.observe(structure_id, s.order)}
        if property_name not in here:
            return False
        below = s.order - 1
        for c in sorted(s.constituents):
            if property_name in {r.property for r in self.observe(c, below)}:
                return False
        return True

    # --- integrity ---

    def check_acyclic(self) -> bool:
        """Verify the constituent relation holds no cycle (it cannot, by
        construction; kept as an explicit check for the verification suite)."""
        color: dict[StructureId, int] = {}

        def visit(i: StructureId) -> bool:
            color[i] = 1
            for c in self.structures[i].constituents:
                st = color.get(c, 0)
                if st == 1 or (st == 0 and not visit(c)):
                    return False
            color[i] = 2
            return True

        return all(visit(i) for i in self.structures if color.get(i, 0) == 0)

    # --- serialization ---

    def to_json_dict(self, payload_encoder: Callable[[Any], Any] | None = None) -> dict:
        enc = payload_encoder or (lambda p: p)
        structures = []
        for i in sorted(self.structures):
            s = self.structures[i]
            row: dict[str, Any] = {
                "id": s.id,
                "order": s.order,
                "constituents": sorted(s.constituents),
                "tag": s.tag,
            }
            if s.order == 1:
                row["payload"] = enc(s.payload)
            structures.append(row)
        return {
            "structures": structures,
            "interacts": [list(e) for e in self.graph.interaction_edges()],
            "depends": [list(e) for e in self.graph.dependency_edges()],
        }

    @classmethod
    def from_json_dict(
        cls,
        doc: Mapping[str, Any],
        max_order: int = DEFAULT_MAX_ORDER,
        payload_decoder: Callable[[Any], Any] | None = None,
    ) -> "Universe":
        dec = payload_decoder or (lambda p: p)
        u = cls(max_order=max_order)
        for row in doc["structures"]:
            s = Structure(
                id=int(row["id"]),
                order=int(row["order"]),
                constituents=frozenset(int(c) for c in row["constituents"]),
                payload=dec(row["payload"]) if "payload" in row else None,
                tag=row.get("tag", ""),
            )
            u.structures[s.id] = s
        u._next_id = 1 + max(u.structures, default=-1)
        for a, b, level in doc.get("interacts", ()):
            u.graph.add_interaction(int(a), int(b), int(level))
        for d, e, level in doc.get("depends", ()):
            u.graph.add_dependency(int(d), int(e), int(level))
        return u
