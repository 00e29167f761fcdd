"""Incremental alert correlation over an attack graph.

The graph holds three vertex kinds. An exploit vertex is a confirmed alert.
A prediction vertex is an attack whose prerequisites the current scenario
already satisfies; it carries a deadline and is where the immune layer
attaches a dendritic cell. A hypothesised vertex is an attack inserted
without an alert to explain an otherwise-unsupported later alert.

Vertex transitions emit context signals consumed by the immune layer:
prediction upgraded by a matching alert -> pamp; prediction converted into a
hypothesis -> danger; prediction expired -> safe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import LoadError, MalformedGraphError
from .model import (
    Alert,
    AttackType,
    Binding,
    Fact,
    bindings_consistent,
    binding_sort_key,
    canon_literal,
    instantiate,
    is_variable,
    merge_bindings,
    parse_fact,
    satisfy,
    unify_fact,
)


class VertexKind(str, Enum):
    EXPLOIT = "exploit"
    PREDICTION = "prediction"
    HYPOTHESISED = "hypothesised"


class SignalKind(str, Enum):
    PAMP = "pamp"
    DANGER = "danger"
    SAFE = "safe"


@dataclass(frozen=True)
class SignalEvent:
    kind: SignalKind
    vertex: int
    ts: float


@dataclass
class Vertex:
    id: int
    kind: VertexKind
    attack: str
    bindings: Binding
    created_ts: float
    resolved_ts: float | None = None
    alert_refs: list[int] = field(default_factory=list)
    deadline: float | None = None  # prediction only

    @property
    def resolved(self) -> bool:
        return self.kind in (VertexKind.EXPLOIT, VertexKind.HYPOTHESISED)


@dataclass
class Edge:
    """prepare-for: the source's consequences support the target's
    prerequisites; witness carries the ground facts involved."""

    from_id: int
    to_id: int
    witness: frozenset[Fact]


@dataclass
class CorrelateOutcome:
    vertex_id: int
    signals: list[SignalEvent]
    new_predictions: list[Vertex]
    new_hypotheses: list[Vertex]


def load_attack_graph(path: str | Path) -> dict[str, AttackType]:
    """Load graph.json into an attack-type map; enforces one arity per
    predicate across the whole file."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path}: {exc}") from None
    records = doc.get("attacks") if isinstance(doc, dict) else None
    if not isinstance(records, list):
        raise LoadError(f"{path}: expected an object with an 'attacks' array")

    attacks: dict[str, AttackType] = {}
    arity: dict[str, int] = {}
    for idx, rec in enumerate(records):
        where = f"{path}: attack record {idx}"
        try:
            name = rec["name"]
            pre = frozenset(parse_fact(f) for f in rec["pre"])
            post = frozenset(parse_fact(f) for f in rec["post"])
            raw_filter = dict(rec.get("filter", {}))
            ttl = float(rec.get("ttl", 120))
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"{where}: {exc}") from None
        if name in attacks:
            raise LoadError(f"{where}: duplicate attack name {name!r}")
        filt = {}
        for key, value in raw_filter.items():
            if isinstance(value, str) and (is_variable(value) or value == "any"):
                filt[key] = value
            else:
                filt[key] = canon_literal(value)
        for fact in pre | post:
            seen = arity.setdefault(fact.predicate, len(fact.args))
            if seen != len(fact.args):
                raise MalformedGraphError(
                    f"{where}: predicate {fact.predicate!r} used at arity "
                    f"{len(fact.args)} but earlier at {seen}")
        attacks[name] = AttackType(name=name, pre=pre, post=post,
                                   filter=filt, ttl=ttl)
    return attacks


class Correlator:
    """Single-writer correlation graph; all mutations happen in alert
    timestamp order on one logical event loop."""

    def __init__(self, attacks: Mapping[str, AttackType],
                 axiom_predicate: str = "reachable"):
        self.attacks = dict(attacks)
        self.axiom_predicate = axiom_predicate
        self.vertices: dict[int, Vertex] = {}
        self.edges: list[Edge] = []
        self.clock: float = -math.inf
        self.axiom_facts: set[Fact] = set()
        self.signal_counts = {k: 0 for k in SignalKind}
        self._next_vertex_id = 1
        self._edge_index: dict[tuple[int, int], Edge] = {}
        self._contrib: dict[int, frozenset[Fact]] = {}
        self._parent: dict[int, int] = {}  # union-find, keeps removed ids
        self._pool: dict[int, set[Fact]] = {}

    # union-find ----------------------------------------------------------

    def _find(self, vid: int) -> int:
        root = vid
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[vid] != root:
            self._parent[vid], vid = root, self._parent[vid]
        return root

    def _union(self, a: int, b: int) -> int:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return ra
        ra, rb = min(ra, rb), max(ra, rb)
        self._parent[rb] = ra
        self._pool[ra] = self._pool.get(ra, set()) | self._pool.pop(rb, set())
        return ra

    # state helpers --------------------------------------------------------

    def observe_host(self, host: str) -> None:
        """Register a packet destination; feeds the built-in axiom facts."""
        self.axiom_facts.add(Fact(self.axiom_predicate, (canon_literal(host),)))

    def fact_pool(self, member_vertex: int) -> set[Fact]:
        """Accumulated ground consequences of the member's scenario."""
        return set(self._pool.get(self._find(member_vertex), set()))

    def recomputed_pool(self, member_vertex: int) -> set[Fact]:
        """Pool rebuilt from scratch out of the scenario's resolved vertices;
        must equal the incrementally maintained one."""
        root = self._find(member_vertex)
        out: set[Fact] = set()
        for v in self.vertices.values():
            if v.resolved and self._find(v.id) == root:
                out |= self._contrib.get(v.id, frozenset())
        return out

    def scenarios(self) -> list[list[int]]:
        """Live vertex ids grouped by weakly-connected component, ordered and
        numbered by smallest member id."""
        groups: dict[int, list[int]] = {}
        for vid in self.vertices:
            groups.setdefault(self._find(vid), []).append(vid)
        return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])

    def scenario_number(self, vid: int) -> int:
        root = self._find(vid)
        for num, members in enumerate(self.scenarios(), start=1):
            if self._find(members[0]) == root:
                return num
        raise KeyError(f"vertex {vid} not in any live scenario")

    def is_dag(self) -> bool:
        order: dict[int, int] = {}
        indeg = {vid: 0 for vid in self.vertices}
        adj: dict[int, list[int]] = {vid: [] for vid in self.vertices}
        for e in self.edges:
            adj[e.from_id].append(e.to_id)
            indeg[e.to_id] += 1
        queue = sorted(v for v, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            vid = queue.pop()
            order[vid] = seen
            seen += 1
            for nxt in adj[vid]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    queue.append(nxt)
        return seen == len(self.vertices)

    # graph construction ---------------------------------------------------

    def _add_vertex(self, kind: VertexKind, attack: str, bindings: Binding,
                    created_ts: float, resolved_ts: float | None = None,
                    deadline: float | None = None) -> Vertex:
        v = Vertex(id=self._next_vertex_id, kind=kind, attack=attack,
                   bindings=dict(bindings), created_ts=created_ts,
                   resolved_ts=resolved_ts, deadline=deadline)
        self._next_vertex_id += 1
        self.vertices[v.id] = v
        self._parent[v.id] = v.id
        return v

    def _add_edge(self, from_id: int, to_id: int,
                  witness: frozenset[Fact]) -> None:
        existing = self._edge_index.get((from_id, to_id))
        if existing is not None:
            existing.witness = existing.witness | witness
        else:
            edge = Edge(from_id, to_id, witness)
            self.edges.append(edge)
            self._edge_index[(from_id, to_id)] = edge
        self._union(from_id, to_id)

    def _add_contribution(self, v: Vertex) -> None:
        ground = frozenset(
            f for f in instantiate(self.attacks[v.attack].post, v.bindings)
            if f.is_ground)
        self._contrib[v.id] = ground
        root = self._find(v.id)
        self._pool.setdefault(root, set()).update(ground)

    def _live_resolved(self) -> list[Vertex]:
        return [v for v in sorted(self.vertices.values(), key=lambda v: v.id)
                if v.resolved]

    def _scenario_members(self, root: int) -> list[Vertex]:
        return [v for v in sorted(self.vertices.values(), key=lambda v: v.id)
                if self._find(v.id) == root]

    def _emit(self, kind: SignalKind, vertex: int, ts: float) -> SignalEvent:
        self.signal_counts[kind] += 1
        return SignalEvent(kind, vertex, ts)

    # operations -----------------------------------------------------------

    def correlate(self, alert: Alert) -> CorrelateOutcome:
        """Fold one alert into the graph.

        Upgrades a matching live prediction (emitting pamp) or creates a new
        exploit vertex, wires prepare-for edges from earlier vertices, runs
        hypothesis recovery when the alert's prerequisites are unsupported,
        then extends predictions for the updated scenario.
        """
        attack = self.attacks.get(alert.attack)
        if attack is None:
            raise LoadError(f"alert {alert.id}: unknown attack {alert.attack!r}")
        if alert.ts < self.clock:
            raise ValueError(f"alert {alert.id}: timestamp {alert.ts} behind "
                             f"graph clock {self.clock}")
        signals: list[SignalEvent] = []

        matched = self._matching_prediction(alert.attack, alert.bindings,
                                            alert.ts)
        if matched is not None:
            merged = merge_bindings(matched.bindings, alert.bindings)
            assert merged is not None
            matched.kind = VertexKind.EXPLOIT
            matched.bindings = merged
            matched.alert_refs = [alert.id]
            matched.resolved_ts = alert.ts
            matched.deadline = None
            v = matched
            signals.append(self._emit(SignalKind.PAMP, v.id, alert.ts))
        else:
            v = self._add_vertex(VertexKind.EXPLOIT, alert.attack,
                                 alert.bindings, created_ts=alert.ts,
                                 resolved_ts=alert.ts)
            v.alert_refs = [alert.id]

        pre_ground = {f for f in instantiate(attack.pre, alert.bindings)
                      if f.is_ground}
        for u in self._live_resolved():
            if u.id == v.id:
                continue
            witness = self._contrib.get(u.id, frozenset()) & pre_ground
            if witness:
                self._add_edge(u.id, v.id, frozenset(witness))

        hypotheses: list[Vertex] = []
        pool_here = self.fact_pool(v.id) | self.axiom_facts
        missing = sorted(pre_ground - pool_here)
        if missing:
            hypotheses = self._hypothesize(alert, v, missing, signals)

        self._add_contribution(v)
        predictions = self.predict(v.id)
        self.clock = alert.ts
        return CorrelateOutcome(vertex_id=v.id, signals=signals,
                                new_predictions=predictions,
                                new_hypotheses=hypotheses)

    def _matching_prediction(self, attack: str, bindings: Binding,
                             ts: float) -> Vertex | None:
        candidates = [
            v for v in self.vertices.values()
            if v.kind == VertexKind.PREDICTION and v.attack == attack
            and v.deadline is not None and ts <= v.deadline
            and bindings_consistent(v.bindings, bindings)
        ]
        return min(candidates, key=lambda v: v.id) if candidates else None

    def predict(self, member_vertex: int) -> list[Vertex]:
        """Create prediction vertices for every attack whose prerequisites the
        scenario's pool now satisfies, skipping attacks already present with
        consistent bindings. Requires at least one prerequisite witnessed by a
        scenario vertex (axiom facts alone never drive a prediction)."""
        root = self._find(member_vertex)
        members = self._scenario_members(root)
        pool = self._pool.get(root, set()) | self.axiom_facts
        created: list[Vertex] = []
        for name in sorted(self.attacks):
            attack = self.attacks[name]
            for b in satisfy(attack.pre, pool):
                if any(m.attack == name and bindings_consistent(m.bindings, b)
                       for m in members):
                    continue
                pre_ground = {f for f in instantiate(attack.pre, b)
                              if f.is_ground}
                supporters = [
                    m for m in members if m.resolved
                    and self._contrib.get(m.id, frozenset()) & pre_ground]
                if not supporters:
                    continue
                v = self._add_vertex(VertexKind.PREDICTION, name, b,
                                     created_ts=self.clock,
                                     deadline=self.clock + attack.ttl)
                for s in supporters:
                    self._add_edge(s.id, v.id,
                                   frozenset(self._contrib[s.id] & pre_ground))
                members.append(v)
                created.append(v)
        return created

    def _hypothesize(self, alert: Alert, v_alert: Vertex,
                     missing: list[Fact],
                     signals: list[SignalEvent]) -> list[Vertex]:
        """Recover one missing step: insert (or convert a live prediction
        into) a hypothesised vertex whose consequences cover an unsatisfied
        prerequisite of the alert, provided some existing scenario satisfies
        the hypothesised attack's own prerequisites."""
        roots = sorted({self._find(v.id) for v in self.vertices.values()
                        if v.id != v_alert.id})
        candidates: dict[tuple[str, tuple], dict] = {}
        for name in sorted(self.attacks):
            attack = self.attacks[name]
            for fact in missing:
                for pf in sorted(attack.post):
                    seed = unify_fact(pf, fact, {})
                    if seed is None:
                        continue
                    for root in roots:
                        pool = self._pool.get(root, set()) | self.axiom_facts
                        for b in satisfy(attack.pre, pool, seed_binding=seed):
                            pre_ground = {f for f in instantiate(attack.pre, b)
                                          if f.is_ground}
                            supporters = [
                                m for m in self._scenario_members(root)
                                if m.resolved and m.id != v_alert.id
                                and self._contrib.get(m.id, frozenset())
                                & pre_ground]
                            if not supporters:
                                continue
                            key = (name, binding_sort_key(b))
                            entry = candidates.setdefault(
                                key, {"binding": b, "covered": set(),
                                      "supporters": {}})
                            entry["covered"].add(fact)
                            for s in supporters:
                                entry["supporters"][s.id] = frozenset(
                                    self._contrib[s.id] & pre_ground)
        out: list[Vertex] = []
        for (name, _), entry in sorted(candidates.items()):
            b = entry["binding"]
            matched = self._matching_prediction(name, b, alert.ts)
            if matched is not None:
                merged = merge_bindings(matched.bindings, b)
                assert merged is not None
                matched.kind = VertexKind.HYPOTHESISED
                matched.bindings = merged
                matched.resolved_ts = alert.ts
                matched.deadline = None
                v_h = matched
                signals.append(self._emit(SignalKind.DANGER, v_h.id, alert.ts))
            else:
                v_h = self._add_vertex(VertexKind.HYPOTHESISED, name, b,
                                       created_ts=alert.ts,
                                       resolved_ts=alert.ts)
            for sid in sorted(entry["supporters"]):
                self._add_edge(sid, v_h.id, entry["supporters"][sid])
            self._add_edge(v_h.id, v_alert.id, frozenset(entry["covered"]))
            self._add_contribution(v_h)
            out.append(v_h)
        return out

    def expire(self, now: float) -> list[SignalEvent]:
        """Drop prediction vertices whose deadline passed (strictly) and emit
        one safe signal per removal, ordered by vertex id."""
        if now < self.clock:
            raise ValueError(f"expire time {now} behind graph clock {self.clock}")
        doomed = sorted(
            v.id for v in self.vertices.values()
            if v.kind == VertexKind.PREDICTION
            and v.deadline is not None and v.deadline < now)
        signals = []
        for vid in doomed:
            del self.vertices[vid]
            dropped = [e for e in self.edges
                       if e.from_id == vid or e.to_id == vid]
            for e in dropped:
                self.edges.remove(e)
                del self._edge_index[(e.from_id, e.to_id)]
            signals.append(self._emit(SignalKind.SAFE, vid, now))
        self.clock = now
        return signals

    # export ----------------------------------------------------------------

    def export_records(self) -> list[dict]:
        """Graph dump for debugging and reporting: one object per vertex and
        edge in stable field order, plus a trailing summary."""
        records: list[dict] = []
        for v in sorted(self.vertices.values(), key=lambda v: v.id):
            records.append({
                "type": "vertex",
                "id": v.id,
                "kind": v.kind.value,
                "attack": v.attack,
                "bindings": {k: v.bindings[k] for k in sorted(v.bindings)},
                "created_ts": v.created_ts,
                "resolved_ts": v.resolved_ts,
                "deadline": v.deadline,
                "alert_refs": list(v.alert_refs),
                "scenario": self.scenario_number(v.id),
            })
        for e in self.edges:
            records.append({
                "type": "edge",
                "from": e.from_id,
                "to": e.to_id,
                "witness": sorted(str(f) for f in e.witness),
            })
        records.append({
            "type": "summary",
            "scenarios": len(self.scenarios()),
            "hypothesised": sum(
                1 for v in self.vertices.values()
                if v.kind == VertexKind.HYPOTHESISED),
            "pamp": self.signal_counts[SignalKind.PAMP],
            "danger": self.signal_counts[SignalKind.DANGER],
            "safe": self.signal_counts[SignalKind.SAFE],
        })
        return records
