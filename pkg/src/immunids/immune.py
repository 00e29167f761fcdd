"""The immune layer: dendritic cells attached to predicted attacks collect
suspect packets, accumulate context-signal concentrations, and on maturation
present their antigens to a detector repertoire in a virtual lymph node.

Detectors are byte segments sampled from the signature base (a gene library)
with per-byte mutation; binding uses partial matching, a shared contiguous
byte run of at least ``match_threshold`` bytes. A reactive (mature)
presentation tags matching packets; a tolerogenic (semi-mature) presentation
deletes the detectors that bound and remembers the payloads as self.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .correlation import SignalEvent, Vertex, VertexKind
from .errors import ConfigError, ImmunidsError
from .matching import lcs_len
from .model import AttackType, Packet, canon_literal, is_variable, var_name
from .seeds import substream
from .signatures import Signature

_DETECTOR_MIN_LEN = 4
_BUILD_RETRIES = 1000

DEFAULT_WEIGHTS = {"pamp": 1.0, "danger": 0.6, "safe": 1.0}


@dataclass(frozen=True)
class ImmuneParams:
    """The tunable immune constants; see README for the defaults' rationale."""

    antigen_capacity: int = 64
    detector_len: int = 12
    repertoire_size: int = 256
    mutation_rate: float = 0.05
    match_threshold: int = 8
    maturation_threshold: float = 1.0
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    dc_max_age: float = 300.0
    self_cache_size: int = 1024

    def validate(self) -> None:
        p = self
        checks = [
            (p.antigen_capacity >= 1, "antigen_capacity must be >= 1"),
            (p.detector_len >= _DETECTOR_MIN_LEN,
             f"detector_len must be >= {_DETECTOR_MIN_LEN}"),
            (p.repertoire_size >= 1, "repertoire_size must be >= 1"),
            (0.0 <= p.mutation_rate <= 1.0, "mutation_rate must be in [0,1]"),
            (1 <= p.match_threshold <= p.detector_len,
             "match_threshold must be in 1..detector_len"),
            (p.maturation_threshold > 0, "maturation_threshold must be > 0"),
            (p.dc_max_age > 0, "dc_max_age must be > 0"),
            (p.self_cache_size >= 0, "self_cache_size must be >= 0"),
            (set(p.weights) == {"pamp", "danger", "safe"},
             "weights must define pamp, danger and safe"),
        ]
        checks.append((all(w >= 0 for w in p.weights.values()),
                       "signal weights must be >= 0"))
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)


def rcontig_match(detector: bytes, payload: bytes) -> int:
    """Longest contiguous byte run shared by detector and payload."""
    return lcs_len(detector, payload)


class MaturationContext(str, Enum):
    MATURE = "mature"
    SEMI_MATURE = "semi-mature"


@dataclass(frozen=True)
class TCellDetector:
    id: int
    bytes: bytes
    origin_sig: int
    origin_attack: str


@dataclass(frozen=True)
class AisAlert:
    """An immune tag on a captured packet."""

    ts: float
    packet_ref: int
    vertex: int
    attack: str
    detector: int
    origin_sig: int
    match_len: int


class DendriticCell:
    """Antigen collector bound to one prediction vertex."""

    def __init__(self, dc_id: int, vertex: Vertex, attack: AttackType):
        if vertex.kind != VertexKind.PREDICTION:
            raise ValueError(f"dendritic cell requires a prediction vertex, "
                             f"got {vertex.kind.value}")
        self.id = dc_id
        self.vertex = vertex.id
        self.attack = vertex.attack
        self.filter = _instantiate_filter(attack, vertex.bindings)
        self.antigens: list[tuple[int, bytes]] = []
        self.c_pamp = 0.0
        self.c_danger = 0.0
        self.c_safe = 0.0
        self.born_ts = vertex.created_ts
        self.migrated = False
        self._seen_matching = 0

    def matches(self, p: Packet) -> bool:
        for fld, want in self.filter.items():
            got = {"dst": p.dst, "dport": p.dport, "proto": p.proto.value}[fld]
            if canon_literal(got) != want:
                return False
        return True

    def capture(self, p: Packet, rng: random.Random, capacity: int) -> bool:
        """Store the packet if it matches the filter; reservoir-sample once
        the store is full so every matching packet seen has equal odds."""
        if self.migrated:
            raise ImmunidsError(f"dc {self.id}: capture after migration")
        if not p.payload or not self.matches(p):
            return False
        self._seen_matching += 1
        entry = (p.id, p.payload)
        if len(self.antigens) < capacity:
            self.antigens.append(entry)
        else:
            slot = rng.randrange(self._seen_matching)
            if slot < capacity:
                self.antigens[slot] = entry
        return True

    def receive(self, ev: SignalEvent, weights: dict) -> None:
        if self.migrated:
            raise ImmunidsError(f"dc {self.id}: signal after migration")
        if ev.vertex != self.vertex:
            raise ImmunidsError(f"dc {self.id}: signal for vertex {ev.vertex} "
                                f"routed to vertex {self.vertex}")
        key = ev.kind.value
        if key == "pamp":
            self.c_pamp += weights[key]
        elif key == "danger":
            self.c_danger += weights[key]
        else:
            self.c_safe += weights[key]

    def check_maturation(self, now: float, vertex_alive: bool,
                         params: ImmuneParams) -> MaturationContext | None:
        """None to stay resident; otherwise the differentiation pathway."""
        if self.migrated:
            raise ImmunidsError(f"dc {self.id}: already migrated")
        total = self.c_pamp + self.c_danger + self.c_safe
        due = (total >= params.maturation_threshold
               or now - self.born_ts >= params.dc_max_age
               or not vertex_alive)
        if not due:
            return None
        if self.c_pamp + self.c_danger > self.c_safe:
            return MaturationContext.MATURE
        return MaturationContext.SEMI_MATURE

    def migrate(self) -> None:
        self.migrated = True


def _instantiate_filter(attack: AttackType, bindings: dict) -> dict[str, str]:
    """Ground capture template; unbound variables and ``any`` are wildcards
    (the field is simply absent)."""
    out: dict[str, str] = {}
    for fld, value in attack.filter.items():
        if value == "any":
            continue
        if is_variable(value):
            name = var_name(value)
            if name in bindings:
                out[fld] = bindings[name]
            continue
        out[fld] = value
    return out


def spawn_dc(dc_id: int, vertex: Vertex, attack: AttackType) -> DendriticCell:
    """One dendritic cell per prediction vertex, never replaced."""
    return DendriticCell(dc_id, vertex, attack)


class LymphNode:
    """Holds the detector repertoire, the tolerated-self cache, and the
    seeded generator streams for detector building and reservoir capture."""

    def __init__(self, sigs: Sequence[Signature], params: ImmuneParams,
                 seed: int):
        self.params = params
        self.sigs = sorted(sigs, key=lambda s: s.id)
        self.rng = substream(seed, "repertoire")
        self.reservoir_rng = substream(seed, "reservoir")
        self.repertoire: dict[int, TCellDetector] = {}
        self.self_cache: deque[bytes] = deque(maxlen=params.self_cache_size)
        self._next_detector_id = 1
        if not any(len(tok) >= _DETECTOR_MIN_LEN
                   for s in self.sigs for tok in s.contents):
            raise ImmunidsError(
                f"no signature content token is >= {_DETECTOR_MIN_LEN} bytes; "
                f"cannot build detectors")
        self._fill()

    def _build_detector(self) -> TCellDetector:
        p = self.params
        for _ in range(_BUILD_RETRIES):
            sig = self.rng.choice(self.sigs)
            token = self.rng.choice(sig.contents)
            if len(token) < _DETECTOR_MIN_LEN:
                continue
            seg_len = min(p.detector_len, len(token))
            start = self.rng.randrange(len(token) - seg_len + 1)
            body = bytearray(token[start:start + seg_len])
            for i in range(len(body)):
                if self.rng.random() < p.mutation_rate:
                    body[i] = self.rng.randrange(256)
            candidate = bytes(body)
            if any(lcs_len(candidate, cached) >= p.match_threshold
                   for cached in self.self_cache):
                continue
            det = TCellDetector(self._next_detector_id, candidate,
                                sig.id, sig.attack)
            self._next_detector_id += 1
            return det
        raise ImmunidsError("detector retry budget exhausted; "
                            "self cache too restrictive")

    def _fill(self) -> None:
        while len(self.repertoire) < self.params.repertoire_size:
            det = self._build_detector()
            self.repertoire[det.id] = det

    def present(self, dc: DendriticCell, context: MaturationContext,
                now: float) -> list[AisAlert] | list[int]:
        """Reactive context: tag each antigen via its best-binding detector.
        Tolerogenic context: delete every detector that binds any antigen,
        remember the payloads as self, and refill the repertoire."""
        if not dc.migrated:
            raise ImmunidsError(f"dc {dc.id}: presentation before migration")
        r = self.params.match_threshold
        if context == MaturationContext.MATURE:
            alerts: list[AisAlert] = []
            for pkt_id, payload in dc.antigens:
                best: TCellDetector | None = None
                best_len = 0
                for det_id in sorted(self.repertoire):
                    det = self.repertoire[det_id]
                    run = lcs_len(det.bytes, payload)
                    if run >= r and run > best_len:
                        best, best_len = det, run
                if best is not None:
                    alerts.append(AisAlert(
                        ts=now, packet_ref=pkt_id, vertex=dc.vertex,
                        attack=dc.attack, detector=best.id,
                        origin_sig=best.origin_sig, match_len=best_len))
            return alerts

        doomed = sorted(
            det_id for det_id, det in self.repertoire.items()
            if any(lcs_len(det.bytes, payload) >= r
                   for _, payload in dc.antigens))
        for det_id in doomed:
            del self.repertoire[det_id]
        for _, payload in dc.antigens:
            self.self_cache.append(payload)
        self._fill()
        return doomed


def generate_repertoire(sigs: Iterable[Signature], params: ImmuneParams,
                        seed: int) -> LymphNode:
    """Fresh lymph node with a full repertoire, deterministic under seed."""
    params.validate()
    return LymphNode(list(sigs), params, seed)
