"""Core domain vocabulary: packets, alerts, predicate facts, attack types,
and the variable unification used by the correlator.

Facts are flat predicates over string terms. A term starting with ``?`` is a
variable; anything else is a literal in canonical string form (integers
decimal, IPv4 addresses normalized). A binding maps bare variable names
(without the ``?``) to literal strings.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import LoadError, MalformedGraphError

Binding = dict[str, str]

_FACT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\((.*)\)$")
_VAR_RE = re.compile(r"^\?[A-Za-z_][A-Za-z0-9_]*$")
_INT_RE = re.compile(r"^[+-]?\d+$")


def canon_literal(value: object) -> str:
    """Canonical string form of a literal: integers decimal, IPv4 normalized."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a valid term literal")
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if _INT_RE.match(text):
        return str(int(text))
    try:
        return str(ipaddress.IPv4Address(text))
    except ValueError:
        return text


def is_variable(term: str) -> bool:
    return term.startswith("?")


def var_name(term: str) -> str:
    """Bare name of a variable term (``?h`` -> ``h``)."""
    return term[1:]


@dataclass(frozen=True, order=True)
class Fact:
    """A flat predicate over terms, e.g. ``service_up(?h,21)``."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(self.args)})"

    @property
    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def variables(self) -> set[str]:
        return {var_name(a) for a in self.args if is_variable(a)}


def parse_fact(text: str) -> Fact:
    """Parse ``predicate(arg1,arg2,...)``; args are ``?name`` or literals."""
    m = _FACT_RE.match(text)
    if not m:
        raise LoadError(f"malformed fact {text!r}")
    predicate, body = m.group(1), m.group(2)
    if body == "":
        return Fact(predicate)
    args = []
    for raw in body.split(","):
        if raw == "" or raw != raw.strip() or " " in raw:
            raise LoadError(f"malformed term {raw!r} in fact {text!r}")
        if raw.startswith("?"):
            if not _VAR_RE.match(raw):
                raise LoadError(f"malformed variable {raw!r} in fact {text!r}")
            args.append(raw)
        else:
            args.append(canon_literal(raw))
    return Fact(predicate, tuple(args))


class Proto(str, Enum):
    TCP = "tcp"
    UDP = "udp"


class AlertSource(str, Enum):
    BASE = "base"
    HYPOTHESIS = "hypothesis"
    AIS = "ais"


@dataclass(frozen=True)
class Packet:
    """One network packet in a replayable stream."""

    id: int
    ts: float
    src: str
    dst: str
    sport: int
    dport: int
    proto: Proto
    payload: bytes = b""

    def __post_init__(self):
        if not 0 <= self.sport <= 65535 or not 0 <= self.dport <= 65535:
            raise ValueError(f"packet {self.id}: port out of range")
        if len(self.payload) > 65535:
            raise ValueError(f"packet {self.id}: payload exceeds 65535 bytes")


@dataclass(frozen=True)
class AttackType:
    """An attack-graph entry: prerequisites, consequences, capture filter.

    Variables appearing in ``post`` or ``filter`` but not in ``pre`` are free,
    i.e. bindable only from a triggering alert. ``filter`` maps packet fields
    (dst, dport, proto) to a variable, a literal, or the wildcard ``any``.
    """

    name: str
    pre: frozenset[Fact]
    post: frozenset[Fact]
    filter: Mapping[str, str] = field(default_factory=dict)
    ttl: float = 120.0

    def __post_init__(self):
        if self.ttl <= 0:
            raise LoadError(f"attack {self.name!r}: ttl must be > 0")
        for key in self.filter:
            if key not in ("dst", "dport", "proto"):
                raise LoadError(f"attack {self.name!r}: bad filter field {key!r}")

    @property
    def pre_vars(self) -> set[str]:
        return set().union(*(f.variables() for f in self.pre)) if self.pre else set()

    @property
    def post_vars(self) -> set[str]:
        return set().union(*(f.variables() for f in self.post)) if self.post else set()

    @property
    def all_vars(self) -> set[str]:
        out = self.pre_vars | self.post_vars
        for v in self.filter.values():
            if is_variable(v):
                out.add(var_name(v))
        return out


@dataclass
class Alert:
    """A detection event: base (signature hit) or ais (immune tag)."""

    id: int
    ts: float
    attack: str
    bindings: Binding
    source: AlertSource = AlertSource.BASE
    packet_ref: int | None = None


def unify_fact(pattern: Fact, ground: Fact, seed_binding: Binding | None = None) -> Binding | None:
    """Extend seed_binding so pattern instantiates to ground, or None.

    Raises MalformedGraphError when the predicates agree but arities differ,
    which is a graph defect rather than an ordinary non-match.
    """
    if pattern.predicate != ground.predicate:
        return None
    if len(pattern.args) != len(ground.args):
        raise MalformedGraphError(
            f"predicate {pattern.predicate!r} used at arity "
            f"{len(pattern.args)} and {len(ground.args)}")
    binding = dict(seed_binding) if seed_binding else {}
    for pat, got in zip(pattern.args, ground.args):
        if is_variable(pat):
            name = var_name(pat)
            if name in binding:
                if binding[name] != got:
                    return None
            else:
                binding[name] = got
        elif pat != got:
            return None
    return binding


def instantiate(facts: Iterable[Fact], binding: Binding) -> set[Fact]:
    """Apply a binding to facts; unbound variables are preserved."""
    out = set()
    for fact in facts:
        args = tuple(
            binding.get(var_name(a), a) if is_variable(a) else a
            for a in fact.args)
        out.add(Fact(fact.predicate, args))
    return out


def binding_sort_key(binding: Binding) -> tuple:
    return tuple(sorted(binding.items()))


def satisfy(pre: Iterable[Fact], pool: Iterable[Fact],
            seed_binding: Binding | None = None) -> list[Binding]:
    """All maximal consistent bindings under which every fact in pre unifies
    with some pool fact, ordered lexicographically by bound values."""
    goals = sorted(pre)
    candidates = sorted(pool)
    results: list[Binding] = []
    seen: set[tuple] = set()

    def search(i: int, binding: Binding) -> None:
        if i == len(goals):
            key = binding_sort_key(binding)
            if key not in seen:
                seen.add(key)
                results.append(dict(binding))
            return
        for ground in candidates:
            extended = unify_fact(goals[i], ground, binding)
            if extended is not None:
                search(i + 1, extended)

    search(0, dict(seed_binding) if seed_binding else {})
    results.sort(key=binding_sort_key)
    return results


def merge_bindings(a: Binding, b: Binding) -> Binding | None:
    """Union of two bindings, or None when they disagree on a variable."""
    merged = dict(a)
    for name, value in b.items():
        if merged.get(name, value) != value:
            return None
        merged[name] = value
    return merged


def bindings_consistent(a: Binding, b: Binding) -> bool:
    return all(a[k] == b[k] for k in a.keys() & b.keys())
