"""Deterministic labeled packet streams: benign background noise, exact
known attacks, and mutated variants the base engine must miss.

Benign payloads are drawn from a byte alphabet disjoint from every signature
content token, so the benign false-positive baseline is analytically clean.
Attack payloads embed the signature's tokens in order with random filler;
variant steps then substitute bytes inside the longest token, which breaks
exact matching while leaving a long contiguous run intact.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .errors import LoadError
from .model import AttackType, Packet, Proto
from .seeds import substream
from .signatures import Signature

DEFAULT_BENIGN_ALPHABET = bytes(range(0x80, 0xC0))


class Label(str, Enum):
    BENIGN = "benign"
    ATTACK = "attack"
    VARIANT = "variant"


@dataclass(frozen=True)
class TruthRecord:
    packet_id: int
    label: Label
    attack: str | None = None


@dataclass(frozen=True)
class Step:
    """One attack emission; src/dst/dport default from the profile and the
    attack's signature."""

    attack: str
    delay: float
    variant: bool = False
    m: int = 1
    src: str | None = None
    dst: str | None = None
    dport: int | None = None


@dataclass(frozen=True)
class ScenarioProfile:
    target: str
    steps: tuple[Step, ...]
    benign_rate: float = 5.0
    duration: float = 60.0
    attacker: str = "10.0.0.99"
    benign_mode: str = "disjoint"  # or "hard": full byte range, stress only
    benign_alphabet: bytes = DEFAULT_BENIGN_ALPHABET


def load_profile(path: str | Path) -> ScenarioProfile:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path}: {exc}") from None
    try:
        steps = tuple(
            Step(attack=s["attack"], delay=float(s["delay"]),
                 variant=bool(s.get("variant", False)),
                 m=int(s.get("m", 1)),
                 src=s.get("src"), dst=s.get("dst"),
                 dport=s.get("dport"))
            for s in doc["steps"])
        return ScenarioProfile(
            target=doc["target"], steps=steps,
            benign_rate=float(doc.get("benign_rate", 5)),
            duration=float(doc.get("duration", 60)),
            attacker=doc.get("attacker", "10.0.0.99"),
            benign_mode=doc.get("benign_mode", "disjoint"))
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"{path}: {exc}") from None


def mutate_payload(payload: bytes, m: int, seed: int | random.Random,
                   positions: Sequence[int] | None = None) -> bytes:
    """Substitute exactly m distinct positions with different bytes.

    Positions default to the whole payload; a caller may restrict them (the
    stream generator passes the byte range of a content token).
    """
    pool = list(positions) if positions is not None else list(range(len(payload)))
    if m > len(pool):
        raise ValueError(f"cannot mutate {m} positions out of {len(pool)}")
    rng = random.Random(seed) if isinstance(seed, int) else seed
    chosen = sorted(rng.sample(pool, m))
    body = bytearray(payload)
    for i in chosen:
        body[i] = (body[i] + 1 + rng.randrange(255)) % 256
    return bytes(body)


def _content_bytes(sigs: Sequence[Signature]) -> set[int]:
    return {b for s in sigs for tok in s.contents for b in tok}


def _pick_alphabet(profile: ScenarioProfile,
                   sigs: Sequence[Signature]) -> bytes:
    used = _content_bytes(sigs)
    if profile.benign_mode == "hard":
        return bytes(range(256))
    alphabet = bytes(b for b in profile.benign_alphabet if b not in used)
    if len(alphabet) != len(profile.benign_alphabet):
        alphabet = bytes(b for b in range(256) if b not in used)
    if not alphabet:
        raise LoadError("signature contents cover every byte value; "
                        "no disjoint benign alphabet exists")
    return alphabet


def _filler_alphabet(sigs: Sequence[Signature]) -> bytes:
    used = _content_bytes(sigs)
    preferred = bytes(b for b in DEFAULT_BENIGN_ALPHABET if b not in used)
    if preferred:
        return preferred
    rest = bytes(b for b in range(256) if b not in used)
    if not rest:
        raise LoadError("signature contents cover every byte value; "
                        "cannot build filler")
    return rest


@dataclass
class _Emission:
    ts: float
    rank: int  # benign before attack at equal ts
    seq: int
    fields: dict
    label: Label
    attack: str | None


def _benign_payload(rng: random.Random, alphabet: bytes) -> bytes:
    size = rng.randrange(20, 181)
    return bytes(rng.choice(alphabet) for _ in range(size))


def _attack_payload(sig: Signature, rng: random.Random,
                    filler: bytes) -> tuple[bytes, list[int]]:
    """Payload embedding the tokens in order; returns it plus the byte range
    of the longest token (the variant mutation site)."""
    chunks: list[bytes] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for token in sig.contents:
        pad = bytes(rng.choice(filler) for _ in range(rng.randrange(2, 13)))
        chunks.append(pad)
        pos += len(pad)
        spans.append((pos, pos + len(token)))
        chunks.append(token)
        pos += len(token)
    tail = bytes(rng.choice(filler) for _ in range(rng.randrange(2, 13)))
    chunks.append(tail)
    start, end = max(spans, key=lambda s: s[1] - s[0])
    return b"".join(chunks), list(range(start, end))


def gen_stream(attacks: Mapping[str, AttackType], sigs: Sequence[Signature],
               profile: ScenarioProfile,
               seed: int) -> tuple[list[Packet], list[TruthRecord]]:
    """Generate the labeled stream; byte-identical for identical inputs."""
    sig_for: dict[str, Signature] = {}
    for sig in sorted(sigs, key=lambda s: s.id):
        sig_for.setdefault(sig.attack, sig)
    for step in profile.steps:
        if step.attack not in attacks:
            raise LoadError(f"profile step: unknown attack {step.attack!r}")
        if step.attack not in sig_for:
            raise LoadError(f"profile step: attack {step.attack!r} has no signature")
        if step.variant:
            longest = max(len(t) for t in sig_for[step.attack].contents)
            if step.m < 1:
                raise LoadError(f"profile step: variant of {step.attack!r} "
                                f"needs m >= 1")
            if step.m > longest:
                raise LoadError(
                    f"profile step: m={step.m} exceeds the longest content "
                    f"token ({longest} bytes) of {step.attack!r}")

    rng = substream(seed, "traffic")
    alphabet = _pick_alphabet(profile, sigs)
    filler = _filler_alphabet(sigs)
    emissions: list[_Emission] = []

    benign_count = int(profile.benign_rate * profile.duration)
    for i in range(benign_count):
        ts = round((i + 1) / profile.benign_rate, 6)
        emissions.append(_Emission(
            ts=ts, rank=0, seq=i,
            fields=dict(
                src=f"10.9.{rng.randrange(1, 255)}.{rng.randrange(1, 255)}",
                dst=profile.target,
                sport=rng.randrange(1024, 65536),
                dport=rng.randrange(1, 65536),
                proto=rng.choice((Proto.TCP, Proto.UDP)),
                payload=_benign_payload(rng, alphabet)),
            label=Label.BENIGN, attack=None))

    t = 0.0
    for idx, step in enumerate(profile.steps):
        t = round(t + step.delay, 6)
        sig = sig_for[step.attack]
        payload, token_span = _attack_payload(sig, rng, filler)
        if step.variant:
            payload = mutate_payload(payload, step.m, rng, positions=token_span)
        dport = sig.dport if sig.dport is not None else (step.dport or 80)
        emissions.append(_Emission(
            ts=t, rank=1, seq=idx,
            fields=dict(
                src=step.src or profile.attacker,
                dst=step.dst or profile.target,
                sport=rng.randrange(1024, 65536),
                dport=dport,
                proto=sig.proto,
                payload=payload),
            label=Label.VARIANT if step.variant else Label.ATTACK,
            attack=step.attack))

    emissions.sort(key=lambda e: (e.ts, e.rank, e.seq))
    packets: list[Packet] = []
    truth: list[TruthRecord] = []
    for pid, em in enumerate(emissions, start=1):
        packets.append(Packet(id=pid, ts=em.ts, **em.fields))
        truth.append(TruthRecord(packet_id=pid, label=em.label,
                                 attack=em.attack))
    return packets, truth
