"""The base detector: exact content signatures matched against packets.

A signature fires when the packet's proto and dport agree and all content
tokens occur in the payload in order without overlap. Matching is exact
bytes only; mutated variants of an attack are deliberately missed here and
left for the immune layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import LoadError
from .model import Alert, AlertSource, AttackType, Packet, Proto, canon_literal

_BIND_FIELDS = ("src", "dst", "sport", "dport")


@dataclass(frozen=True)
class Signature:
    """One content rule tied to an attack type."""

    id: int
    attack: str
    proto: Proto
    dport: int | None  # None matches any port
    contents: tuple[bytes, ...]
    bind: Mapping[str, str]  # variable name -> packet field

    def __post_init__(self):
        if not self.contents:
            raise LoadError(f"signature {self.id}: empty content list")
        for token in self.contents:
            if not 1 <= len(token) <= 1024:
                raise LoadError(f"signature {self.id}: content token length "
                                f"{len(token)} outside 1..1024")
        for var, fld in self.bind.items():
            if fld not in _BIND_FIELDS:
                raise LoadError(f"signature {self.id}: bind {var!r} to "
                                f"unknown packet field {fld!r}")


def _decode_token(raw: str, where: str) -> bytes:
    if raw.startswith("ascii:"):
        return raw[len("ascii:"):].encode("ascii")
    if raw.startswith("hex:"):
        body = raw[len("hex:"):]
        if len(body) % 2 or body != body.lower():
            raise LoadError(f"{where}: hex token must be lowercase, even length")
        try:
            return bytes.fromhex(body)
        except ValueError as exc:
            raise LoadError(f"{where}: bad hex token ({exc})") from None
    raise LoadError(f"{where}: content token must be prefixed ascii: or hex:")


def load_signatures(path: str | Path,
                    attacks: Mapping[str, AttackType]) -> list[Signature]:
    """Load signatures.json, in file order. Rejects duplicate ids, unknown
    attack names, and binds that leave attack variables uncovered."""
    try:
        records = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path}: {exc}") from None
    if not isinstance(records, list):
        raise LoadError(f"{path}: expected a JSON array of signature records")

    sigs: list[Signature] = []
    seen_ids: set[int] = set()
    for idx, rec in enumerate(records):
        where = f"{path}: record {idx}"
        try:
            sig_id = int(rec["id"])
            attack_name = rec["attack"]
            proto = Proto(rec["proto"])
            dport_raw = rec["dport"]
            contents = tuple(_decode_token(tok, where) for tok in rec["content"])
            bind = dict(rec.get("bind", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"{where}: {exc}") from None
        if sig_id in seen_ids:
            raise LoadError(f"{where}: duplicate signature id {sig_id}")
        seen_ids.add(sig_id)
        if attack_name not in attacks:
            raise LoadError(f"{where}: unknown attack {attack_name!r}")
        dport = None if dport_raw == "any" else int(dport_raw)
        if dport is not None and not 0 <= dport <= 65535:
            raise LoadError(f"{where}: dport {dport} out of range")
        sig = Signature(sig_id, attack_name, proto, dport, contents, bind)
        attack = attacks[attack_name]
        missing = (attack.pre_vars | attack.post_vars) - set(bind)
        if missing:
            raise LoadError(f"{where}: bind leaves attack variables "
                            f"{sorted(missing)} uncovered")
        sigs.append(sig)
    return sigs


def _contents_in_order(contents: Sequence[bytes], payload: bytes) -> bool:
    # greedy leftmost placement; equivalent to existence of any in-order
    # non-overlapping placement
    pos = 0
    for token in contents:
        hit = payload.find(token, pos)
        if hit < 0:
            return False
        pos = hit + len(token)
    return True


def match_packet(sig: Signature, p: Packet) -> Alert | None:
    """Alert (id 0, caller assigns) when sig matches p, else None."""
    if p.proto != sig.proto:
        return None
    if sig.dport is not None and p.dport != sig.dport:
        return None
    if not _contents_in_order(sig.contents, p.payload):
        return None
    field_values = {"src": p.src, "dst": p.dst,
                    "sport": p.sport, "dport": p.dport}
    bindings = {var: canon_literal(field_values[fld])
                for var, fld in sig.bind.items()}
    return Alert(id=0, ts=p.ts, attack=sig.attack, bindings=bindings,
                 source=AlertSource.BASE, packet_ref=p.id)


def scan_stream(sigs: Iterable[Signature],
                packets: Iterable[Packet]) -> list[Alert]:
    """All alerts over a packet stream, ordered by (packet id, signature id),
    with sequential alert ids starting at 1."""
    ordered_sigs = sorted(sigs, key=lambda s: s.id)
    alerts: list[Alert] = []
    last_id = None
    for p in packets:
        if last_id is not None and p.id <= last_id:
            raise ValueError("packets must be ordered by id")
        last_id = p.id
        for sig in ordered_sigs:
            alert = match_packet(sig, p)
            if alert is not None:
                alert.id = len(alerts) + 1
                alerts.append(alert)
    return alerts
