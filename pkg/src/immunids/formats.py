"""JSONL file formats: packets, ground truth, unified alerts, graph export.

Every writer emits objects with a fixed field order so identical runs give
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .errors import LoadError
from .model import Packet, Proto
from .traffic import Label, TruthRecord


def _write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(", ", ": ")) + "\n")


def _read_jsonl(path: str | Path) -> list[dict]:
    out = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise LoadError(f"{path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}: line {lineno}: {exc}") from None
    return out


def write_packets(path: str | Path, packets: Sequence[Packet]) -> None:
    _write_jsonl(path, (
        {"id": p.id, "ts": p.ts, "src": p.src, "dst": p.dst,
         "sport": p.sport, "dport": p.dport, "proto": p.proto.value,
         "payload": p.payload.hex()}
        for p in packets))


def read_packets(path: str | Path) -> list[Packet]:
    packets: list[Packet] = []
    last_id, last_ts = None, None
    for lineno, rec in enumerate(_read_jsonl(path), start=1):
        where = f"{path}: line {lineno}"
        try:
            p = Packet(id=int(rec["id"]), ts=float(rec["ts"]),
                       src=rec["src"], dst=rec["dst"],
                       sport=int(rec["sport"]), dport=int(rec["dport"]),
                       proto=Proto(rec["proto"]),
                       payload=bytes.fromhex(rec["payload"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"{where}: {exc}") from None
        if last_id is not None and p.id <= last_id:
            raise LoadError(f"{where}: packet ids must increase")
        if last_ts is not None and p.ts < last_ts:
            raise LoadError(f"{where}: timestamps must be non-decreasing")
        last_id, last_ts = p.id, p.ts
        packets.append(p)
    return packets


def write_truth(path: str | Path, records: Sequence[TruthRecord]) -> None:
    _write_jsonl(path, (
        {"packet_id": t.packet_id, "label": t.label.value, "attack": t.attack}
        for t in records))


def read_truth(path: str | Path) -> list[TruthRecord]:
    out = []
    for lineno, rec in enumerate(_read_jsonl(path), start=1):
        try:
            out.append(TruthRecord(packet_id=int(rec["packet_id"]),
                                   label=Label(rec["label"]),
                                   attack=rec.get("attack")))
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"{path}: line {lineno}: {exc}") from None
    return out


def write_alerts(path: str | Path, records: Sequence[dict]) -> None:
    _write_jsonl(path, records)


def read_alerts(path: str | Path) -> list[dict]:
    return _read_jsonl(path)


def write_graph_export(path: str | Path, records: Sequence[dict]) -> None:
    _write_jsonl(path, records)


def read_graph_export(path: str | Path) -> list[dict]:
    return _read_jsonl(path)
