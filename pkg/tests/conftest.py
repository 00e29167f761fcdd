from __future__ import annotations

import itertools

import pytest

from immunids.correlation import load_attack_graph
from immunids.fixtures import (
    g1_graph_path,
    g1_profile_path,
    g1_signatures_path,
)
from immunids.model import Alert, AlertSource, Packet, Proto
from immunids.signatures import load_signatures

_ids = itertools.count(1)


@pytest.fixture(scope="session")
def g1_attacks():
    return load_attack_graph(g1_graph_path())


@pytest.fixture(scope="session")
def g1_sigs(g1_attacks):
    return load_signatures(g1_signatures_path(), g1_attacks)


@pytest.fixture(scope="session")
def g1_profile_file():
    return g1_profile_path()


def make_alert(attack: str, ts: float, **bindings) -> Alert:
    return Alert(id=next(_ids), ts=ts, attack=attack,
                 bindings={k: str(v) for k, v in bindings.items()},
                 source=AlertSource.BASE, packet_ref=None)


def make_packet(pid: int, ts: float = 0.0, src: str = "10.0.0.99",
                dst: str = "10.0.0.5", sport: int = 40000, dport: int = 21,
                proto: Proto = Proto.TCP, payload: bytes = b"") -> Packet:
    return Packet(id=pid, ts=ts, src=src, dst=dst, sport=sport,
                  dport=dport, proto=proto, payload=payload)
