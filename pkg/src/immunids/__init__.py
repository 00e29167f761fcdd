"""Immune-inspired network intrusion detection with correlation context.

A signature engine raises base alerts; an attack-graph correlator organises
them into scenarios, predicts follow-on attacks, and hypothesises missed
ones; dendritic cells bound to the predictions collect suspect packets and,
driven by the correlator's context signals, present them to a detector
repertoire that tags novel variants of known attacks.
"""

__version__ = "0.1.0"

from .correlation import Correlator, SignalEvent, SignalKind, Vertex, VertexKind
from .immune import (
    AisAlert,
    DendriticCell,
    ImmuneParams,
    LymphNode,
    MaturationContext,
    TCellDetector,
    generate_repertoire,
    rcontig_match,
    spawn_dc,
)
from .model import Alert, AttackType, Fact, Packet, Proto, instantiate, satisfy, unify_fact
from .signatures import Signature, load_signatures, match_packet, scan_stream
from .traffic import ScenarioProfile, TruthRecord, gen_stream, mutate_payload

__all__ = [
    "AisAlert", "Alert", "AttackType", "Correlator", "DendriticCell",
    "Fact", "ImmuneParams", "LymphNode", "MaturationContext", "Packet",
    "Proto", "ScenarioProfile", "Signature", "SignalEvent", "SignalKind",
    "TCellDetector", "TruthRecord", "Vertex", "VertexKind",
    "gen_stream", "generate_repertoire", "instantiate", "load_signatures",
    "match_packet", "mutate_payload", "rcontig_match", "satisfy",
    "scan_stream", "spawn_dc", "unify_fact",
]
