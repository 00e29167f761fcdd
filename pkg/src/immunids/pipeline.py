"""End-to-end pipeline: ingest -> base detection -> correlation -> immune
layer -> unified alert log, plus evaluation metrics against ground truth.

Event order within one packet timestamp is fixed: base alerts, correlation,
signal routing, antigen capture, prediction expiry, maturation. Capturing
before migration guarantees the packet that triggered a pamp can itself be
presented.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .correlation import Correlator, load_attack_graph
from .errors import ConfigError, LoadError
from .formats import (
    read_alerts,
    read_graph_export,
    read_packets,
    read_truth,
    write_alerts,
    write_graph_export,
)
from .immune import (
    AisAlert,
    DendriticCell,
    ImmuneParams,
    MaturationContext,
    generate_repertoire,
    spawn_dc,
)
from .signatures import load_signatures, match_packet
from .traffic import Label

_KIND_RANK = {"base": 0, "ais": 1}

_CONFIG_KEYS = {
    "antigen_capacity", "detector_len", "repertoire_size", "mutation_rate",
    "match_threshold", "maturation_threshold", "weights", "dc_max_age",
    "self_cache_size",
}


def load_config(path: str | Path | None) -> ImmuneParams:
    """Immune parameters from a JSON config file; unknown keys rejected."""
    if path is None:
        params = ImmuneParams()
        params.validate()
        return params
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise LoadError(f"{path}: config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise LoadError(f"{path}: unknown config keys {sorted(unknown)}")
    params = ImmuneParams(**doc)
    params.validate()
    return params


@dataclass
class RunResult:
    alerts: list[dict]
    graph_records: list[dict]
    alert_path: Path
    graph_path: Path


def graph_export_path(alert_path: str | Path) -> Path:
    return Path(str(alert_path) + ".graph.jsonl")


class Pipeline:
    """One logical event loop owning the correlator, the dendritic cell
    population, and the lymph node."""

    def __init__(self, attacks, sigs, params: ImmuneParams, seed: int):
        params.validate()
        self.attacks = attacks
        self.sigs = sorted(sigs, key=lambda s: s.id)
        self.params = params
        self.correlator = Correlator(attacks)
        self.node = generate_repertoire(sigs, params, seed)
        self.dcs: dict[int, DendriticCell] = {}  # vertex id -> DC
        self.alerts: list[dict] = []
        self._next_alert_id = 1
        self._next_dc_id = 1
        self._last_ts = 0.0

    def _route(self, signals) -> None:
        for ev in signals:
            dc = self.dcs.get(ev.vertex)
            if dc is not None and not dc.migrated:
                dc.receive(ev, self.params.weights)

    def _spawn(self, vertices) -> None:
        for v in vertices:
            dc = spawn_dc(self._next_dc_id, v, self.attacks[v.attack])
            self._next_dc_id += 1
            self.dcs[v.id] = dc

    def _immature(self) -> list[DendriticCell]:
        return sorted((dc for dc in self.dcs.values() if not dc.migrated),
                      key=lambda dc: dc.id)

    def _scenario_of(self, vertex: int) -> int:
        try:
            return self.correlator.scenario_number(vertex)
        except KeyError:
            return 0

    def _log_base(self, alert, sig_id: int, vertex: int) -> None:
        self.alerts.append({
            "id": alert.id, "ts": alert.ts, "kind": "base",
            "attack": alert.attack, "sig_id": sig_id,
            "packet_ref": alert.packet_ref,
            "scenario": vertex, "vertex": vertex})  # scenario fixed at flush

    def _log_ais(self, tag: AisAlert) -> None:
        self.alerts.append({
            "id": self._next_alert_id, "ts": tag.ts, "kind": "ais",
            "attack": tag.attack, "packet_ref": tag.packet_ref,
            "scenario": tag.vertex, "vertex": tag.vertex,
            "detector": tag.detector, "origin_sig": tag.origin_sig,
            "match_len": tag.match_len})
        self._next_alert_id += 1

    def _mature_sweep(self, now: float, present_ts: float) -> None:
        for dc in self._immature():
            alive = dc.vertex in self.correlator.vertices
            context = dc.check_maturation(now, alive, self.params)
            if context is None:
                continue
            dc.migrate()
            result = self.node.present(dc, context, present_ts)
            if context == MaturationContext.MATURE:
                for tag in result:
                    self._log_ais(tag)

    def feed(self, packet) -> None:
        self._last_ts = packet.ts
        self.correlator.observe_host(packet.dst)
        hits = []
        for sig in self.sigs:
            alert = match_packet(sig, packet)
            if alert is not None:
                alert.id = self._next_alert_id
                self._next_alert_id += 1
                hits.append((sig, alert))
        for sig, alert in hits:
            outcome = self.correlator.correlate(alert)
            self._spawn(outcome.new_predictions)
            self._route(outcome.signals)
            self._log_base(alert, sig.id, outcome.vertex_id)
        for dc in self._immature():
            dc.capture(packet, self.node.reservoir_rng,
                       self.params.antigen_capacity)
        self._route(self.correlator.expire(packet.ts))
        self._mature_sweep(packet.ts, packet.ts)

    def flush(self) -> None:
        """End of stream: expire every prediction and migrate every cell."""
        self._route(self.correlator.expire(math.inf))
        self._mature_sweep(math.inf, self._last_ts)
        for rec in self.alerts:
            rec["scenario"] = self._scenario_of(rec["vertex"])
        self.alerts.sort(key=lambda r: (r["ts"], _KIND_RANK[r["kind"]], r["id"]))


def run(graph_path, signatures_path, packets_path, out_path,
        params: ImmuneParams | None = None, seed: int = 0) -> RunResult:
    """Process a packet file and write the unified alert log plus the graph
    export (<out>.graph.jsonl)."""
    params = params or ImmuneParams()
    attacks = load_attack_graph(graph_path)
    sigs = load_signatures(signatures_path, attacks)
    packets = read_packets(packets_path)
    pipe = Pipeline(attacks, sigs, params, seed)
    for packet in packets:
        pipe.feed(packet)
    pipe.flush()
    graph_records = pipe.correlator.export_records()
    out_path = Path(out_path)
    gpath = graph_export_path(out_path)
    write_alerts(out_path, pipe.alerts)
    write_graph_export(gpath, graph_records)
    return RunResult(alerts=pipe.alerts, graph_records=graph_records,
                     alert_path=out_path, graph_path=gpath)


@dataclass(frozen=True)
class MetricsReport:
    base_detection_rate: float
    variant_recall: float
    benign_fp_rate: float
    scenario_count: int
    hypothesis_count: int
    prediction_confirm_count: int
    prediction_expire_count: int

    def as_dict(self) -> dict:
        return {
            "base_detection_rate": self.base_detection_rate,
            "variant_recall": self.variant_recall,
            "benign_fp_rate": self.benign_fp_rate,
            "scenario_count": self.scenario_count,
            "hypothesis_count": self.hypothesis_count,
            "prediction_confirm_count": self.prediction_confirm_count,
            "prediction_expire_count": self.prediction_expire_count,
        }


def _rate(hits: int, total: int) -> float:
    return hits / total if total else 0.0


def report(alerts_path, truth_path, graph_path=None) -> MetricsReport:
    """Evaluate an alert log against ground truth. The graph export supplies
    the correlation counters; without it they fall back to what the log
    alone can show."""
    alerts = read_alerts(alerts_path)
    truth = read_truth(truth_path)
    labels = {t.packet_id: t.label for t in truth}
    for rec in alerts:
        if rec["packet_ref"] not in labels:
            raise LoadError(f"{alerts_path}: alert {rec['id']} references "
                            f"unknown packet {rec['packet_ref']}")
    base_hit = {r["packet_ref"] for r in alerts if r["kind"] == "base"}
    ais_hit = {r["packet_ref"] for r in alerts if r["kind"] == "ais"}
    attack_pkts = [p for p, lab in labels.items() if lab == Label.ATTACK]
    variant_pkts = [p for p, lab in labels.items() if lab == Label.VARIANT]
    benign_pkts = [p for p, lab in labels.items() if lab == Label.BENIGN]

    scenario_count = len({r["scenario"] for r in alerts if r["scenario"]})
    hypothesis_count = confirm = expired = 0
    if graph_path is None:
        candidate = graph_export_path(alerts_path)
        graph_path = candidate if candidate.exists() else None
    if graph_path is not None:
        for rec in read_graph_export(graph_path):
            if rec.get("type") == "summary":
                scenario_count = rec["scenarios"]
                hypothesis_count = rec["hypothesised"]
                confirm = rec["pamp"]
                expired = rec["safe"]

    return MetricsReport(
        base_detection_rate=_rate(
            len([p for p in attack_pkts if p in base_hit]), len(attack_pkts)),
        variant_recall=_rate(
            len([p for p in variant_pkts if p in ais_hit]), len(variant_pkts)),
        benign_fp_rate=_rate(
            len([p for p in benign_pkts if p in ais_hit]), len(benign_pkts)),
        scenario_count=scenario_count,
        hypothesis_count=hypothesis_count,
        prediction_confirm_count=confirm,
        prediction_expire_count=expired,
    )
