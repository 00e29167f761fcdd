"""Signature loading and content matching, with a brute-force placement
oracle for the ordered non-overlapping token rule."""

from __future__ import annotations

import json
import random

import pytest

from immunids.errors import LoadError
from immunids.model import Proto
from immunids.signatures import (
    Signature,
    load_signatures,
    match_packet,
    scan_stream,
)

from conftest import make_packet


def sig(sig_id=1, attack="ftp_overflow", proto=Proto.TCP, dport=21,
        contents=(b"SITE EXEC",), bind=None):
    return Signature(sig_id, attack, proto, dport, tuple(contents),
                     bind or {"h": "dst"})


# existence oracle: any in-order non-overlapping placement of all tokens
def placement_exists(contents, payload, start=0):
    if not contents:
        return True
    token, rest = contents[0], contents[1:]
    pos = payload.find(token, start)
    while pos >= 0:
        if placement_exists(rest, payload, pos + len(token)):
            return True
        pos = payload.find(token, pos + 1)
    return False


class TestMatchPacket:
    def test_content_hit(self):
        p = make_packet(1, payload=b"xxSITE EXECyy")
        alert = match_packet(sig(), p)
        assert alert is not None
        assert alert.attack == "ftp_overflow"
        assert alert.packet_ref == 1
        assert alert.bindings == {"h": "10.0.0.5"}

    def test_order_enforced(self):
        s = sig(contents=(b"USER", b"PASS"))
        assert match_packet(s, make_packet(1, payload=b"PASS then USER")) is None
        assert match_packet(s, make_packet(1, payload=b"USER then PASS")) is not None

    def test_dport_mismatch(self):
        p = make_packet(1, dport=2121, payload=b"SITE EXEC")
        assert match_packet(sig(), p) is None

    def test_wildcard_dport(self):
        s = sig(dport=None)
        assert match_packet(s, make_packet(1, dport=2121,
                                           payload=b"SITE EXEC")) is not None

    def test_proto_mismatch(self):
        p = make_packet(1, proto=Proto.UDP, payload=b"SITE EXEC")
        assert match_packet(sig(), p) is None

    def test_tokens_must_not_overlap(self):
        s = sig(contents=(b"abab", b"abab"))
        assert match_packet(s, make_packet(1, payload=b"ababab")) is None
        assert match_packet(s, make_packet(1, payload=b"abababab")) is not None

    def test_agrees_with_placement_oracle_on_random_payloads(self):
        rng = random.Random(11)
        tokens = [b"ab", b"ba", b"aab", b"bb"]
        for _ in range(500):
            contents = tuple(rng.choice(tokens)
                             for _ in range(rng.randrange(1, 4)))
            payload = bytes(rng.choice(b"ab")
                            for _ in range(rng.randrange(0, 257)))
            s = sig(contents=contents)
            got = match_packet(s, make_packet(1, payload=payload))
            assert (got is not None) == placement_exists(list(contents), payload)


class TestScanStream:
    def test_two_signatures_one_packet_ordering(self):
        sigs = [sig(sig_id=7, contents=(b"EXEC",)),
                sig(sig_id=3, contents=(b"SITE",))]
        alerts = scan_stream(sigs, [make_packet(1, payload=b"SITE EXEC")])
        assert [a.id for a in alerts] == [1, 2]
        assert [a.attack for a in alerts] == ["ftp_overflow", "ftp_overflow"]
        # ordered by signature id
        assert alerts[0].packet_ref == 1

    def test_empty_stream(self):
        assert scan_stream([sig()], []) == []

    def test_benign_disjoint_alphabet_never_matches(self):
        rng = random.Random(5)
        sigs = [sig(contents=(b"SITE EXEC", b"OVERFLOW"))]
        packets = [
            make_packet(i + 1, ts=float(i),
                        payload=bytes(rng.randrange(0x80, 0xC0)
                                      for _ in range(rng.randrange(1, 200))))
            for i in range(100)
        ]
        assert scan_stream(sigs, packets) == []

    def test_pure_function_of_inputs(self):
        sigs = [sig()]
        packets = [make_packet(1, payload=b"xxSITE EXEC"),
                   make_packet(2, ts=1.0, payload=b"nothing")]
        first = scan_stream(sigs, packets)
        second = scan_stream(sigs, packets)
        assert first == second

    def test_rejects_unordered_ids(self):
        with pytest.raises(ValueError):
            scan_stream([sig()], [make_packet(2), make_packet(1, ts=1.0)])


class TestLoadSignatures(object):
    def write(self, tmp_path, records):
        path = tmp_path / "sigs.json"
        path.write_text(json.dumps(records))
        return path

    def test_file_order_preserved(self, tmp_path, g1_attacks):
        records = [
            {"id": 2, "attack": "recon_scan", "proto": "tcp", "dport": 21,
             "content": ["ascii:AAAA"], "bind": {"h": "dst"}},
            {"id": 1, "attack": "ftp_overflow", "proto": "tcp", "dport": 21,
             "content": ["hex:90909090"], "bind": {"h": "dst"}},
            {"id": 3, "attack": "install_agent", "proto": "tcp", "dport": 4444,
             "content": ["ascii:BBBB"], "bind": {"h": "dst"}},
        ]
        sigs = load_signatures(self.write(tmp_path, records), g1_attacks)
        assert [s.id for s in sigs] == [2, 1, 3]
        assert sigs[1].contents == (b"\x90\x90\x90\x90",)

    def test_unknown_attack_named_in_error(self, tmp_path, g1_attacks):
        records = [{"id": 1, "attack": "no_such", "proto": "tcp",
                    "dport": 21, "content": ["ascii:AAAA"], "bind": {}}]
        with pytest.raises(LoadError, match="no_such"):
            load_signatures(self.write(tmp_path, records), g1_attacks)

    def test_duplicate_id_rejected(self, tmp_path, g1_attacks):
        rec = {"id": 1001, "attack": "recon_scan", "proto": "tcp",
               "dport": 21, "content": ["ascii:AAAA"], "bind": {"h": "dst"}}
        with pytest.raises(LoadError, match="duplicate"):
            load_signatures(self.write(tmp_path, [rec, dict(rec)]), g1_attacks)

    def test_uppercase_hex_rejected(self, tmp_path, g1_attacks):
        records = [{"id": 1, "attack": "recon_scan", "proto": "tcp",
                    "dport": 21, "content": ["hex:90AB"], "bind": {"h": "dst"}}]
        with pytest.raises(LoadError, match="hex"):
            load_signatures(self.write(tmp_path, records), g1_attacks)

    def test_bind_must_cover_attack_variables(self, tmp_path, g1_attacks):
        records = [{"id": 1, "attack": "launch_flood", "proto": "udp",
                    "dport": "any", "content": ["ascii:FLOOD"],
                    "bind": {"h": "src"}}]  # missing v
        with pytest.raises(LoadError, match="v"):
            load_signatures(self.write(tmp_path, records), g1_attacks)

    def test_fixture_loads(self, g1_sigs):
        assert [s.id for s in g1_sigs] == [1001, 1002, 1003, 1004]
