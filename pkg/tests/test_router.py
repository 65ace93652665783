import random

import pytest

from xappstore.errors import AlreadyRegistered, UnknownEndpoint
from xappstore.router import MAX_PAYLOAD_BYTES, RmrMessage, RmrRouter


def msg(mtype, source="S", payload=b"", t=0, corr=None):
    return RmrMessage(mtype=mtype, source=source, payload=payload,
                      sim_time_ms=t, correlation_id=corr)


class TestRegistration:
    def test_register_builds_index(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        assert r.receivers_for(100) == ["A"]

    def test_double_register_rejected(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        with pytest.raises(AlreadyRegistered):
            r.register_endpoint("A", rx={200}, tx=set())

    def test_index_matches_declarations(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        r.register_endpoint("B", rx={100, 200}, tx=set())
        assert r.receivers_for(100) == ["A", "B"]
        assert r.receivers_for(200) == ["B"]

    def test_deregister_removes_everywhere(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100, 200}, tx=set())
        r.deregister_endpoint("A")
        assert r.receivers_for(100) == []
        assert r.receivers_for(200) == []
        assert not r.is_registered("A")

    def test_deregister_unknown(self):
        r = RmrRouter()
        with pytest.raises(UnknownEndpoint):
            r.deregister_endpoint("ghost")

    def test_route_after_deregister_drops(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        r.deregister_endpoint("A")
        rec = r.route(msg(100))
        assert rec.dropped and rec.delivered_to == ()


class TestRoute:
    def test_fanout_to_multiple_recipients(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        r.register_endpoint("B", rx={100, 200}, tx=set())
        rec = r.route(msg(100))
        assert rec.delivered_to == ("A", "B")
        assert not rec.dropped

    def test_no_receiver_is_dropped_not_error(self):
        r = RmrRouter()
        rec = r.route(msg(300))
        assert rec.dropped and rec.delivered_to == ()

    def test_self_delivery_when_registered(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx={100})
        rec = r.route(msg(100, source="A"))
        assert rec.delivered_to == ("A",)
        assert r.drain("A") != []

    def test_dropped_iff_delivered_empty(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={1}, tx=set())
        for m in (msg(1), msg(2)):
            rec = r.route(m)
            assert rec.dropped == (rec.delivered_to == ())

    def test_payload_cap(self):
        with pytest.raises(ValueError):
            msg(1, payload=b"x" * (MAX_PAYLOAD_BYTES + 1))
        msg(1, payload=b"x" * MAX_PAYLOAD_BYTES)  # boundary allowed


class TestDrain:
    def test_drain_single(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        r.route(msg(100, payload=b"hi"))
        out = r.drain("A")
        assert [m.payload for m in out] == [b"hi"]
        assert r.drain("A") == []

    def test_drain_empty(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={100}, tx=set())
        assert r.drain("A") == []

    def test_drain_max(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={1}, tx=set())
        for i in range(5):
            r.route(msg(1, payload=bytes([i])))
        assert len(r.drain("A", 2)) == 2
        assert len(r.drain("A")) == 3

    def test_fifo_per_sender(self):
        r = RmrRouter()
        r.register_endpoint("A", rx={1}, tx=set())
        sent = []
        for sender in ("S1", "S2"):
            for i in range(10):
                m = msg(1, source=sender, payload=f"{sender}-{i}".encode())
                r.route(m)
                sent.append(m)
        got = r.drain("A")
        for sender in ("S1", "S2"):
            expect = [m.payload for m in sent if m.source == sender]
            actual = [m.payload for m in got if m.source == sender]
            assert actual == expect

    def test_interleaved_route_drain_matches_sequential_model(self):
        rng = random.Random(5)
        r = RmrRouter()
        r.register_endpoint("A", rx={1}, tx=set())
        model = []
        drained = []
        for step in range(200):
            if rng.random() < 0.6:
                m = msg(1, source=f"s{rng.randrange(3)}", payload=bytes([step % 256]))
                r.route(m)
                model.append(m)
            else:
                k = rng.randrange(3)
                got = r.drain("A", k)
                drained.extend(got)
        drained.extend(r.drain("A"))
        assert [m.payload for m in drained] == [m.payload for m in model]


class TestOracleEquivalence:
    """Randomized interleavings checked against a brute-force registration
    scan (the delivery-set oracle) plus conservation after every step."""

    def run_interleaving(self, seed):
        rng = random.Random(seed)
        r = RmrRouter()
        declared = {}  # endpoint -> rx set (the oracle's source of truth)
        endpoints = [f"e{i}" for i in range(10)]
        mtypes = list(range(20))
        for _ in range(60):
            op = rng.random()
            if op < 0.25:
                e = rng.choice(endpoints)
                if e not in declared:
                    rx = set(rng.sample(mtypes, rng.randrange(0, 5)))
                    r.register_endpoint(e, rx=rx, tx=set())
                    declared[e] = rx
            elif op < 0.4 and declared:
                e = rng.choice(sorted(declared))
                r.deregister_endpoint(e)
                del declared[e]
            else:
                t = rng.choice(mtypes)
                rec = r.route(msg(t, source="X"))
                oracle = tuple(sorted(e for e, rx in declared.items() if t in rx))
                assert rec.delivered_to == oracle
                assert rec.dropped == (oracle == ())
            if rng.random() < 0.3 and declared:
                r.drain(rng.choice(sorted(declared)), rng.randrange(0, 4))
            assert r.conservation_holds()

    def test_many_seeds(self):
        for seed in range(30):
            self.run_interleaving(seed)


def test_observation_log_pagination_and_export():
    r = RmrRouter()
    r.register_endpoint("A", rx={1}, tx=set())
    for i in range(5):
        r.route(msg(1, t=i * 10))
    page = r.observation_log(since_seq=2)
    assert [rec.seq for rec in page] == [3, 4]
    lines = r.export_log_jsonl().splitlines()
    assert len(lines) == 5
    import json
    first = json.loads(lines[0])
    assert set(first) == {"seq", "sim_time_ms", "mtype", "source",
                          "delivered_to", "dropped"}
