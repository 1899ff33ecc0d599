import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsim.topology import (
    LinkSpec,
    NodeSpec,
    Topology,
    build_routes,
    transfer_delay,
    validate_topology,
)

from helpers import brute_force_routes, make_topology, random_topology


def minimal_topology():
    return make_topology(
        [(0, "client"), (1, "worker", 1, 1e6)],
        [(0, 1, 0.001, 1e6)],
    )


class TestValidateTopology:
    def test_minimal_valid(self):
        assert validate_topology(minimal_topology()) == []

    def test_duplicate_node_id(self):
        t = make_topology(
            [(0, "client"), (3, "worker", 1, 1e6), (3, "worker", 1, 1e6)],
            [(0, 3, 0.001, 1e6)],
        )
        assert "duplicate node id 3" in validate_topology(t)

    def test_disconnected(self):
        t = make_topology(
            [(0, "client"), (1, "worker", 1, 1e6), (2, "worker", 1, 1e6)],
            [(0, 1, 0.001, 1e6)],
        )
        assert "topology not connected" in validate_topology(t)

    def test_worker_needs_compute(self):
        t = make_topology([(0, "client"), (1, "worker")], [(0, 1, 0.001, 1e6)])
        violations = validate_topology(t)
        assert "worker 1 must have cores >= 1" in violations
        assert "worker 1 must have core_speed > 0" in violations

    def test_client_must_not_compute(self):
        t = make_topology([(0, "client", 2, 1e6), (1, "worker", 1, 1e6)], [(0, 1, 0.001, 1e6)])
        assert "client 0 must not have compute capacity" in validate_topology(t)

    def test_missing_roles(self):
        t = make_topology([(0, "broker"), (1, "worker", 1, 1e6)], [(0, 1, 0.001, 1e6)])
        assert "topology has no client" in validate_topology(t)

    def test_bad_links(self):
        t = make_topology(
            [(0, "client"), (1, "worker", 1, 1e6)],
            [(0, 1, 0.001, 1e6), (1, 0, 0.002, 1e6), (0, 9, 0.001, 1e6), (1, 1, 0.0, 1e6)],
        )
        violations = validate_topology(t)
        assert "duplicate link (0,1)" in violations
        assert "link (0,9) references unknown node 9" in violations
        assert "link (1,1) endpoints must differ" in violations


class TestBuildRoutes:
    def test_self_route_is_empty(self):
        rt = build_routes(minimal_topology())
        route = rt.route(0, 0)
        assert route.hop_count == 0 and route.propagation == 0.0
        assert route.path == (0,)

    def test_triangle_prefers_two_cheap_hops(self):
        # a-b=5ms, b-c=5ms, a-c=20ms: going through b is cheaper.
        t = make_topology(
            [(0, "client"), (1, "broker"), (2, "worker", 1, 1e6)],
            [(0, 1, 0.005, 1e6), (1, 2, 0.005, 1e6), (0, 2, 0.020, 1e6)],
        )
        route = build_routes(t).route(0, 2)
        assert route.path == (0, 1, 2)
        assert route.propagation == pytest.approx(0.010, abs=1e-15)

    def test_line_sums_propagation(self):
        t = make_topology(
            [(0, "client"), (1, "broker"), (2, "worker", 1, 1e6)],
            [(0, 1, 0.003, 1e6), (1, 2, 0.004, 1e6)],
        )
        route = build_routes(t).route(0, 2)
        assert route.propagation == 0.003 + 0.004
        assert route.bottleneck_rate == 1e6

    def test_tie_breaks_fewer_hops_then_ids(self):
        # two equal-propagation routes 0->3: direct (1 hop) beats 0-1-3.
        t = make_topology(
            [(0, "client"), (1, "broker"), (2, "broker"), (3, "worker", 1, 1e6)],
            [
                (0, 1, 0.001, 1e6),
                (1, 3, 0.001, 1e6),
                (0, 3, 0.002, 1e6),
                (0, 2, 0.001, 1e6),
                (2, 3, 0.001, 1e6),
            ],
        )
        route = build_routes(t).route(0, 3)
        assert route.path == (0, 3)
        # remove the direct link: lexicographic tie-break picks path via 1
        t2 = make_topology(
            [(0, "client"), (1, "broker"), (2, "broker"), (3, "worker", 1, 1e6)],
            [(0, 1, 0.001, 1e6), (1, 3, 0.001, 1e6), (0, 2, 0.001, 1e6), (2, 3, 0.001, 1e6)],
        )
        assert build_routes(t2).route(0, 3).path == (0, 1, 3)

    def test_rejects_invalid_topology(self):
        t = make_topology([(0, "client")], [])
        with pytest.raises(ValueError, match="invalid topology"):
            build_routes(t)

    def test_matches_brute_force_on_random_topologies(self):
        rng = random.Random(0xBEEF)
        for _ in range(25):
            t = random_topology(rng, max_nodes=7)
            rt = build_routes(t)
            expected = brute_force_routes(t)
            for key, (prop, path) in expected.items():
                route = rt.route(*key)
                assert route.path == path
                assert route.propagation == prop


class TestTransferDelay:
    def test_src_equals_dst(self):
        rt = build_routes(minimal_topology())
        assert transfer_delay(rt, 0, 0, 12345.0) == 0.0

    def test_single_hop(self):
        rt = build_routes(minimal_topology())
        assert transfer_delay(rt, 0, 1, 1000.0) == pytest.approx(0.002, abs=1e-15)

    def test_two_hops_sum_store_and_forward(self):
        t = make_topology(
            [(0, "client"), (1, "broker"), (2, "worker", 1, 1e6)],
            [(0, 1, 0.001, 1e6), (1, 2, 0.001, 1e6)],
        )
        rt = build_routes(t)
        # independent per-hop computation: each hop is 1 ms + 1000/1e6 s
        per_hop = 0.001 + 1000.0 / 1e6
        assert transfer_delay(rt, 0, 2, 1000.0) == pytest.approx(2 * per_hop, abs=1e-15)

    def test_unknown_node(self):
        rt = build_routes(minimal_topology())
        with pytest.raises(KeyError):
            transfer_delay(rt, 0, 99, 10.0)

    def test_negative_bytes_rejected(self):
        rt = build_routes(minimal_topology())
        with pytest.raises(ValueError):
            transfer_delay(rt, 0, 1, -1.0)


@st.composite
def topologies(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_topology(random.Random(seed), max_nodes=7)


class TestRoutingProperties:
    @settings(max_examples=60)
    @given(topologies(), st.floats(min_value=0, max_value=1e9), st.floats(min_value=0, max_value=1e9))
    def test_delay_monotone_in_bytes(self, t, n1, n2):
        rt = build_routes(t)
        lo, hi = min(n1, n2), max(n1, n2)
        for src in (n.id for n in t.nodes):
            for dst in (n.id for n in t.nodes):
                assert transfer_delay(rt, src, dst, lo) <= transfer_delay(rt, src, dst, hi)

    @settings(max_examples=60)
    @given(topologies(), st.floats(min_value=0, max_value=1e8))
    def test_delay_symmetric(self, t, nbytes):
        rt = build_routes(t)
        ids = [n.id for n in t.nodes]
        for src in ids:
            for dst in ids:
                assert transfer_delay(rt, src, dst, nbytes) == pytest.approx(
                    transfer_delay(rt, dst, src, nbytes), rel=1e-12, abs=1e-15
                )

    @settings(max_examples=60)
    @given(topologies())
    def test_triangle_property(self, t):
        rt = build_routes(t)
        ids = [n.id for n in t.nodes]
        for a in ids:
            for b in ids:
                for c in ids:
                    lhs = rt.route(a, c).propagation
                    rhs = rt.route(a, b).propagation + rt.route(b, c).propagation
                    assert lhs <= rhs + 1e-12
