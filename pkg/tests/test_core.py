import itertools
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modoxc.core import (
    AddressError,
    FabricParams,
    FiberEdge,
    GroupPortAddress,
    ModularAddress,
    NodeId,
    NodeKind,
    Side,
    flatten_address,
    format_label,
    split_address,
    swap_halves,
    validate_topology,
)
from modoxc.fabric import build_classical, build_modular


def test_split_relabels_wss_three_as_one_zero():
    assert split_address(3, 3) == (1, 0)


def test_split_trivial_cases():
    assert split_address(0, 5) == (0, 0)
    for q in range(10):
        assert split_address(q, 1) == (q, 0)


def test_flatten_examples():
    assert flatten_address(1, 0, 3) == 3
    assert flatten_address(0, 2, 3) == 2


def test_round_trip_exhaustive_n4_r4():
    n = r = 4
    seen = set()
    for a, p_prime in itertools.product(range(n), range(r)):
        p = flatten_address(a, p_prime, r, n)
        assert split_address(p, r, n * r) == (a, p_prime)
        seen.add(p)
    assert seen == set(range(n * r))


@given(st.integers(1, 12), st.integers(1, 12), st.data())
def test_flatten_split_inverse(n, r, data):
    p = data.draw(st.integers(0, n * r - 1))
    assert flatten_address(*split_address(p, r, n * r), r, n) == p


@pytest.mark.parametrize("call", [
    lambda: split_address(6, 3, 6),
    lambda: split_address(-1, 3),
    lambda: flatten_address(0, 3, 3),
    lambda: flatten_address(2, 0, 3, 2),
])
def test_out_of_range_addresses(call):
    with pytest.raises(AddressError):
        call()


def test_params_require_exact_factorization():
    with pytest.raises(ValueError):
        FabricParams(6, 4, 2, 1)
    with pytest.raises(ValueError):
        FabricParams(0, 0, 1, 1)
    with pytest.raises(ValueError):
        FabricParams(6, 2, 3, 0)
    p = FabricParams.from_factors(2, 3, 3)
    assert (p.N, p.n, p.r, p.w) == (6, 2, 3, 3)
    assert p.check_wavelength(2) == 2
    with pytest.raises(AddressError):
        p.check_wavelength(3)


@given(st.integers(0, 30), st.integers(0, 30), st.sampled_from(list(Side)))
def test_group_port_swap_is_involution(g, p, side):
    x = GroupPortAddress(g, p, side)
    assert x.swap().swap() == x
    assert x.swap().digits == (p, g)


@given(*(st.integers(0, 9) for _ in range(4)))
def test_modular_inverse_is_involution(a, pp, b, qq):
    x = ModularAddress(a, pp, b, qq)
    assert x.inverse().inverse() == x
    assert x.inverse().digits == swap_halves(x.digits)


def test_modular_flatten_split_round_trip():
    x = ModularAddress(1, 0, 0, 2)
    flat = x.flatten(3)
    assert flat == GroupPortAddress(3, 2)
    assert ModularAddress.split(flat, 3) == x
    with pytest.raises(AddressError):
        ModularAddress(2, 0, 0, 0).check(2, 3)


def test_format_label_switches_to_tuples_above_nine():
    assert format_label((1, 0, 0, 2)) == "1002"
    assert format_label((1, 10)) == "(1,10)"


def test_node_key_round_trip():
    for nid in [NodeId(NodeKind.INPUT_WSS, (1, 0, 2)),
                NodeId(NodeKind.OXC_MODULE, (1, 0)),
                NodeId(NodeKind.EXTERNAL_PORT, (4,), Side.OUTPUT),
                NodeId(NodeKind.INPUT_COUPLER, (0, 1))]:
        assert NodeId.from_key(nid.key) == nid


def test_classical_self_validates():
    assert validate_topology(build_classical(6, 3)) == []


def test_modular_2x3_validates_with_24_stage_fibers():
    t = build_modular(2, 3, 3)
    assert validate_topology(t) == []
    assert t.stage_fiber_count == 2 * 6 * 2 == 24


def test_dangling_edge_is_reported():
    t = build_classical(3)
    ghost = NodeId(NodeKind.OUTPUT_WSS, (9,))
    eid = sorted(t.edges)[5]
    broken = t.replace_edges({**t.edges, eid: replace(t.edges[eid], dst=ghost)})
    violations = validate_topology(broken)
    assert any(v.subject == eid and "dangling" in v.invariant for v in violations)


def test_port_beyond_degree_and_double_use_reported():
    t = build_classical(3)
    e = next(e for e in t.edges.values() if e.dst.kind is NodeKind.OUTPUT_WSS)
    extra = FiberEdge("extra", e.src, 7, e.dst, e.dst_port)
    violations = validate_topology(t.replace_edges({**t.edges, "extra": extra}))
    invariants = {v.invariant for v in violations}
    assert "source port outside node degree" in invariants
    assert "input port carries two fibers" in invariants
    assert "stage fiber count" in invariants


def test_missing_external_port_fiber_reported():
    t = build_modular(2, 2)
    eid = next(e.id for e in t.edges.values() if e.src.kind is NodeKind.EXTERNAL_PORT)
    edges = {k: v for k, v in t.edges.items() if k != eid}
    violations = validate_topology(t.replace_edges(edges))
    assert any("exactly one fiber" in v.invariant for v in violations)
