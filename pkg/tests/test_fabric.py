from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modoxc.core import EdgeRole, NodeKind, Stage, validate_topology
from modoxc.fabric import (
    StageError,
    WssNode,
    build_classical,
    build_modular,
    build_stage,
    cascade_assignment,
    compose_cascade,
    input_device,
    module_node,
    output_device,
    path_count_matrix,
    phase1_substitute,
    phase2_decompose,
    phase3_merge,
)
from modoxc.metrics import census_from_topology, component_census

from oracles import brute_force_paths

SMALL = [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2)]


def test_classical_component_counts():
    t = build_classical(6, 3)
    census = t.census()
    assert census[(NodeKind.INPUT_WSS, 1, 6)] == 6
    assert census[(NodeKind.OUTPUT_WSS, 6, 1)] == 6
    assert t.stage_fiber_count == 36
    assert all(t.nodes[input_device((p,))].fan_out == 6 for p in range(6))


def test_classical_fiber_3_2():
    t = build_classical(6)
    e = t.out_edge(input_device((3,)), 2)
    assert e.dst == output_device((2,)) and e.dst_port == 3
    assert e.tag == ((3, 2), (2, 3))


def test_classical_single_port():
    t = build_classical(1)
    assert validate_topology(t) == []
    assert t.stage_fiber_count == 1


def test_phase1_relabels_devices():
    t = phase1_substitute(6, 2, 3)
    assert input_device((1, 0)) in t.nodes
    assert output_device((0, 2)) in t.nodes
    assert input_device((3,)) not in t.nodes
    assert validate_topology(t) == []
    # input WSS (1,0) output 0*3+2 lands on output WSS (0,2) input 1*3+0
    e = t.out_edge(input_device((1, 0)), 2)
    assert (e.dst, e.dst_port) == (output_device((0, 2)), 3)


def test_phase2_cascade_structure():
    t = phase2_decompose(phase1_substitute(6, 2, 3))
    assert t.stage is Stage.DOUBLE_PRIME
    first = t.nodes[input_device((1, 0))]
    assert (first.fan_in, first.fan_out) == (1, 2)
    e = t.out_edge(input_device((1, 0)), 0)
    assert e.dst == input_device((1, 0, 0))
    inner = t.nodes[input_device((1, 0, 0))]
    assert (inner.fan_in, inner.fan_out) == (1, 3)
    out = t.nodes[output_device((0, 2, 1))]
    assert (out.fan_in, out.fan_out) == (3, 1)
    assert t.out_edge(output_device((0, 2, 1)), 0).dst == output_device((0, 2))
    assert validate_topology(t) == []


def test_phase3_module_q10():
    t = phase3_merge(phase2_decompose(phase1_substitute(6, 2, 3)))
    q10 = module_node(1, 0)
    assert (t.nodes[q10].fan_in, t.nodes[q10].fan_out) == (3, 3)
    members = {nid.label for nid in t.module_members(1, 0)}
    expected = {(1, p, 0) for p in range(3)} | {(0, q, 1) for q in range(3)}
    assert members == expected
    feeder = t.in_index[(q10, 0)]
    assert feeder.src == input_device((1, 0)) and feeder.src_port == 0


def test_sealed_module_hides_inner_devices():
    t = build_modular(2, 3, sealed=True)
    assert not any(len(nid.label) == 3 for nid in t.nodes)
    assert t.internal_fiber_count == 0
    assert validate_topology(t) == []


@pytest.mark.parametrize("n,r", SMALL + [(4, 4), (3, 5)])
def test_module_census(n, r):
    t = build_modular(n, r)
    assert census_from_topology(t) == component_census(t.params)
    assert t.census()[(NodeKind.OXC_MODULE, r, r)] == n * n
    assert t.stage_fiber_count == 2 * n * n * r
    assert t.internal_fiber_count == (n * r) ** 2


def test_stage_functions_reject_wrong_input():
    classical = build_classical(6)
    with pytest.raises(StageError):
        phase2_decompose(classical)
    with pytest.raises(StageError):
        phase3_merge(phase1_substitute(6, 2, 3))
    with pytest.raises(ValueError):
        phase1_substitute(6, 4, 2)


def test_phase3_rejects_fiber_crossing_subnetworks():
    t = phase2_decompose(phase1_substitute(4, 2, 2))
    eid = next(e.id for e in t.edges.values()
               if e.src == input_device((0, 0, 0)) and e.src_port == 0)
    edges = dict(t.edges)
    e = edges[eid]
    edges[eid] = type(e)(e.id, e.src, e.src_port, output_device((0, 0, 1)), 1,
                         e.role, e.tag)
    with pytest.raises(ValueError, match="crosses"):
        phase3_merge(t.replace_edges(edges))


@pytest.mark.parametrize("stage", list(Stage))
@pytest.mark.parametrize("n,r", SMALL)
def test_every_stage_validates(stage, n, r):
    assert validate_topology(build_stage(stage, n, r, 2)) == []


@pytest.mark.parametrize("stage", list(Stage))
@pytest.mark.parametrize("n,r", SMALL + [(2, 4)])
def test_single_path_per_pair_matches_graph_oracle(stage, n, r):
    for sealed in (False, True) if stage is Stage.MODULAR else (False,):
        t = build_stage(stage, n, r, sealed=sealed)
        ours = path_count_matrix(t)
        assert np.array_equal(ours, brute_force_paths(t))
        assert (ours == 1).all()


def test_coupler_variant_has_coupler_nodes():
    t = build_modular(2, 3, coupler_input=True)
    census = t.census()
    assert census[(NodeKind.INPUT_COUPLER, 1, 2)] == 6
    assert validate_topology(t) == []
    assert (path_count_matrix(t) == 1).all()


def test_wss_node_wavelengths_are_independent():
    t = build_classical(3, 3)
    sw = WssNode(t.nodes[input_device((0,))], 3)
    sw.select(0, 0, 2)
    sw.select(1, 0, 1)
    sw.select(2, 0, 2)
    assert [sw.output_of(wl) for wl in range(3)] == [2, 1, 2]
    with pytest.raises(ValueError):
        sw.select(0, 0, 1)
    sw.release(0, 0)
    assert sw.output_of(0) is None and sw.output_of(2) == 2


def test_output_wss_contention_per_wavelength():
    t = build_classical(3, 2)
    sw = WssNode(t.nodes[output_device((1,))], 2)
    sw.select(0, 0, 0)
    sw.select(1, 2, 0)
    with pytest.raises(ValueError, match="contention"):
        sw.select(0, 1, 0)


def test_wss_node_rejects_square_devices():
    t = build_modular(2, 2, sealed=True)
    with pytest.raises(ValueError):
        WssNode(t.nodes[module_node(0, 1)], 1)


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_cascade_equals_single_wss(n, r, data):
    w = data.draw(st.integers(1, 8))
    assignment = data.draw(st.dictionaries(st.integers(0, w - 1),
                                           st.integers(0, n * r - 1)))
    first, second = cascade_assignment(assignment, n, r)
    assert compose_cascade(first, second, r) == assignment
    assert all(0 <= b < n for b in first.values())
    assert all(0 <= x < r for branch in second.values() for x in branch.values())


def test_stage_fiber_counts_through_pipeline():
    n, r = 2, 3
    N = n * r
    counts = [build_stage(s, n, r).stage_fiber_count for s in Stage]
    assert counts == [N * N, N * N, N * N + 2 * N * n, 2 * N * n]


def test_export_order_is_deterministic():
    a = build_modular(2, 3)
    b = build_modular(2, 3)
    assert list(a.edges) == list(b.edges)
    assert Counter(e.role for e in a.edges.values())[EdgeRole.EXTERNAL] == 12
