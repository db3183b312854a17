import itertools
import random

import numpy as np
import pytest

from modoxc.faults import random_shuffle_fault
from modoxc.shuffle import (
    Flavor,
    build_modular_shuffle,
    build_shuffle,
    build_table,
    check_equivalence,
    check_requirements,
    check_shuffle_properties,
    factorize_table,
    unfactorize_table,
)

from oracles import shuffle_reachability


def test_fiber_32_links_input_32_to_output_23():
    assert build_shuffle(6).trace((3, 2)) == (2, 3)


def test_single_fiber_shuffle():
    assert build_shuffle(1).fiber_tags() == [((0, 0), (0, 0))]


def test_n4_every_group_pair_has_one_fiber():
    net = build_shuffle(4)
    counts = np.zeros((4, 4), dtype=int)
    for (p, _), (q, _) in net.fibers.items():
        counts[p, q] += 1
    assert (counts == 1).all()


@pytest.mark.parametrize("N", range(1, 17))
def test_p1_p2_hold(N):
    assert check_shuffle_properties(build_shuffle(N)) == []


def test_zero_size_rejected():
    with pytest.raises(ValueError):
        build_shuffle(0)
    with pytest.raises(ValueError):
        build_table(0)
    with pytest.raises(ValueError):
        build_modular_shuffle(0, 3)


def test_table_entry_3_2():
    assert build_table(6).entry((3,), (2,)) == ((3, 2), (2, 3))
    assert build_table(1).entries == {((0,), (0,)): ((0, 0), (0, 0))}


def test_table_matches_shuffle_fibers_n5():
    table = build_table(5)
    tags = dict(build_shuffle(5).fiber_tags())
    for (row, col), (src, dst) in table.entries.items():
        assert src == (row[0], col[0])
        assert tags[src] == dst


def test_factorized_entry_10_02():
    t = factorize_table(build_table(6), 2, 3)
    assert t.entry((1, 0), (0, 2)) == ((1, 0, 0, 2), (0, 2, 1, 0))


def test_factorize_n1_only_adds_zero_prefixes():
    mono = build_table(4)
    fac = factorize_table(mono, 1, 4)
    for (row, col), (src, dst) in mono.entries.items():
        assert fac.entries[((0, row[0]), (0, col[0]))] == (
            (0, src[0], 0, src[1]), (0, dst[0], 0, dst[1]))


def test_subtables_of_12_as_3x4_match_s4():
    fac = factorize_table(build_table(12), 3, 4)
    reference = build_table(4).entries
    for a, b in itertools.product(range(3), repeat=2):
        assert fac.subtable(a, b).entries == reference


@pytest.mark.parametrize("n,r", [(1, 1), (2, 3), (3, 2), (4, 4), (2, 5)])
def test_requirements_and_reflatten(n, r):
    mono = build_table(n * r)
    fac = factorize_table(mono, n, r)
    assert check_requirements(mono) == []
    assert check_requirements(fac) == []
    assert unfactorize_table(fac).entries == mono.entries


def test_factorize_rejects_size_mismatch():
    with pytest.raises(ValueError):
        factorize_table(build_table(6), 4, 2)


def test_requirement_violations_detected():
    fac = factorize_table(build_table(6), 2, 3)
    entries = dict(fac.entries)
    key = ((1, 0), (0, 2))
    src, dst = entries[key]
    entries[key] = (src, (0, 2, 1, 1))
    broken = type(fac)(fac.rows, fac.cols, entries, Flavor.FACTORIZED, 2, 3)
    assert any(p.startswith("R2") for p in check_requirements(broken))
    del entries[key]
    broken = type(fac)(fac.rows, fac.cols, entries, Flavor.FACTORIZED, 2, 3)
    assert any(p.startswith("R1") for p in check_requirements(broken))


def test_trace_of_input_1002():
    net = build_modular_shuffle(2, 3)
    sub, local = net.input_links[(1, 0, 0, 2)]
    assert sub == (1, 0) and local == (0, 2)
    assert net.subnetworks[sub].trace(local) == (2, 0)
    assert net.trace((1, 0, 0, 2)) == (0, 2, 1, 0)


def test_modular_n1_matches_monolithic():
    N = 5
    modular = build_modular_shuffle(1, N)
    mono = build_shuffle(N)
    for (p, q), (q2, p2) in mono.fibers.items():
        assert modular.trace((0, p, 0, q)) == (0, q2, 0, p2)


def test_modular_3x2_reachability_equals_s6():
    mod_matrix, mod_ports = shuffle_reachability(build_modular_shuffle(3, 2))
    ref_matrix, ref_ports = shuffle_reachability(build_shuffle(6))
    assert (mod_matrix == ref_matrix).all()
    assert mod_ports == ref_ports


def test_equivalence_examples():
    assert check_equivalence(build_modular_shuffle(2, 3), 2, 3)
    assert check_equivalence(build_modular_shuffle(1, 1), 1, 1)
    assert check_equivalence(build_shuffle(6), 2, 3)


@pytest.mark.parametrize("n,r", [(n, r) for n in range(1, 9) for r in range(1, 9)
                                 if n * r <= 24])
def test_equivalence_small_grid(n, r):
    result = check_equivalence(build_modular_shuffle(n, r), n, r)
    assert result.ok and result.checked == (n * r) ** 2


def test_rewired_output_link_is_localised():
    net = build_modular_shuffle(2, 3)
    links = dict(net.output_links)
    a_key, b_key = ((1, 0), (2, 0)), ((1, 0), (2, 1))
    links[a_key], links[b_key] = links[b_key], links[a_key]
    broken = type(net)(net.n, net.r, net.flavor, input_links=net.input_links,
                       subnetworks=net.subnetworks, output_links=links)
    result = check_equivalence(broken, 2, 3)
    assert not result.ok
    assert result.witness.kind == "misrouted"
    # S_10 output (2,0) carries the fiber entering at input 1002
    assert result.witness.fiber in {(1, 0, 0, 2), (1, 1, 0, 2)}


def test_deleted_input_link_is_dangling():
    net = build_modular_shuffle(2, 2)
    links = dict(net.input_links)
    del links[(1, 1, 0, 1)]
    broken = type(net)(2, 2, net.flavor, input_links=links,
                       subnetworks=net.subnetworks, output_links=net.output_links)
    result = check_equivalence(broken, 2, 2)
    assert not result.ok
    assert result.witness.kind == "dangling"
    assert result.witness.fiber == (1, 1, 0, 1)


def test_random_shuffle_faults_always_detected():
    rng = random.Random(7)
    for _ in range(60):
        n, r = rng.choice([(2, 2), (2, 3), (3, 2), (3, 3)])
        broken, fault = random_shuffle_fault(build_modular_shuffle(n, r), rng)
        result = check_equivalence(broken, n, r)
        assert not result.ok, fault
        assert result.witness is not None
