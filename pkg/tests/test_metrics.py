import math
from fractions import Fraction

import pytest

from modoxc.core import FabricParams
from modoxc.fabric import build_classical, build_modular
from modoxc.metrics import (
    cabling_from_topology,
    cabling_report,
    census_from_topology,
    component_census,
    coupler_loss_db,
    loss_budget,
    path_loss_db,
)
from modoxc.routing import ConnectionRequest, resolve_path


def test_classical_160_ports():
    report = cabling_report(FabricParams.classical(160), fabric_kind="classical")
    assert report.stage_fibers == 25600


def test_modular_8x20():
    report = cabling_report(FabricParams(160, 8, 20))
    assert report.stage_fibers == 2560
    assert report.ratio_to_classical == Fraction(1, 10)
    assert report.total_external_cables == 2560
    assert report.internal_module_fibers == 64 * 400


def test_unsealed_counts_module_fibers():
    report = cabling_report(FabricParams(160, 8, 20), sealed=False)
    assert report.total_external_cables == 2560 + 25600


def test_n16_square_factorization():
    assert cabling_report(FabricParams(16, 4, 4)).stage_fibers == 128


@pytest.mark.parametrize("N,n,r", [(4, 2, 2), (16, 4, 4), (64, 8, 8), (12, 3, 4), (1, 1, 1)])
def test_ratio_is_two_over_r(N, n, r):
    report = cabling_report(FabricParams(N, n, r))
    assert report.ratio_to_classical == Fraction(2, r)
    assert report.stage_fibers == 2 * N * n
    if n == r and N > 1:
        assert report.stage_fibers == 2 * math.isqrt(N) ** 3


def test_unknown_fabric_kind():
    with pytest.raises(ValueError):
        cabling_report(FabricParams(4, 2, 2), fabric_kind="torus")
    with pytest.raises(ValueError):
        loss_budget("torus", 2, 2)


@pytest.mark.parametrize("n,r", [(1, 1), (2, 2), (2, 3), (3, 3), (4, 4), (2, 8)])
def test_cabling_matches_built_topology(n, r):
    params = FabricParams(n * r, n, r)
    for sealed in (False, True):
        measured = cabling_from_topology(build_modular(n, r, sealed=sealed))
        assert measured == cabling_report(params, sealed=sealed)
    classical = cabling_from_topology(build_classical(n * r))
    assert classical.stage_fibers == (n * r) ** 2


@pytest.mark.parametrize("n,r", [(1, 1), (1, 5), (2, 3), (4, 4), (8, 8)])
def test_census_matches_built_topology(n, r):
    t = build_modular(n, r, sealed=True)
    assert census_from_topology(t) == component_census(t.params)
    census = component_census(t.params)
    assert (census.input_wss, census.oxc_modules, census.output_wss) == (n * r, n * n, n * r)


def test_census_defined_on_modular_only():
    with pytest.raises(ValueError):
        census_from_topology(build_classical(4))


@pytest.mark.parametrize("N", [4, 16, 64, 160])
def test_modular_loss_is_constant_in_N(N):
    r = math.isqrt(N) if N != 160 else 20
    budget = loss_budget("modular", N // r, r)
    assert budget.total_db == 20.0
    assert budget.stages_traversed == 4


def test_classical_loss_is_marked_derived():
    budget = loss_budget("classical", 8, 20)
    assert budget.total_db == 10.0 and budget.derived


def test_coupler_variant_n8():
    budget = loss_budget("modular", 8, 20, coupler_input=True)
    assert budget.total_db == pytest.approx(24.03, abs=0.005)
    assert coupler_loss_db(8) - 5.0 == pytest.approx(4.03, abs=0.005)
    assert abs((coupler_loss_db(8) - 5.0) - 4.0) < 0.1


def test_coupler_delta_grows_with_n():
    deltas = [coupler_loss_db(n) - 5.0 for n in (4, 8, 16, 32)]
    assert deltas == sorted(deltas)
    assert coupler_loss_db(1) == 0.0
    with pytest.raises(ValueError):
        coupler_loss_db(0)


def test_per_wss_loss_is_configurable():
    assert loss_budget("modular", 4, 4, per_wss_loss_db=6.0).total_db == 24.0
    assert loss_budget("modular", 4, 4, fiber_loss_db=0.5).total_db == 20.5


@pytest.mark.parametrize("sealed,coupler", [(False, False), (True, False), (False, True)])
def test_walked_path_loss_matches_budget(sealed, coupler):
    t = build_modular(2, 4, sealed=sealed, coupler_input=coupler)
    expected = loss_budget("modular", 2, 4, coupler_input=coupler).total_db
    for p, q in [(0, 0), (3, 6), (7, 1)]:
        path = resolve_path(t, ConnectionRequest(p, q, 0))
        assert path_loss_db(t, path) == pytest.approx(expected)


def test_walked_classical_path_loss():
    t = build_classical(5)
    path = resolve_path(t, ConnectionRequest(1, 4, 0))
    assert path_loss_db(t, path) == loss_budget("classical", 1, 5).total_db


def test_report_dicts_are_json_ready():
    d = cabling_report(FabricParams(160, 8, 20)).as_dict()
    assert d["ratioToClassical"] == "1/10"
    assert loss_budget("modular", 8, 20).as_dict()["totalDb"] == 20.0
