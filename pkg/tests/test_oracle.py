import math

import pytest

from sla_forge.beampattern import AngularGrid
from sla_forge.geometry import ArrayGeometry, DesignConfig, check_virtual_constraint, ula
from sla_forge.optimizer import array_psl, cyclic_design
from sla_forge.oracle import (CapExceededError, enumerate_arrays,
                              exhaustive_search, psl_dense_scan)

DESK = DesignConfig(M=4, N=4, D1=9, D2=9, sigma=0.7, K=512, n_starts=1)
# pinned from the first exhaustive run over the 784 endpoint-fixed pairs
DESK_GLOBAL_PSL_DB = -3.5507680530850587


@pytest.fixture(scope="module")
def desk_report():
    return exhaustive_search(DESK)


def test_enumeration_order():
    arrays = list(enumerate_arrays(4, 5))
    assert [a.positions for a in arrays] == [
        (0, 1, 2, 5), (0, 1, 3, 5), (0, 1, 4, 5), (0, 2, 3, 5), (0, 2, 4, 5), (0, 3, 4, 5)]


def test_no_interior_freedom():
    cfg = DesignConfig(M=2, N=2, D1=5, D2=7, sigma=0.5, K=256)
    rep = exhaustive_search(cfg)
    assert rep.n_feasible == 1
    grid = AngularGrid(256)
    expected = max(array_psl(ArrayGeometry((0, 5)), grid), array_psl(ArrayGeometry((0, 7)), grid))
    assert rep.global_psl_db == expected


def test_desk_scale(desk_report):
    assert desk_report.n_enumerated == math.comb(8, 2) ** 2
    assert 0 < desk_report.n_feasible <= 784
    grid = AngularGrid(DESK.K)
    for tx, rx in desk_report.argmin_pairs:
        assert check_virtual_constraint(tx, rx, DESK.sigma, 4, 4)
        assert max(array_psl(tx, grid), array_psl(rx, grid)) <= desk_report.global_psl_db + 1e-12
    # the two minimizers are the same design with the roles swapped
    assert {(t.positions, r.positions) for t, r in desk_report.argmin_pairs} == {
        ((0, 3, 5, 9), (0, 4, 6, 9)), ((0, 4, 6, 9), (0, 3, 5, 9))}
    assert desk_report.global_psl_db == pytest.approx(DESK_GLOBAL_PSL_DB, abs=1e-9)


def test_cd_from_minimizer_keeps_global(desk_report):
    tx, rx = desk_report.argmin_pairs[0]
    res = cyclic_design(tx, rx, DESK)
    assert res.psl0_db == desk_report.global_psl_db


def test_report_serializes(desk_report):
    d = desk_report.to_dict()
    assert d["n_feasible"] == desk_report.n_feasible
    assert d["argmin_pairs"][0]["tx"]["positions"][0] == 0


def test_cap():
    with pytest.raises(CapExceededError):
        exhaustive_search(DesignConfig(M=10, N=10, D1=60, D2=60), cap=1000)


def test_dense_scan_ula10():
    assert psl_dense_scan(ula(10), 100_000) == pytest.approx(-12.97, abs=0.01)


def test_dense_scan_requires_finer_grid():
    with pytest.raises(ValueError):
        psl_dense_scan(ula(10), 5000, K=1000)


def test_design_grid_error_is_small():
    geom = ArrayGeometry((0, 8, 11, 20, 21, 37, 39, 53, 54, 60))
    coarse = array_psl(geom, AngularGrid(1000))
    fine = psl_dense_scan(geom, 100_000, K=1000)
    assert fine >= coarse - 1e-12
    assert fine - coarse < 0.1
