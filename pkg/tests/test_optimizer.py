import json
import math

import numpy as np
import pytest

from sla_forge.beampattern import AngularGrid
from sla_forge.geometry import (ArrayGeometry, DesignConfig, InfeasibleError,
                                check_virtual_constraint, random_feasible_pair,
                                ula)
from sla_forge.optimizer import (TOL_DB, DesignResult, array_psl,
                                 coordinate_sweep, cyclic_design,
                                 multi_start_design, start_seed)


def G(*p):
    return ArrayGeometry(p)


SMALL = DesignConfig(M=5, N=4, D1=16, D2=12, sigma=0.7, K=512, n_starts=6, seed=7)


class TestCoordinateSweep:
    @pytest.mark.parametrize("start", [1, 2, 3])
    def test_single_interior_matches_brute_force(self, start):
        cfg = DesignConfig(M=3, N=4, D1=4, D2=3, sigma=0.1, K=512)
        grid = AngularGrid(cfg.K)
        rx = ula(4)
        scores = {c: array_psl(G(0, c, 4), grid) for c in (1, 2, 3)}
        best = min(scores.values())
        if scores[start] <= best + TOL_DB:
            expected = start
        else:
            expected = min(c for c, s in scores.items() if s == best)
        geom, psl = coordinate_sweep(G(0, start, 4), rx, "tx", cfg, grid)
        assert geom == G(0, expected, 4)
        assert psl == scores[expected]

    def test_tie_goes_to_smallest_position(self):
        # {0,1,4} and {0,3,4} are mirror images with identical patterns;
        # {0,2,4} has a grating lobe
        cfg = DesignConfig(M=3, N=2, D1=4, D2=1, sigma=0.1, K=512)
        grid = AngularGrid(cfg.K)
        assert array_psl(G(0, 1, 4), grid) == pytest.approx(array_psl(G(0, 3, 4), grid), abs=1e-12)
        geom, _ = coordinate_sweep(G(0, 2, 4), G(0, 1), "tx", cfg, grid)
        assert geom == G(0, 1, 4)

    def test_never_increases(self):
        grid = AngularGrid(SMALL.K)
        rng = np.random.default_rng(1)
        for _ in range(10):
            tx, rx = random_feasible_pair(SMALL, rng)
            new_tx, psl = coordinate_sweep(tx, rx, "tx", SMALL, grid)
            assert psl <= array_psl(tx, grid)
            assert check_virtual_constraint(new_tx, rx, SMALL.sigma, SMALL.M, SMALL.N)
            new_rx, psl = coordinate_sweep(rx, new_tx, "rx", SMALL, grid)
            assert psl <= array_psl(rx, grid)
            assert check_virtual_constraint(new_tx, new_rx, SMALL.sigma, SMALL.M, SMALL.N)

    def test_respects_virtual_constraint(self):
        # sigma = 0.99 forbids any repeated sum
        cfg = DesignConfig(M=3, N=3, D1=8, D2=9, sigma=0.99, K=256)
        grid = AngularGrid(cfg.K)
        tx, rx = G(0, 1, 8), G(0, 3, 9)
        assert check_virtual_constraint(tx, rx, cfg.sigma)
        new_tx, _ = coordinate_sweep(tx, rx, "tx", cfg, grid)
        assert check_virtual_constraint(new_tx, rx, cfg.sigma)
        assert not check_virtual_constraint(tx, rx, 1.0)

    def test_infeasible_start_rejected(self):
        cfg = DesignConfig(M=3, N=3, D1=4, D2=4, sigma=0.9, K=128)
        with pytest.raises(InfeasibleError):
            coordinate_sweep(G(0, 2, 4), G(0, 2, 4), "tx", cfg, AngularGrid(128))

    def test_aperture_mismatch(self):
        with pytest.raises(ValueError):
            coordinate_sweep(G(0, 2, 5), G(0, 1, 3, 12), "tx", SMALL, AngularGrid(64))


@pytest.fixture(scope="module")
def runs():
    grid = AngularGrid(SMALL.K)
    rng = np.random.default_rng(3)
    out = []
    for _ in range(5):
        tx, rx = random_feasible_pair(SMALL, rng)
        out.append(((tx, rx), cyclic_design(tx, rx, SMALL, grid)))
    return out


class TestCyclicDesign:
    def test_trace_monotone(self, runs):
        for _, res in runs:
            assert all(b <= a for a, b in zip(res.psl_trace, res.psl_trace[1:]))
            assert res.psl_trace[-1] == res.psl0_db
            assert res.psl0_db <= res.psl_init_db
            assert res.outer_iterations == len(res.psl_trace) - 1

    def test_result_invariants(self, runs):
        for _, res in runs:
            assert res.psl0_db == max(res.psl_t_db, res.psl_r_db)
            assert (res.tx.positions[0], res.tx.aperture) == (0, SMALL.D1)
            assert (res.rx.positions[0], res.rx.aperture) == (0, SMALL.D2)
            assert res.virtual.n_distinct > SMALL.sigma * SMALL.M * SMALL.N
            assert res.k_fine == 10 * SMALL.K

    def test_fixed_point(self, runs):
        grid = AngularGrid(SMALL.K)
        for _, res in runs:
            again = cyclic_design(res.tx, res.rx, SMALL, grid)
            assert (again.tx, again.rx) == (res.tx, res.rx)
            assert again.psl0_db == res.psl0_db
            assert again.outer_iterations == 1

    def test_coordinatewise_optimal(self, runs):
        grid = AngularGrid(SMALL.K)
        for _, res in runs:
            for which, var, fixed, d in (("tx", res.tx, res.rx, SMALL.D1),
                                         ("rx", res.rx, res.tx, SMALL.D2)):
                base = array_psl(var, grid)
                for m in range(1, len(var) - 1):
                    others = var.positions[:m] + var.positions[m + 1:]
                    for c in set(range(d + 1)) - set(others):
                        cand = G(*sorted(others + (c,)))
                        pair = (cand, fixed) if which == "tx" else (fixed, cand)
                        if check_virtual_constraint(*pair, SMALL.sigma, SMALL.M, SMALL.N):
                            assert array_psl(cand, grid) >= base - TOL_DB

    def test_deterministic(self, runs):
        (tx, rx), res = runs[0]
        assert cyclic_design(tx, rx, SMALL) == res

    def test_infeasible_init(self):
        cfg = DesignConfig(M=3, N=3, D1=4, D2=4, sigma=0.9, K=128)
        with pytest.raises(InfeasibleError):
            cyclic_design(G(0, 2, 4), G(0, 2, 4), cfg)

    def test_trivial_pair(self):
        cfg = DesignConfig(M=2, N=2, D1=1, D2=1, sigma=0.7, K=256)
        res = cyclic_design(G(0, 1), G(0, 1), cfg)
        assert res.psl0_db == -math.inf
        assert res.outer_iterations == 1

    def test_json_round_trip(self, runs):
        _, res = runs[0]
        text = json.dumps(res.to_dict(), allow_nan=False)
        assert DesignResult.from_dict(json.loads(text)) == res


class TestMultiStart:
    def test_start_seed(self):
        assert start_seed(42, 0) != start_seed(42, 1)
        assert start_seed(42, 5) == start_seed(42, 5)
        assert 0 <= start_seed(2**70, 3) < 2**64

    def test_single_start_matches_cyclic(self):
        cfg = DesignConfig(**{**SMALL.to_dict(), "n_starts": 1})
        best, records = multi_start_design(cfg, workers=1)
        tx, rx = random_feasible_pair(cfg, np.random.default_rng(start_seed(cfg.seed, 0)))
        assert best == cyclic_design(tx, rx, cfg)
        assert len(records) == 1

    def test_best_beats_every_initial(self):
        best, records = multi_start_design(SMALL, workers=1)
        assert len(records) == SMALL.n_starts
        assert all(best.psl0_db <= r.initial_psl0_db for r in records)
        assert all(r.final_psl0_db <= r.initial_psl0_db for r in records)
        assert best.psl0_db == min(r.final_psl0_db for r in records)

    def test_parallel_equals_sequential(self):
        a = multi_start_design(SMALL, workers=1)
        b = multi_start_design(SMALL, workers=2)
        assert a == b

    def test_all_infeasible(self):
        cfg = DesignConfig(M=4, N=4, D1=9, D2=9, sigma=0.99, K=64, n_starts=2)
        with pytest.raises(InfeasibleError):
            multi_start_design(cfg, workers=1)

    def test_env_worker_cap(self, monkeypatch):
        from sla_forge.optimizer import worker_count
        monkeypatch.setenv("SLA_FORGE_THREADS", "3")
        assert worker_count() == 3
        assert worker_count(2) == 2
