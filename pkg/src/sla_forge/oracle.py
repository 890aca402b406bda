"""Brute-force references for small design instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .beampattern import AngularGrid
from .geometry import ArrayGeometry, DesignConfig, sum_histogram
from .optimizer import array_psl

ENUMERATION_CAP = 10**7
DB_SLACK = 1e-12


class CapExceededError(ValueError):
    pass


@dataclass(frozen=True)
class EnumerationReport:
    global_psl_db: float
    argmin_pairs: tuple[tuple[ArrayGeometry, ArrayGeometry], ...]
    n_feasible: int
    n_enumerated: int

    def to_dict(self) -> dict:
        return {
            "global_psl_db": self.global_psl_db,
            "argmin_pairs": [{"tx": t.to_dict(), "rx": r.to_dict()}
                             for t, r in self.argmin_pairs],
            "n_feasible": self.n_feasible,
            "n_enumerated": self.n_enumerated,
        }


def enumerate_arrays(n: int, aperture: int):
    """All endpoint-fixed arrays, interiors in lexicographic order."""
    for interior in itertools.combinations(range(1, aperture), n - 2):
        yield ArrayGeometry((0, *interior, aperture))


def exhaustive_search(config: DesignConfig, grid: AngularGrid | None = None,
                      cap: int = ENUMERATION_CAP) -> EnumerationReport:
    """Exact global minimum of ``max(PSL_t, PSL_r)`` over all feasible pairs.

    Pairs within ``DB_SLACK`` of the minimum are all reported as minimizers.
    """
    count = (math.comb(config.D1 - 1, config.M - 2)
             * math.comb(config.D2 - 1, config.N - 2))
    if count > cap:
        raise CapExceededError(f"{count} pairs exceed the enumeration cap {cap}")
    grid = AngularGrid(config.K) if grid is None else grid
    txs = list(enumerate_arrays(config.M, config.D1))
    rxs = list(enumerate_arrays(config.N, config.D2))
    psl_t = [array_psl(t, grid) for t in txs]
    psl_r = [array_psl(r, grid) for r in rxs]
    l_min = math.floor(config.sigma * config.M * config.N) + 1

    scores = []
    for (i, t), (j, r) in itertools.product(enumerate(txs), enumerate(rxs)):
        if np.count_nonzero(sum_histogram(t.positions, r.positions)) >= l_min:
            scores.append((max(psl_t[i], psl_r[j]), i, j))
    if not scores:
        raise ValueError("no feasible pair exists for this configuration")
    best = min(s for s, _, _ in scores)
    argmin = tuple((txs[i], rxs[j]) for s, i, j in scores if s <= best + DB_SLACK)
    return EnumerationReport(best, argmin, len(scores), count)


def psl_dense_scan(geom: ArrayGeometry, k_fine: int, K: int | None = None) -> float:
    """PSL on a ``k_fine``-point grid, used to bound the error of a coarser grid ``K``."""
    if K is not None and k_fine < 10 * K:
        raise ValueError("k_fine must be at least 10x the design grid")
    return array_psl(geom, AngularGrid(k_fine))
