"""Cyclic coordinate-descent design of sparse transmit/receive arrays.

Each sweep moves one interior element at a time to the lattice site that
minimizes its own array's peak sidelobe level, subject to the virtual
uniqueness constraint ``L > sigma*M*N`` against the other (fixed) array.
Sweeps alternate transmit then receive until a full pass moves nothing.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .beampattern import (AngularGrid, PatternError, beampattern_1d,
                          df_loss, directivity_factor, peak_sidelobes, psl_1d,
                          resolution_from_aperture)
from .geometry import (ArrayGeometry, DesignConfig, InfeasibleError,
                       VirtualArray, check_virtual_constraint, make_virtual,
                       random_feasible_pair)

log = logging.getLogger(__name__)

TOL_DB = 1e-9
FINE_FACTOR = 10
THREADS_ENV = "SLA_FORGE_THREADS"
_MASK64 = (1 << 64) - 1


def array_psl(geom: ArrayGeometry, grid: AngularGrid) -> float:
    """PSL in dB of an array steered to broadside; ``-inf`` if it has no sidelobes."""
    try:
        return psl_1d(beampattern_1d(geom, grid))
    except PatternError:
        return -math.inf


@lru_cache(maxsize=32)
def _phase_table(aperture: int, grid: AngularGrid) -> np.ndarray:
    # row p holds exp(j*pi*p*u) over the grid
    return np.exp(1j * np.pi * np.multiply.outer(np.arange(aperture + 1), grid.u_values))


def _candidate_psl_db(rows: np.ndarray, peak: int) -> np.ndarray:
    lin = peak_sidelobes(rows, peak)
    with np.errstate(divide="ignore"):
        out = 20.0 * np.log10(lin)
    out[np.isnan(out)] = np.inf
    return out


def coordinate_sweep(variable: ArrayGeometry, fixed: ArrayGeometry, which: str,
                     config: DesignConfig, grid: AngularGrid
                     ) -> tuple[ArrayGeometry, float]:
    """One Gauss-Seidel pass over the interior elements of ``variable``.

    ``which`` is ``"tx"`` or ``"rx"`` and selects the aperture from
    ``config``. Every free lattice site is scored for each element; the
    element moves to the lowest-PSL feasible site only if that beats its
    current site by more than ``TOL_DB``. Ties go to the smallest position.
    """
    if which not in ("tx", "rx"):
        raise ValueError("which must be 'tx' or 'rx'")
    aperture = config.D1 if which == "tx" else config.D2
    if variable.aperture != aperture:
        raise ValueError(f"{which} aperture {variable.aperture} != configured {aperture}")
    mn = config.M * config.N
    if not check_virtual_constraint(variable, fixed, config.sigma, config.M, config.N):
        raise InfeasibleError(f"{which} sweep started from an infeasible pair")

    table = _phase_table(aperture, grid)
    fx = fixed.as_array()
    l_min = math.floor(config.sigma * mn) + 1
    peak = grid.zero_index
    pos = list(variable.positions)
    n = len(pos)
    sites = np.arange(aperture + 1)

    for m in range(1, n - 1):
        others = np.array(pos[:m] + pos[m + 1:])
        hist = np.bincount((others[:, None] + fx[None, :]).ravel(),
                           minlength=aperture + fx[-1] + 1)
        l_base = np.count_nonzero(hist)
        cand = np.setdiff1d(sites, others)
        n_distinct = l_base + (hist[cand[:, None] + fx[None, :]] == 0).sum(axis=1)
        cand = cand[n_distinct >= l_min]
        if cand.size == 0:
            raise InfeasibleError(f"{which} element {m}: no feasible position")
        base = table[others].sum(axis=0)
        rows = np.abs(base[None, :] + table[cand]) / n
        scores = _candidate_psl_db(rows, peak)
        current = scores[np.searchsorted(cand, pos[m])]
        best = int(np.argmin(scores))
        if scores[best] < current - TOL_DB:
            # slots keep element identity within the pass; sorted at the end
            pos[m] = int(cand[best])
    geom = ArrayGeometry(tuple(sorted(pos)))
    return geom, array_psl(geom, grid)


@dataclass(frozen=True)
class DesignResult:
    tx: ArrayGeometry
    rx: ArrayGeometry
    virtual: VirtualArray
    psl_t_db: float
    psl_r_db: float
    psl0_db: float
    psl_init_db: float
    psl_t_fine_db: float
    psl_r_fine_db: float
    psl0_fine_db: float
    df_db: float
    df_loss_db: float
    delta_t_deg: float
    delta_r_deg: float
    outer_iterations: int
    K: int
    k_fine: int
    start_index: int = 0
    psl_trace: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if isinstance(val, (ArrayGeometry, VirtualArray)):
                out[f.name] = val.to_dict()
            elif isinstance(val, tuple):
                out[f.name] = [_json_float(x) for x in val]
            elif isinstance(val, float):
                out[f.name] = _json_float(val)
            else:
                out[f.name] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DesignResult":
        kw = dict(data)
        kw["tx"] = ArrayGeometry.from_dict(data["tx"])
        kw["rx"] = ArrayGeometry.from_dict(data["rx"])
        kw["virtual"] = VirtualArray.from_dict(data["virtual"])
        kw["psl_trace"] = tuple(_from_json_float(x) for x in data["psl_trace"])
        for f in dataclasses.fields(cls):
            if f.type == "float":
                kw[f.name] = _from_json_float(data[f.name])
        return cls(**kw)


def _json_float(x: float):
    # JSON has no infinities; an empty sidelobe region is stored as null
    return float(x) if math.isfinite(x) else None


def _from_json_float(x):
    return -math.inf if x is None else float(x)


def summarize(tx: ArrayGeometry, rx: ArrayGeometry, config: DesignConfig,
              grid: AngularGrid, **extra) -> DesignResult:
    fine = AngularGrid(grid.K * FINE_FACTOR)
    v = make_virtual(tx, rx)
    psl_t, psl_r = array_psl(tx, grid), array_psl(rx, grid)
    psl_tf, psl_rf = array_psl(tx, fine), array_psl(rx, fine)
    extra.setdefault("psl_init_db", max(psl_t, psl_r))
    extra.setdefault("outer_iterations", 0)
    return DesignResult(
        tx=tx, rx=rx, virtual=v,
        psl_t_db=psl_t, psl_r_db=psl_r, psl0_db=max(psl_t, psl_r),
        psl_t_fine_db=psl_tf, psl_r_fine_db=psl_rf, psl0_fine_db=max(psl_tf, psl_rf),
        df_db=directivity_factor(v), df_loss_db=df_loss(v),
        delta_t_deg=resolution_from_aperture(tx.aperture),
        delta_r_deg=resolution_from_aperture(rx.aperture),
        K=grid.K, k_fine=fine.K, **extra)


def cyclic_design(init_tx: ArrayGeometry, init_rx: ArrayGeometry,
                  config: DesignConfig, grid: AngularGrid | None = None,
                  start_index: int = 0) -> DesignResult:
    """Alternate transmit and receive sweeps until a full pass changes nothing.

    The returned pair is coordinate-wise optimal: no single interior move
    lowers its array's PSL by more than ``TOL_DB`` without breaking the
    virtual-uniqueness constraint.
    """
    grid = AngularGrid(config.K) if grid is None else grid
    if not check_virtual_constraint(init_tx, init_rx, config.sigma, config.M, config.N):
        raise InfeasibleError("initial pair violates L > sigma*M*N")
    tx, rx = init_tx, init_rx
    psl0 = max(array_psl(tx, grid), array_psl(rx, grid))
    trace = [psl0]
    iterations = 0
    while True:
        iterations += 1
        new_tx, psl_t = coordinate_sweep(tx, rx, "tx", config, grid)
        new_rx, psl_r = coordinate_sweep(rx, new_tx, "rx", config, grid)
        trace.append(max(psl_t, psl_r))
        moved = new_tx != tx or new_rx != rx
        tx, rx = new_tx, new_rx
        if not moved:
            break
    return summarize(tx, rx, config, grid, psl_init_db=psl0,
                     outer_iterations=iterations, start_index=start_index,
                     psl_trace=tuple(trace))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def start_seed(seed: int, index: int) -> int:
    """Seed for start ``index``: ``seed XOR splitmix64(index)`` (64-bit)."""
    return (seed & _MASK64) ^ _splitmix64(index)


@dataclass(frozen=True)
class StartRecord:
    start_index: int
    initial_psl0_db: float
    final_psl0_db: float
    outer_iterations: int


def _run_start(config: DesignConfig, index: int) -> DesignResult | None:
    rng = np.random.default_rng(start_seed(config.seed, index))
    try:
        tx, rx = random_feasible_pair(config, rng)
    except InfeasibleError:
        return None
    return cyclic_design(tx, rx, config, AngularGrid(config.K), start_index=index)


def _run_chunk(config: DesignConfig, indices: list[int]) -> list[DesignResult | None]:
    return [_run_start(config, i) for i in indices]


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, workers)


def multi_start_design(config: DesignConfig, workers: int | None = None
                       ) -> tuple[DesignResult, list[StartRecord]]:
    """Run ``config.n_starts`` seeded starts and keep the lowest final PSL.

    Start ``i`` draws its initial pair from ``start_seed(config.seed, i)``,
    so results do not depend on how starts are scheduled. Equal PSLs are
    resolved in favour of the lower start index.
    """
    workers = min(worker_count(workers), config.n_starts)
    indices = list(range(config.n_starts))
    if workers == 1:
        results = _run_chunk(config, indices)
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * workers, chunks))
        results = [None] * config.n_starts
        for chunk, part in zip(chunks, parts):
            for i, res in zip(chunk, part):
                results[i] = res

    best = None
    records = []
    for res in results:
        if res is None:
            continue
        records.append(StartRecord(res.start_index, res.psl_init_db,
                                   res.psl0_db, res.outer_iterations))
        if best is None or res.psl0_db < best.psl0_db:
            best = res
    if best is None:
        raise InfeasibleError("every start was infeasible")
    log.info("best of %d starts: start %d, PSL %.3f dB",
             len(records), best.start_index, best.psl0_db)
    return best, records
