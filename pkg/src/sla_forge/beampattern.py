"""Beampatterns, DOA-versus-DOD images and array metrics.

All patterns are sampled uniformly in ``u = sin(theta)``. With integer
half-wavelength positions a pattern is 2-periodic in ``u``, so the grid
covers exactly one period and index arithmetic wraps modulo ``K``.
Levels in dB are ``20*log10`` of the normalized magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import ArrayGeometry, VirtualArray, make_virtual

DB_FLOOR = -300.0
HALF_POWER = 1.0 / math.sqrt(2.0)


class PatternError(ValueError):
    """A pattern has no usable mainlobe/sidelobe split."""


def to_db(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(20.0 * np.log10(np.asarray(values, dtype=float)), DB_FLOOR)


@dataclass(frozen=True)
class AngularGrid:
    """``K`` points spaced ``2/K`` in ``u``, with ``u = offset`` at index ``K // 2``.

    ``offset`` lies in ``[0, 2/K)`` and shifts the grid so that an
    off-lattice steering direction can be sampled exactly.
    """

    K: int
    offset: float = 0.0

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("grid needs K >= 2")
        if not 0.0 <= self.offset < 2.0 / self.K:
            raise ValueError("offset must lie in [0, 2/K)")

    @classmethod
    def aligned(cls, K: int, u0: float) -> "AngularGrid":
        """Grid of ``K`` points that contains ``u0``."""
        step = 2.0 / K
        off = u0 - step * math.floor(u0 / step)
        return cls(K, off if off < step else 0.0)

    @cached_property
    def u_values(self) -> np.ndarray:
        u = 2.0 * (np.arange(self.K) - self.K // 2) / self.K + self.offset
        u.setflags(write=False)
        return u

    @property
    def step(self) -> float:
        return 2.0 / self.K

    @property
    def zero_index(self) -> int:
        return self.K // 2

    def index_of(self, u: float) -> int:
        """Nearest grid index to ``u`` (wrapped to one period)."""
        return (int(round((u - self.offset) / self.step)) + self.K // 2) % self.K

    def describe(self) -> dict:
        return {"K": self.K, "domain": "u=sin(theta)", "spacing": self.step,
                "offset": self.offset,
                "u_first": float(self.u_values[0]), "zero_index": self.zero_index}


@dataclass(frozen=True)
class Beampattern1D:
    grid: AngularGrid
    values: np.ndarray
    mainlobe_index: int

    def to_csv(self) -> str:
        lines = ["u,value_db"]
        for u, v in zip(self.grid.u_values, to_db(self.values)):
            lines.append(f"{u:.10g},{v:.10g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Image2D:
    """DOA-versus-DOD image; rows index DOD, columns index DOA."""

    dod_grid: AngularGrid
    doa_grid: AngularGrid
    values: np.ndarray
    peak_index: tuple[int, int] = field(default=(0, 0))

    def to_csv(self, db: bool = True) -> str:
        vals = to_db(self.values) if db else self.values
        ud = self.dod_grid.u_values
        ua = self.doa_grid.u_values
        lines = ["u_dod,u_doa,value"]
        for i, u_t in enumerate(ud):
            lines.extend(f"{u_t:.10g},{u_r:.10g},{v:.10g}"
                         for u_r, v in zip(ua, vals[i]))
        return "\n".join(lines) + "\n"

    def to_dict(self, db: bool = False) -> dict:
        vals = to_db(self.values) if db else self.values
        return {"dod_grid": self.dod_grid.u_values.tolist(),
                "doa_grid": self.doa_grid.u_values.tolist(),
                "values": vals.tolist()}


def steering_vector(geom: ArrayGeometry, u: float) -> np.ndarray:
    if abs(u) > 1.0:
        raise ValueError(f"|u| must not exceed 1, got {u}")
    return np.exp(1j * np.pi * geom.as_array() * u)


def array_factor(positions, u, u0: float = 0.0, weights=None) -> np.ndarray:
    """Normalized magnitude ``|sum_k w_k exp(j*pi*x_k*(u-u0))| / sum_k w_k``."""
    x = np.asarray(positions, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    du = np.asarray(u, dtype=float) - u0
    phase = np.exp(1j * np.pi * np.multiply.outer(du, x))
    return np.abs(phase @ w) / w.sum()


def beampattern_1d(geom: ArrayGeometry, grid: AngularGrid,
                   u0: float = 0.0) -> Beampattern1D:
    if abs(u0) > 1.0:
        raise ValueError(f"|u0| must not exceed 1, got {u0}")
    values = array_factor(geom.positions, grid.u_values, u0)
    return Beampattern1D(grid, values, grid.index_of(u0))


def virtual_beampattern(v: VirtualArray, grid: AngularGrid) -> Beampattern1D:
    values = array_factor(v.positions, grid.u_values, 0.0, v.weights)
    return Beampattern1D(grid, values, grid.zero_index)


def image_2d(tx: ArrayGeometry, rx: ArrayGeometry, u_t0: float, u_r0: float,
             dod_grid: AngularGrid, doa_grid: AngularGrid) -> Image2D:
    # Kronecker form factorizes into an outer product of the 1-D patterns
    pt = beampattern_1d(tx, dod_grid, u_t0)
    pr = beampattern_1d(rx, doa_grid, u_r0)
    return Image2D(dod_grid, doa_grid, np.outer(pt.values, pr.values),
                   (pt.mainlobe_index, pr.mainlobe_index))


def _first_rise(seq: np.ndarray) -> np.ndarray:
    rising = np.diff(seq, axis=1) > 0
    idx = rising.argmax(axis=1)
    idx[~rising.any(axis=1)] = -1
    return idx


def sidelobe_masks(rows: np.ndarray, peak: int) -> tuple[np.ndarray, np.ndarray]:
    """Sidelobe masks for a batch of sampled patterns sharing a peak index.

    The mainlobe runs from ``peak`` outward (wrapping) to the first sample
    after which the pattern rises, on each side. Returns ``(mask, ok)``:
    ``mask[c, i]`` marks sidelobe samples of row ``c`` in grid order and
    ``ok[c]`` is False when a row has no local minimum at all.
    """
    rows = np.atleast_2d(rows)
    K = rows.shape[1]
    offs = np.arange(K)
    right = _first_rise(rows[:, (peak + offs) % K])
    left = _first_rise(rows[:, (peak - offs) % K])
    ok = (right >= 0) & (left >= 0)
    in_side = (offs[None, :] > right[:, None]) & (offs[None, :] < K - left[:, None])
    in_side &= ok[:, None]
    mask = np.empty_like(in_side)
    mask[:, (peak + offs) % K] = in_side
    return mask, ok


def peak_sidelobes(rows: np.ndarray, peak: int) -> np.ndarray:
    """Linear peak sidelobe level per row; 0 for an empty region, NaN if no minimum."""
    mask, ok = sidelobe_masks(rows, peak)
    out = np.where(mask, rows, -np.inf).max(axis=1)
    out[np.isneginf(out)] = 0.0
    out[~ok] = np.nan
    return out


def sidelobe_region(bp: Beampattern1D) -> np.ndarray:
    mask, ok = sidelobe_masks(bp.values, bp.mainlobe_index)
    if not ok[0]:
        raise PatternError("pattern has no local minimum; mainlobe is unbounded")
    return np.flatnonzero(mask[0])


def psl_1d(bp: Beampattern1D) -> float:
    region = sidelobe_region(bp)
    if region.size == 0:
        raise PatternError("sidelobe region is empty")
    return float(to_db(bp.values[region].max()))


def psl_2d(img: Image2D) -> float:
    i0, j0 = img.peak_index
    peak = img.values[i0, j0]
    m_t, ok_t = sidelobe_masks(img.values[:, j0] / peak, i0)
    m_r, ok_r = sidelobe_masks(img.values[i0, :] / peak, j0)
    if not (ok_t[0] and ok_r[0]):
        raise PatternError("image axis has no local minimum")
    region = m_t[0][:, None] | m_r[0][None, :]
    if not region.any():
        raise PatternError("2-D sidelobe region is empty")
    return float(to_db(img.values[region].max()))


def directivity_factor(v: VirtualArray) -> float:
    w = np.asarray(v.weights, dtype=float)
    return float(10.0 * np.log10(w.sum() ** 2 / np.sum(w * w)))


def df_loss(v: VirtualArray) -> float:
    """Loss against the all-distinct maximum ``10*log10(M*N)``."""
    return 10.0 * math.log10(v.n_total) - directivity_factor(v)


def df_loss_bound(sigma: float, mn: int) -> float:
    """Upper bound on DF loss in dB when ``L > sigma*mn``."""
    if not 0.0 < sigma <= 1.0 or mn < 1:
        raise ValueError("need 0 < sigma <= 1 and mn >= 1")
    return 10.0 * math.log10(sigma + (1.0 - sigma) ** 2 * mn)


def worst_case_df_loss(n_distinct: int, mn: int) -> float:
    """Largest DF loss any weight vector with ``n_distinct`` entries summing to ``mn`` can have.

    Attained by ``n_distinct - 1`` unit weights and one weight of
    ``mn - n_distinct + 1``.
    """
    if not 1 <= n_distinct <= mn:
        raise ValueError("need 1 <= n_distinct <= mn")
    heavy = mn - n_distinct + 1
    return 10.0 * math.log10((n_distinct - 1 + heavy * heavy) / mn)


def resolution_from_aperture(d: float) -> float:
    """Approximate angular resolution (degrees) of an aperture of ``d`` half-wavelengths."""
    if d <= 0:
        raise ValueError("aperture must be positive")
    arg = 2.8 / (math.pi * d)
    if arg > 1.0:
        raise ValueError(f"aperture {d} too small for the resolution formula")
    return math.degrees(2.0 * math.asin(arg))


def min_aperture_for_resolution(delta_deg: float) -> int:
    """Smallest integer aperture ``D > 5.6 / (pi * sin(delta))``.

    Slightly conservative compared with inverting
    :func:`resolution_from_aperture`.
    """
    if not 0.0 < delta_deg < 180.0:
        raise ValueError("delta must lie in (0, 180) degrees")
    return math.floor(5.6 / (math.pi * math.sin(math.radians(delta_deg)))) + 1


def _half_power_crossing(values, peak, step, direction):
    K = len(values)
    prev = values[peak]
    for k in range(1, K // 2 + 1):
        cur = values[(peak + direction * k) % K]
        if cur <= HALF_POWER:
            frac = (prev - HALF_POWER) / (prev - cur)
            return (k - 1 + frac) * step
        prev = cur
    raise PatternError("pattern never drops below the half-power level")


def measure_beamwidth_3db(bp: Beampattern1D) -> float:
    """Half-power mainlobe width in degrees, interpolating linearly in ``u``."""
    u0 = bp.grid.u_values[bp.mainlobe_index]
    step = bp.grid.step
    hi = min(u0 + _half_power_crossing(bp.values, bp.mainlobe_index, step, +1), 1.0)
    lo = max(u0 - _half_power_crossing(bp.values, bp.mainlobe_index, step, -1), -1.0)
    return math.degrees(math.asin(hi) - math.asin(lo))


@dataclass(frozen=True)
class MetricsReport:
    psl_db: float
    psl_t_db: float
    psl_r_db: float
    df_db: float
    df_loss_db: float
    delta_t_deg: float
    delta_r_deg: float
    beamwidth_t_deg: float
    beamwidth_r_deg: float
    n_distinct: int
    K: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _psl_or_none(bp: Beampattern1D) -> float:
    try:
        return psl_1d(bp)
    except PatternError:
        return -math.inf


def evaluate_pair(tx: ArrayGeometry, rx: ArrayGeometry, K: int = 10_000) -> MetricsReport:
    """All imaging and virtual-array metrics of a transmit/receive pair.

    The 2-D PSL uses the identity PSL_2d = max(PSL_t, PSL_r) so the
    ``K x K`` image is never formed. An empty sidelobe region gives ``-inf``.
    """
    grid = AngularGrid(K)
    bt = beampattern_1d(tx, grid)
    br = beampattern_1d(rx, grid)
    v = make_virtual(tx, rx)
    psl_t, psl_r = _psl_or_none(bt), _psl_or_none(br)
    return MetricsReport(
        psl_db=max(psl_t, psl_r), psl_t_db=psl_t, psl_r_db=psl_r,
        df_db=directivity_factor(v), df_loss_db=df_loss(v),
        delta_t_deg=resolution_from_aperture(tx.aperture),
        delta_r_deg=resolution_from_aperture(rx.aperture),
        beamwidth_t_deg=measure_beamwidth_3db(bt),
        beamwidth_r_deg=measure_beamwidth_3db(br),
        n_distinct=v.n_distinct, K=K)
