"""Integer-lattice array geometries and MIMO virtual arrays.

Element positions are integers in units of half a wavelength. Design-time
arrays always start at 0 and end at their declared aperture.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_INIT_ATTEMPTS = 10_000


class GeometryError(ValueError):
    """Invalid element positions."""


class InfeasibleError(RuntimeError):
    """No geometry satisfies the virtual-uniqueness constraint."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Sorted, distinct, non-negative integer element positions starting at 0."""

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if not pos:
            raise GeometryError("geometry needs at least one element")
        if pos[0] != 0:
            raise GeometryError(f"first element must be at 0, got {pos[0]}")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise GeometryError(f"positions must be strictly increasing: {pos}")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def aperture(self) -> int:
        return self.positions[-1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    def reversed(self) -> "ArrayGeometry":
        d = self.aperture
        return ArrayGeometry(tuple(sorted(d - p for p in self.positions)))

    def to_dict(self) -> dict:
        return {"positions": list(self.positions)}

    def to_text(self) -> str:
        return " ".join(str(p) for p in self.positions)

    @classmethod
    def from_dict(cls, data: dict) -> "ArrayGeometry":
        return cls(tuple(data["positions"]))

    @classmethod
    def from_text(cls, text: str) -> "ArrayGeometry":
        text = text.strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        try:
            return cls(tuple(int(tok) for tok in text.split()))
        except ValueError as exc:
            raise GeometryError(f"cannot parse geometry line {text!r}") from exc


@dataclass(frozen=True)
class VirtualArray:
    """Distinct sumset positions with their multiplicities."""

    positions: tuple[int, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.positions) != len(self.weights):
            raise GeometryError("positions and weights differ in length")
        if any(w <= 0 for w in self.weights):
            raise GeometryError("weights must be positive")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise GeometryError("virtual positions must be strictly increasing")

    @property
    def n_distinct(self) -> int:
        return len(self.positions)

    @property
    def n_total(self) -> int:
        return int(sum(self.weights))

    def to_dict(self) -> dict:
        return {"positions": list(self.positions), "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "VirtualArray":
        return cls(tuple(int(p) for p in data["positions"]),
                   tuple(int(w) for w in data["weights"]))


@dataclass(frozen=True)
class DesignConfig:
    """Parameters of one design problem.

    Parameters
    ----------
    M, N : int
        Transmit and receive element counts.
    D1, D2 : int
        Transmit and receive apertures in half-wavelengths.
    sigma : float
        Required fraction of distinct virtual elements, ``L > sigma*M*N``.
    K : int
        Grid points per angular axis used during optimization.
    n_starts : int
        Number of random initializations.
    seed : int
        Master seed for the multi-start run.
    """

    M: int = 10
    N: int = 10
    D1: int = 60
    D2: int = 60
    sigma: float = 0.7
    K: int = 1000
    n_starts: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ValueError("M and N must be at least 2")
        if self.D1 < self.M - 1 or self.D2 < self.N - 1:
            raise ValueError("aperture too small to hold distinct elements")
        if not 0.0 < self.sigma <= 1.0:
            raise ValueError("sigma must lie in (0, 1]")
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")

    @property
    def min_distinct(self) -> int:
        """Smallest L with ``L > sigma*M*N``."""
        return min_distinct_virtual(self.sigma, self.M * self.N)

    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "D1": self.D1, "D2": self.D2,
                "sigma": self.sigma, "K": self.K, "n_starts": self.n_starts,
                "seed": self.seed}


def min_distinct_virtual(sigma: float, mn: int) -> int:
    # strict inequality; exact for integer sigma*mn as well
    return math.floor(sigma * mn) + 1


def sum_histogram(tx: Sequence[int], rx: Sequence[int]) -> np.ndarray:
    t = np.asarray(tx, dtype=np.int64)
    r = np.asarray(rx, dtype=np.int64)
    return np.bincount((t[:, None] + r[None, :]).ravel())


def make_virtual(tx: ArrayGeometry, rx: ArrayGeometry) -> VirtualArray:
    """Collapse the sumset ``{tx} + {rx}`` to distinct positions and weights."""
    hist = sum_histogram(tx.positions, rx.positions)
    pos = np.flatnonzero(hist)
    return VirtualArray(tuple(int(p) for p in pos),
                        tuple(int(w) for w in hist[pos]))


def n_distinct_virtual(tx: ArrayGeometry, rx: ArrayGeometry) -> int:
    return int(np.count_nonzero(sum_histogram(tx.positions, rx.positions)))


def check_virtual_constraint(tx: ArrayGeometry, rx: ArrayGeometry,
                             sigma: float, M: int | None = None,
                             N: int | None = None) -> bool:
    M = len(tx) if M is None else M
    N = len(rx) if N is None else N
    return n_distinct_virtual(tx, rx) >= min_distinct_virtual(sigma, M * N)


def _random_array(n: int, aperture: int, rng: np.random.Generator) -> ArrayGeometry:
    if n == 1:
        return ArrayGeometry((0,))
    interior = rng.choice(np.arange(1, aperture), size=n - 2, replace=False)
    return ArrayGeometry((0, *sorted(int(x) for x in interior), aperture))


def random_feasible_pair(config: DesignConfig, rng: np.random.Generator,
                         max_attempts: int = MAX_INIT_ATTEMPTS
                         ) -> tuple[ArrayGeometry, ArrayGeometry]:
    """Draw endpoint-fixed transmit/receive arrays satisfying ``L > sigma*M*N``.

    Interior positions are drawn uniformly without replacement; the pair is
    redrawn until the virtual-uniqueness constraint holds.
    """
    for _ in range(max_attempts):
        tx = _random_array(config.M, config.D1, rng)
        rx = _random_array(config.N, config.D2, rng)
        if check_virtual_constraint(tx, rx, config.sigma, config.M, config.N):
            return tx, rx
    raise InfeasibleError(
        f"no feasible pair in {max_attempts} draws; sigma={config.sigma} is "
        f"likely too large for M={config.M}, N={config.N}, "
        f"D1={config.D1}, D2={config.D2}")


def ula(n: int, step: int = 1) -> ArrayGeometry:
    if n < 1 or step < 1:
        raise GeometryError("ula needs n >= 1 and step >= 1")
    return ArrayGeometry(tuple(range(0, n * step, step)))


def nested(n_inner: int, n_outer: int) -> ArrayGeometry:
    """Two-level nested array.

    Inner ULA ``{0, ..., n_inner-1}`` followed by outer elements at
    ``(n_inner+1)*k - 1`` for ``k = 1..n_outer``.
    """
    if n_inner < 1 or n_outer < 1:
        raise GeometryError("nested needs n_inner >= 1 and n_outer >= 1")
    inner = list(range(n_inner))
    outer = [(n_inner + 1) * k - 1 for k in range(1, n_outer + 1)]
    return ArrayGeometry(tuple(sorted(set(inner + outer))))


# Restricted minimum-redundancy linear arrays (full lag coverage 0..D with
# the minimum known aperture). Sources: A. T. Moffet, "Minimum-redundancy
# linear arrays", IEEE Trans. Antennas Propag. 16(2), 1968. Lag coverage
# and minimality (n <= 8) are checked in tests/test_geometry.py.
MRA_TABLE: dict[int, tuple[int, ...]] = {
    2: (0, 1),
    3: (0, 1, 3),
    4: (0, 1, 4, 6),
    5: (0, 1, 4, 7, 9),
    6: (0, 1, 6, 9, 11, 13),
    7: (0, 1, 4, 10, 12, 15, 17),
    8: (0, 1, 4, 10, 16, 18, 21, 23),
    9: (0, 1, 4, 10, 16, 22, 24, 27, 29),
    10: (0, 1, 3, 6, 13, 20, 27, 31, 35, 36),
}


def mra(n: int) -> ArrayGeometry:
    try:
        return ArrayGeometry(MRA_TABLE[n])
    except KeyError:
        raise GeometryError(
            f"no minimum-redundancy array shipped for n={n}; "
            f"supported: {sorted(MRA_TABLE)}") from None
