"""Independent reference computations used to freeze expected values.

Run ``python tests/oracles.py`` to reprint them. Nothing here imports the
pattern code under test except the geometry containers.
"""

import math

import numpy as np
from scipy.optimize import brentq


def dirichlet(n, u):
    """Closed-form normalized ``n``-element ULA pattern."""
    u = np.asarray(u, dtype=float)
    return np.abs(np.sin(n * np.pi * u / 2) / (n * np.sin(np.pi * u / 2)))


def ula_psl_db(n, samples=2_000_001):
    # everything beyond the first null at u = 2/n is sidelobe
    u = np.linspace(2.0 / n + 1e-9, 1.0, samples)
    return 20 * math.log10(dirichlet(n, u).max())


def ula_beamwidth_deg(n):
    root = brentq(lambda u: dirichlet(n, u) - 1 / math.sqrt(2), 1e-9, 1.5 / n)
    return 2 * math.degrees(math.asin(root))


def kronecker_image(tx, rx, u_t, u_r, u_t0, u_r0):
    """Image evaluated literally as ``|(a_t (x) a_r)^H (a_t0 (x) a_r0)| / MN``."""
    xt = np.asarray(tx, dtype=float)
    xr = np.asarray(rx, dtype=float)
    at = np.exp(1j * np.pi * np.multiply.outer(u_t, xt))
    ar = np.exp(1j * np.pi * np.multiply.outer(u_r, xr))
    ref = np.kron(np.exp(1j * np.pi * xt * u_t0), np.exp(1j * np.pi * xr * u_r0))
    out = np.empty((len(u_t), len(u_r)))
    for i in range(len(u_t)):
        steer = (at[i][:, None] * ar[:, None, :]).reshape(len(u_r), -1)
        out[i] = np.abs(steer.conj() @ ref)
    return out / (len(xt) * len(xr))


if __name__ == "__main__":
    for n in (10, 100):
        print(f"ULA{n} PSL dB", ula_psl_db(n))
    for n in (10, 61):
        print(f"ULA{n} 3-dB width deg", ula_beamwidth_deg(n))
