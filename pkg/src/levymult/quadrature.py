"""Radial quadrature helpers for heavy-tailed jump densities.

The jump integrands change character at three scales: a power-law
singularity at r = 0, the compensation cutoff at r = 1, and oscillation
e^{icr} at large r.  Panels are therefore laid out geometrically near the
origin, forced to break at r = 1, and capped in width so that no panel
holds more oscillation periods than the node count can resolve.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_rule(edges: np.ndarray, order: int):
    """Gauss-Legendre nodes/weights over consecutive panels given by edges."""
    x, w = _leggauss(order)
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def radial_edges(r_lo: float, r_hi: float, osc_rate: float, order: int,
                 periods_per_panel: float = 4.0) -> np.ndarray:
    """Panel edges on [r_lo, r_hi] for integrands ~ rho(r)*e^{i*osc_rate*r}.

    Geometric doubling from r_lo, a forced edge at r = 1, and a width cap
    of `periods_per_panel` oscillation periods so `order` nodes keep
    several points per period.
    """
    if not (0.0 < r_lo < r_hi):
        raise ValueError("need 0 < r_lo < r_hi")
    max_width = np.inf
    if osc_rate > 0.0:
        max_width = periods_per_panel * 2.0 * np.pi / osc_rate
    edges = [r_lo]
    r = r_lo
    while r < r_hi:
        step = min(r, max_width)  # r -> 2r growth until the width cap bites
        nxt = min(r + step, r_hi)
        if r < 1.0 < nxt:
            nxt = 1.0
        edges.append(nxt)
        r = nxt
    return np.asarray(edges)


def singular_floor(alpha: float, scale: float, tol: float) -> float:
    """Radius below which the compensated stable integrand contributes < tol.

    The integrand behaves like scale * r^(1-alpha) near zero, so the mass
    of (0, delta] is scale * delta^(2-alpha) / (2-alpha).
    """
    if scale <= 0.0:
        return 1e-8
    delta = (tol * (2.0 - alpha) / scale) ** (1.0 / (2.0 - alpha))
    return float(min(max(delta, 1e-300), 0.5))


def stable_tail_exp(c: float, r0: float, alpha: float, coeff: float,
                    terms: int = 10):
    """Asymptotic tail integral(coeff * e^{icr} * r^{-1-alpha}, r0..inf).

    Integration by parts in e^{icr}; valid when |c| * r0 >> 1.  Returns
    (value, error_bound).
    """
    if c == 0.0:
        raise ValueError("oscillation rate must be nonzero for the tail series")
    s = 1.0 + alpha
    ic = 1j * c
    value = 0.0 + 0.0j
    pref = coeff * np.exp(ic * r0)
    fac = 1.0
    for k in range(terms):
        value += -pref * fac * r0 ** (-(s + k)) / ic ** (k + 1)
        fac *= s + k
    bound = abs(coeff) * fac * r0 ** (-(s + terms - 1)) / (
        abs(c) ** terms * (s + terms - 1)
    )
    return value, float(bound)


def stable_tail_const(r0: float, alpha: float, coeff: float) -> float:
    """Exact integral(coeff * r^{-1-alpha}, r0..inf): mass of the far tail."""
    return coeff * r0 ** (-alpha) / alpha
