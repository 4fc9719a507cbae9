"""Periodic-grid realization of the multiplier and the probing harness.

Fields are complex samples on the uniform grid over [-L/2, L/2)^d.  The
forward transform approximates fhat(xi) = I f(x) e^{+i(xi,x)} dx by the
trapezoid/DFT rule; the inverse is exact on the grid, so round trips are
machine-precision.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, LevyMultError
from .grids import freq_grid, negate_index, space_axes
from .levy import LevyData, psi
from .symbols import SymbolGrid, symbol_grid_from_values


def _axis_phases(N):
    """Per-axis (-1)^k factors relating the DFT to the centered box."""
    return [(-1.0) ** np.arange(n) for n in N]


def _phase_array(N):
    out = np.ones(N)
    for ax, ph in enumerate(_axis_phases(N)):
        shape = [1] * len(N)
        shape[ax] = N[ax]
        out = out * ph.reshape(shape)
    return out


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples f(x_j) on the uniform periodic grid."""

    d: int
    L: tuple
    N: tuple
    values: np.ndarray

    def __post_init__(self):
        N = tuple(int(v) for v in np.atleast_1d(self.N))
        if len(N) == 1 and self.d > 1:
            N = N * self.d
        L = tuple(float(v) for v in np.atleast_1d(self.L))
        if len(L) == 1 and self.d > 1:
            L = L * self.d
        for n in N:
            if n & (n - 1) or n <= 0:
                raise ValueError(f"grid size {n} is not a power of two")
        vals = np.asarray(self.values, dtype=complex).reshape(N)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "values", vals)

    @property
    def dx(self) -> np.ndarray:
        return np.asarray(self.L) / np.asarray(self.N)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def space_points(self):
        return space_axes(self.L, self.N, self.d)


def field_from_function(fn, L, N, d) -> SampledField:
    axes = space_axes(L, N, d)
    mesh = np.meshgrid(*axes, indexing="ij")
    return SampledField(d=d, L=L, N=N, values=np.asarray(fn(*mesh), dtype=complex))


def gaussian_bump(L, N, d, center=None, width=1.0, phase_freq=None,
                  amplitude=1.0) -> SampledField:
    """exp(-|x-c|^2/(2 w^2) + i (omega, x)); keep the support well inside the box."""
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    omega = np.zeros(d) if phase_freq is None else np.asarray(phase_freq, dtype=float)

    def fn(*mesh):
        q = sum((m - c) ** 2 for m, c in zip(mesh, center))
        ph = sum(w * m for m, w in zip(mesh, omega))
        return amplitude * np.exp(-q / (2.0 * width**2) + 1j * ph)

    return field_from_function(fn, L, N, d)


def transform_forward(f: SampledField) -> np.ndarray:
    """fhat(xi_k) in FFT index order; xi_k = 2 pi k / L."""
    ph = _phase_array(f.N)
    scale = f.cell_volume * float(np.prod(f.N))
    return scale * ph * np.fft.ifftn(f.values)


def transform_inverse(fhat: np.ndarray, L, N, d) -> SampledField:
    N = tuple(int(v) for v in np.atleast_1d(N))
    if len(N) == 1 and d > 1:
        N = N * d
    ph = _phase_array(N)
    vals = np.fft.fftn(ph * np.asarray(fhat, dtype=complex).reshape(N))
    Lt = tuple(float(v) for v in np.atleast_1d(L))
    if len(Lt) == 1 and d > 1:
        Lt = Lt * d
    vals = vals / float(np.prod(Lt))
    return SampledField(d=d, L=Lt, N=N, values=vals)


def values_from_coefficients(coeffs: np.ndarray, L, N, d) -> np.ndarray:
    """Grid samples of (2pi)^{-d} sum_k c_k e^{-i(xi_k, x)} dxi^d.

    coeffs holds the flattened frequency lattice (FFT order) in its last
    axis; leading axes are batch dimensions.  Returns batch + grid shape.
    """
    N = tuple(int(v) for v in np.atleast_1d(N))
    if len(N) == 1 and d > 1:
        N = N * d
    c = np.asarray(coeffs, dtype=complex)
    batch = c.shape[:-1]
    c = c.reshape(batch + N)
    ph = _phase_array(N)
    axes = tuple(range(len(batch), len(batch) + d))
    Lt = np.atleast_1d(np.asarray(L, dtype=float))
    if Lt.size == 1:
        Lt = np.repeat(Lt, d)
    return np.fft.fftn(ph * c, axes=axes) / float(np.prod(Lt))


def _check_compat(a, b):
    if a.d != b.d or tuple(a.N) != tuple(b.N) or not np.allclose(a.L, b.L):
        raise GridMismatch(
            f"incompatible grids: ({a.d}, {a.L}, {a.N}) vs ({b.d}, {b.L}, {b.N})"
        )


def apply_multiplier(m: SymbolGrid, f: SampledField) -> SampledField:
    """Frequency-wise product: the operator M with symbol m applied to f."""
    _check_compat(m, f)
    fhat = transform_forward(f)
    return transform_inverse(m.values * fhat, f.L, f.N, f.d)


@dataclass(frozen=True)
class PairingResult:
    spatial: complex
    spectral: complex

    @property
    def value(self) -> complex:
        return self.spatial


def pairing(m: SymbolGrid, f: SampledField, g: SampledField,
            check: bool = True) -> PairingResult:
    """The bilinear form I (Mf) g dx, evaluated two ways:

    spatially as sum (Mf)(x) g(x) dx^d and spectrally as
    (2pi)^{-d} sum m(xi) fhat(xi) ghat(-xi) dxi^d.  The two agree to
    roundoff by discrete Parseval; disagreement beyond 1e-10 raises.
    """
    _check_compat(m, f)
    _check_compat(m, g)
    mf = apply_multiplier(m, f)
    spatial = complex(np.sum(mf.values * g.values) * f.cell_volume)

    fhat = transform_forward(f).ravel()
    ghat = transform_forward(g).ravel()
    neg = negate_index(f.N)
    dxi = float(np.prod(2.0 * np.pi / np.asarray(f.L)))
    spectral = complex(np.sum(m.flat * fhat * ghat[neg]) * dxi / (2.0 * np.pi) ** f.d)

    if check:
        # floor at the natural bilinear scale so pairings that vanish by
        # parity compare roundoff against roundoff sanely
        norm_scale = float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.cell_volume)
                           * np.sqrt(np.sum(np.abs(g.values) ** 2) * g.cell_volume)
                           * max(m.max_abs, 1.0))
        scale = max(abs(spatial), abs(spectral), 1e-4 * norm_scale, 1e-30)
        if abs(spatial - spectral) > 1e-10 * scale:
            raise LevyMultError(
                f"pairing routes disagree: {spatial} vs {spectral}"
            )
    return PairingResult(spatial=spatial, spectral=spectral)


def lp_norm(f: SampledField, p: float) -> float:
    """Discretized L^p norm (sum |f(x_j)|^p dx^d)^(1/p)."""
    return float((np.sum(np.abs(f.values) ** p) * f.cell_volume) ** (1.0 / p))


def semigroup_eval(f: SampledField, A, data: LevyData, s: float, x):
    """P_s^A f at arbitrary (possibly off-grid) points:

        (2pi)^{-d} sum_k fhat(xi_k) e^{s psi(-A^T xi_k)} e^{-i(xi_k, x)} dxi^d.

    x may be a single d-vector or an (M, d) batch.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    X = np.asarray(x, dtype=float)
    scalar = X.ndim == 1
    X = np.atleast_2d(X)
    fhat = transform_forward(f).ravel()
    Xi = freq_grid(f.L, f.N, f.d)
    expo = np.exp(s * np.atleast_1d(psi(data, -(Xi @ A))))
    dxi = float(np.prod(2.0 * np.pi / np.asarray(f.L)))
    weights = fhat * expo * dxi / (2.0 * np.pi) ** f.d
    vals = np.exp(-1j * (X @ Xi.T)) @ weights
    return complex(vals[0]) if scalar else vals


def semigroup_multiplier(data: LevyData, A, L, N, d, s: float) -> SymbolGrid:
    """The multiplier e^{s psi(-A^T xi)} tabulated on the grid (|.| <= 1)."""
    Xi = freq_grid(L, N, d)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    vals = np.exp(s * np.atleast_1d(psi(data, -(Xi @ A))))
    return symbol_grid_from_values(vals, L, N, d)


# ---------------------------------------------------------------------------
# operator-norm probing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    """Best lower-bound ratio found for ||Mf||_p / ||f||_p versus the bound."""

    p: float
    bound: float
    best_ratio: float
    best_descriptor: str
    trials: int
    seed: int
    passed: bool


def p_star_minus_one(p: float) -> float:
    return max(p - 1.0, 1.0 / (p - 1.0))


def _ratio_from_coeffs(coeffs, m: SymbolGrid, L, N, d, p) -> float:
    f = transform_inverse(coeffs, L, N, d)
    nf = lp_norm(f, p)
    if nf == 0.0:
        return 0.0
    mf = transform_inverse(np.asarray(m.values) * coeffs.reshape(m.values.shape), L, N, d)
    return lp_norm(mf, p) / nf


def _trig_poly_coeffs(rng, N, d):
    shape = tuple(N)
    coeffs = np.zeros(shape, dtype=complex)
    band = rng.integers(2, max(3, min(N) // 8))
    slices = tuple(slice(0, band + 1) for _ in range(d))
    # fill low modes (positive and negative wings) with complex Gaussians
    def fill(sign_slices):
        block = rng.standard_normal(tuple(band + 1 for _ in range(d))) \
            + 1j * rng.standard_normal(tuple(band + 1 for _ in range(d)))
        coeffs[sign_slices] += block
    fill(slices)
    for ax in range(d):
        neg = list(slices)
        neg[ax] = slice(-band - 1, None)
        fill(tuple(neg))
    return coeffs


def _bump_coeffs(rng, L, N, d):
    Lr = np.atleast_1d(np.asarray(L, dtype=float))
    if Lr.size == 1:
        Lr = np.repeat(Lr, d)
    center = rng.uniform(-0.125, 0.125, size=d) * Lr
    width = rng.uniform(0.3, 2.0)
    omega = rng.integers(-8, 9, size=d) * 2.0 * np.pi / Lr
    f = gaussian_bump(Lr, N, d, center=center, width=width, phase_freq=omega)
    return transform_forward(f)


def norm_probe(m: SymbolGrid, p: float, trials: int = 500, seed: int = 0,
               ascent_steps: int = 200) -> ProbeReport:
    """Randomized lower-bound search for the operator norm on L^p.

    Half the trials are random trigonometric polynomials built directly in
    frequency space, half are randomly placed/scaled Gaussian bumps with
    random phase modulation.  The best candidate is then refined by
    coordinate ascent on its frequency coefficients.  This is a
    lower-bound method: it can falsify the bound, never certify it.
    Deterministic for a fixed seed (per-trial counter-based streams).
    """
    L, N, d = m.L, m.N, m.d
    bound = p_star_minus_one(p)
    best = -1.0
    best_coeffs = None
    best_desc = ""
    for t in range(trials):
        rng = np.random.default_rng(np.random.Philox(key=(seed << 16) + t))
        if t % 2 == 0:
            coeffs = _trig_poly_coeffs(rng, N, d)
            desc = f"trig-poly trial={t}"
        else:
            coeffs = _bump_coeffs(rng, L, N, d)
            desc = f"gaussian-bump trial={t}"
        ratio = _ratio_from_coeffs(coeffs, m, L, N, d, p)
        if ratio > best:
            best, best_coeffs, best_desc = ratio, coeffs, desc

    rng = np.random.default_rng(np.random.Philox(key=(seed << 16) + trials + 1))
    coeffs = best_coeffs.copy()
    scale = np.abs(coeffs).max()
    flat = coeffs.ravel()
    live = np.flatnonzero(np.abs(flat) > 1e-12 * scale)
    for _ in range(ascent_steps):
        idx = live[rng.integers(live.size)] if live.size else rng.integers(flat.size)
        old = flat[idx]
        flat[idx] = old + 0.25 * scale * (rng.standard_normal() + 1j * rng.standard_normal())
        ratio = _ratio_from_coeffs(coeffs, m, L, N, d, p)
        if ratio > best:
            best = ratio
            best_desc += "+ascent"
        else:
            flat[idx] = old

    return ProbeReport(
        p=p, bound=bound, best_ratio=best, best_descriptor=best_desc,
        trials=trials, seed=seed, passed=best <= bound * (1.0 + 5e-3),
    )
