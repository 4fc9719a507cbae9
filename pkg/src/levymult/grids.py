"""Shared periodic-grid layout.

Space grid: x_j = -L/2 + j L/N, j = 0..N-1 per axis.
Frequency grid: xi_k = 2 pi k / L with k in [-N/2, N/2), stored in numpy
FFT index order.  The transform pair used everywhere is

    fhat(xi) = I f(x) e^{+i(xi,x)} dx,    f(x) = (2pi)^{-d} I fhat e^{-i(xi,x)} dxi.
"""

import numpy as np


def _per_axis(value, d):
    arr = np.asarray(value, dtype=float).ravel()
    if arr.size == 1:
        arr = np.repeat(arr, d)
    if arr.size != d:
        raise ValueError(f"expected {d} per-axis values, got {arr.size}")
    return arr


def space_axes(L, N, d):
    L = _per_axis(L, d)
    N = np.asarray(N).ravel().astype(int)
    if N.size == 1:
        N = np.repeat(N, d)
    return [(-L[i] / 2.0 + L[i] / N[i] * np.arange(N[i])) for i in range(d)]


def freq_axes(L, N, d):
    """Per-axis frequencies 2 pi k / L in FFT index order."""
    L = _per_axis(L, d)
    N = np.asarray(N).ravel().astype(int)
    if N.size == 1:
        N = np.repeat(N, d)
    return [2.0 * np.pi * np.fft.fftfreq(N[i], d=L[i] / N[i]) for i in range(d)]


def freq_grid(L, N, d) -> np.ndarray:
    """All frequency vectors as a (prod(N), d) array, row-major in FFT order."""
    axes = freq_axes(L, N, d)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def negate_index(shape):
    """Flat index permutation mapping frequency index k to -k (mod N per axis)."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    for ax in range(len(shape)):
        idx = np.flip(np.roll(idx, -1, axis=ax), axis=ax)
    return idx.ravel()


def sorted_order(shape):
    """Flat permutation putting FFT-ordered frequencies into ascending order."""
    perm = np.arange(int(np.prod(shape))).reshape(shape)
    for ax, n in enumerate(shape):
        perm = np.take(perm, np.fft.fftshift(np.arange(n)), axis=ax)
    return perm.ravel()
