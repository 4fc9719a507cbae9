"""Serialization of symbol grids and sampled fields.

Binary layout (little-endian), magic 8 bytes then header then payload:

    magic   b"LMGRID1\\0" for symbol grids, b"LMFIELD1" for fields
    d       uint64
    N       d x uint64    points per axis
    L       d x float64   box length per axis
    payload 2 * prod(N) float64, interleaved re/im

Symbol-grid rows run in row-major order over ascending frequencies
(k = -N/2 .. N/2-1 per axis); field rows run in row-major space order.
CSV files carry the coordinates plus re/im columns with 17 significant
digits, in the same row order, so identical inputs give byte-identical
files.
"""

import struct

import numpy as np

from .errors import ParseError
from .grids import freq_grid, sorted_order, space_axes
from .spectral import SampledField
from .symbols import SymbolGrid, symbol_grid_from_values

GRID_MAGIC = b"LMGRID1\x00"
FIELD_MAGIC = b"LMFIELD1"

_FMT = "%.17g"


def _write_binary(path, magic, d, N, L, flat_complex):
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<Q", d))
        fh.write(np.asarray(N, dtype="<u8").tobytes())
        fh.write(np.asarray(L, dtype="<f8").tobytes())
        inter = np.empty(2 * flat_complex.size)
        inter[0::2] = flat_complex.real
        inter[1::2] = flat_complex.imag
        fh.write(inter.astype("<f8").tobytes())


def _read_binary(path, magic):
    with open(path, "rb") as fh:
        got = fh.read(8)
        if got != magic:
            raise ParseError(f"bad magic {got!r}, expected {magic!r}")
        d = struct.unpack("<Q", fh.read(8))[0]
        N = np.frombuffer(fh.read(8 * d), dtype="<u8").astype(int)
        L = np.frombuffer(fh.read(8 * d), dtype="<f8").copy()
        raw = np.frombuffer(fh.read(), dtype="<f8")
    count = 2 * int(np.prod(N))
    if raw.size != count:
        raise ParseError(f"payload holds {raw.size} floats, expected {count}")
    return int(d), N, L, raw[0::2] + 1j * raw[1::2]


def write_symbol_grid(path, grid: SymbolGrid):
    order = sorted_order(grid.N)
    _write_binary(path, GRID_MAGIC, grid.d, grid.N, grid.L, grid.flat[order])


def read_symbol_grid(path) -> SymbolGrid:
    d, N, L, flat = _read_binary(path, GRID_MAGIC)
    values = np.empty(flat.size, dtype=complex)
    values[sorted_order(tuple(N))] = flat
    return symbol_grid_from_values(values, L, tuple(N), d, check_bound=False)


def write_field(path, field: SampledField):
    _write_binary(path, FIELD_MAGIC, field.d, field.N, field.L, field.values.ravel())


def read_field(path) -> SampledField:
    d, N, L, flat = _read_binary(path, FIELD_MAGIC)
    return SampledField(d=d, L=tuple(L), N=tuple(N), values=flat.reshape(tuple(N)))


def symbol_grid_csv(grid: SymbolGrid) -> str:
    order = sorted_order(grid.N)
    xi = freq_grid(grid.L, grid.N, grid.d)[order]
    vals = grid.flat[order]
    header = ",".join(f"xi_{i + 1}" for i in range(grid.d)) + ",re_m,im_m"
    lines = [header]
    for row, v in zip(xi, vals):
        coords = ",".join(_FMT % c for c in row)
        lines.append(f"{coords},{_FMT % v.real},{_FMT % v.imag}")
    return "\n".join(lines) + "\n"


def field_csv(field: SampledField) -> str:
    axes = space_axes(field.L, field.N, field.d)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = field.values.ravel()
    header = ",".join(f"x_{i + 1}" for i in range(field.d)) + ",re_f,im_f"
    lines = [header]
    for row, v in zip(pts, vals):
        coords = ",".join(_FMT % c for c in row)
        lines.append(f"{coords},{_FMT % v.real},{_FMT % v.imag}")
    return "\n".join(lines) + "\n"


def probe_report_csv(reports) -> str:
    lines = ["p,bound,best_ratio,trials,seed,pass"]
    for r in reports:
        lines.append(
            f"{_FMT % r.p},{_FMT % r.bound},{_FMT % r.best_ratio},"
            f"{r.trials},{r.seed},{str(r.passed).lower()}"
        )
    return "\n".join(lines) + "\n"
