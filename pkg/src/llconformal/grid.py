"""Discrete complex calculus on rectangular grids.

Arrays are indexed ``values[i, j]`` with ``i`` running along x and ``j``
along y, so ``values.shape == (nx, ny)``.  Wirtinger derivatives follow
``d_z = (d_x - i d_y) / 2`` and ``d_zbar = (d_x + i d_y) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InsufficientStencilError, OutOfDomainError

MIN_POINTS = 8


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    periodic: bool = False

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must satisfy x_max > x_min and y_max > y_min")
        if self.nx < MIN_POINTS or self.ny < MIN_POINTS:
            raise ValueError(f"grid needs at least {MIN_POINTS} points per axis, got {self.nx}x{self.ny}")

    @classmethod
    def square(cls, lo: float, hi: float, n: int, periodic: bool = False) -> "GridSpec":
        return cls(lo, hi, lo, hi, n, n, periodic)

    @property
    def hx(self) -> float:
        div = self.nx if self.periodic else self.nx - 1
        return (self.x_max - self.x_min) / div

    @property
    def hy(self) -> float:
        div = self.ny if self.periodic else self.ny - 1
        return (self.y_max - self.y_min) / div

    @property
    def x(self) -> np.ndarray:
        if self.periodic:
            return self.x_min + self.hx * np.arange(self.nx)
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        if self.periodic:
            return self.y_min + self.hy * np.arange(self.ny)
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def mesh(self) -> np.ndarray:
        """Complex coordinates ``x + iy`` of every node, shape ``(nx, ny)``."""
        return self.x[:, None] + 1j * self.y[None, :]

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.y_min, self.y_max,
                        self.nx * factor, self.ny * factor, self.periodic)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "y_min": self.y_min,
                "y_max": self.y_max, "nx": self.nx, "ny": self.ny, "periodic": self.periodic}


@dataclass(frozen=True, eq=False)
class ComplexGridField:
    """Complex samples on a grid; ``mask`` is True at valid samples.

    Non-finite samples are masked automatically.
    """

    spec: GridSpec
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.spec.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.spec.shape}")
        mask = np.ones(values.shape, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if mask.shape != values.shape:
            raise ValueError(f"mask shape {mask.shape} does not match grid {self.spec.shape}")
        mask = mask & np.isfinite(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_function(cls, spec: GridSpec, fn: Callable, mask=None) -> "ComplexGridField":
        z = spec.mesh()
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(z), dtype=complex)
        if mask is not None and callable(mask):
            mask = mask(z)
        return cls(spec, np.broadcast_to(vals, z.shape).copy(), mask)

    @property
    def z(self) -> np.ndarray:
        return self.spec.mesh()

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())

    def valid(self) -> np.ndarray:
        return self.values[self.mask]

    def sup_abs(self) -> float:
        v = self.valid()
        return float(np.abs(v).max()) if v.size else 0.0

    def with_values(self, values, mask=None) -> "ComplexGridField":
        return ComplexGridField(self.spec, values, self.mask if mask is None else mask)

    def restricted(self, mask) -> "ComplexGridField":
        return ComplexGridField(self.spec, self.values, self.mask & np.asarray(mask, dtype=bool))

    def conj(self) -> "ComplexGridField":
        return self.with_values(np.conj(self.values))


# ---------------------------------------------------------------------------
# derivatives


def _stencil_mask(field: ComplexGridField) -> np.ndarray:
    """Points whose 5-point stencil is fully valid (boundary ring excluded unless periodic)."""
    m = field.mask
    if field.spec.periodic:
        return (m & np.roll(m, 1, 0) & np.roll(m, -1, 0)
                & np.roll(m, 1, 1) & np.roll(m, -1, 1))
    out = np.zeros_like(m)
    out[1:-1, 1:-1] = (m[1:-1, 1:-1] & m[2:, 1:-1] & m[:-2, 1:-1]
                       & m[1:-1, 2:] & m[1:-1, :-2])
    return out


def partials_fd(field: ComplexGridField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second-order central differences ``(d_x, d_y, mask)``.

    Non-periodic edges use second-order one-sided stencils but are always
    masked out, as is any point whose stencil touches a masked sample.
    """
    spec = field.spec
    v = np.where(field.mask, field.values, 0.0)
    if spec.periodic:
        dx = (np.roll(v, -1, 0) - np.roll(v, 1, 0)) / (2 * spec.hx)
        dy = (np.roll(v, -1, 1) - np.roll(v, 1, 1)) / (2 * spec.hy)
    else:
        dx = np.gradient(v, spec.hx, axis=0, edge_order=2)
        dy = np.gradient(v, spec.hy, axis=1, edge_order=2)
    out_mask = _stencil_mask(field)
    if field.n_valid and not out_mask.any():
        raise InsufficientStencilError("insufficient stencil: no valid point has a complete 3-point stencil")
    return dx, dy, out_mask


def wirtinger_fd(field: ComplexGridField) -> tuple[ComplexGridField, ComplexGridField]:
    dx, dy, m = partials_fd(field)
    dz = 0.5 * (dx - 1j * dy)
    dzb = 0.5 * (dx + 1j * dy)
    return ComplexGridField(field.spec, dz, m), ComplexGridField(field.spec, dzb, m)


def wavenumbers(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Angular wavenumbers ``(kx, ky)`` broadcast to the grid, Nyquist modes zeroed."""
    kx = 2 * np.pi * np.fft.fftfreq(spec.nx, d=spec.hx)
    ky = 2 * np.pi * np.fft.fftfreq(spec.ny, d=spec.hy)
    if spec.nx % 2 == 0:
        kx[spec.nx // 2] = 0.0
    if spec.ny % 2 == 0:
        ky[spec.ny // 2] = 0.0
    return kx[:, None], ky[None, :]


def wirtinger_spectral(field: ComplexGridField) -> tuple[ComplexGridField, ComplexGridField]:
    """Fourier-multiplier Wirtinger derivatives on a fully valid periodic grid."""
    if not field.spec.periodic:
        raise ValueError("spectral differentiation needs a periodic grid")
    if not field.mask.all():
        raise ValueError("spectral differentiation needs an all-valid field")
    kx, ky = wavenumbers(field.spec)
    fh = np.fft.fft2(field.values)
    dz = np.fft.ifft2(0.5j * (kx - 1j * ky) * fh)
    dzb = np.fft.ifft2(0.5j * (kx + 1j * ky) * fh)
    return ComplexGridField(field.spec, dz), ComplexGridField(field.spec, dzb)


def wirtinger_at(fn: Callable, z, step=1e-5, order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Wirtinger derivatives of a callable at scattered points.

    ``order`` is 2 (3-point) or 4 (5-point) per direction.
    """
    z = np.asarray(z, dtype=complex)

    def d(e):
        if order == 2:
            return (fn(z + e) - fn(z - e)) / (2 * step)
        if order == 4:
            return (8 * (fn(z + e) - fn(z - e)) - (fn(z + 2 * e) - fn(z - 2 * e))) / (12 * step)
        raise ValueError("order must be 2 or 4")

    with np.errstate(all="ignore"):
        fx, fy = d(step), d(1j * step)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


# ---------------------------------------------------------------------------
# interpolation


def _lagrange4(t):
    # cubic Lagrange basis on nodes 0..3 and its derivative
    a, b, c, d = t, t - 1, t - 2, t - 3
    w = np.stack([-b * c * d / 6, a * c * d / 2, -a * b * d / 2, a * b * c / 6])
    dw = np.stack([
        -(c * d + b * d + b * c) / 6,
        (c * d + a * d + a * c) / 2,
        -(b * d + a * d + a * b) / 2,
        (b * c + a * c + a * b) / 6,
    ])
    return w, dw


def _locate(s, n):
    i0 = np.clip(np.floor(s).astype(int) - 1, 0, n - 4)
    return i0, s - i0


def interpolate_with_derivatives(field: ComplexGridField, points):
    """Tensor-product cubic interpolation on the local 4x4 stencil.

    Returns ``(value, d_x, d_y, ok)``.  ``ok`` is False for points outside
    the node hull or whose stencil touches a masked sample; those entries
    are NaN.  Exact for polynomials of degree <= 3 in each variable.
    """
    spec = field.spec
    p = np.atleast_1d(np.asarray(points, dtype=complex))
    sx = (p.real - spec.x_min) / spec.hx
    sy = (p.imag - spec.y_min) / spec.hy
    eps = 1e-9
    inside = (sx >= -eps) & (sx <= spec.nx - 1 + eps) & (sy >= -eps) & (sy <= spec.ny - 1 + eps)
    inside &= np.isfinite(sx) & np.isfinite(sy)
    sx = np.where(inside, np.clip(sx, 0, spec.nx - 1), 0.0)
    sy = np.where(inside, np.clip(sy, 0, spec.ny - 1), 0.0)
    i0, tx = _locate(sx, spec.nx)
    j0, ty = _locate(sy, spec.ny)
    wx, dwx = _lagrange4(tx)
    wy, dwy = _lagrange4(ty)

    val = np.zeros(p.shape, dtype=complex)
    ddx = np.zeros(p.shape, dtype=complex)
    ddy = np.zeros(p.shape, dtype=complex)
    ok = inside.copy()
    vals = np.where(field.mask, field.values, 0.0)
    for a in range(4):
        for b in range(4):
            ii, jj = i0 + a, j0 + b
            v = vals[ii, jj]
            ok &= field.mask[ii, jj]
            val += wx[a] * wy[b] * v
            ddx += dwx[a] * wy[b] * v
            ddy += wx[a] * dwy[b] * v
    ddx /= spec.hx
    ddy /= spec.hy
    nan = np.nan + 0j
    return (np.where(ok, val, nan), np.where(ok, ddx, nan), np.where(ok, ddy, nan), ok)


def interpolate(field: ComplexGridField, points) -> tuple[np.ndarray, np.ndarray]:
    """Cubic interpolation at scattered points; returns ``(values, ok)``."""
    val, _, _, ok = interpolate_with_derivatives(field, points)
    return val, ok


def interpolate_one(field: ComplexGridField, point: complex) -> complex:
    val, ok = interpolate(field, [point])
    if not ok[0]:
        raise OutOfDomainError(f"point {point} is outside the grid or in a masked cell")
    return complex(val[0])


# ---------------------------------------------------------------------------
# CSV I/O

CSV_HEADER = "x,y,re,im,mask"


def write_field_csv(path, field: ComplexGridField) -> None:
    """Write ``x,y,re,im,mask`` rows ordered by y then x, 17 significant digits."""
    spec = field.spec
    X, Y = np.meshgrid(spec.x, spec.y)  # (ny, nx): y outer, x inner
    v = field.values.T
    rows = np.column_stack([X.ravel(), Y.ravel(), v.real.ravel(), v.imag.ravel()])
    m = field.mask.T.ravel().astype(int)
    lines = [CSV_HEADER]
    lines.extend(f"{r[0]:.17g},{r[1]:.17g},{r[2]:.17g},{r[3]:.17g},{k}" for r, k in zip(rows.tolist(), m.tolist()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_field_csv(path, periodic: bool = False) -> ComplexGridField:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0].strip() != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}")
    data = np.array([[float(t) for t in line.split(",")] for line in text[1:] if line.strip()])
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    nx, ny = xs.size, ys.size
    if data.shape[0] != nx * ny:
        raise ValueError(f"{path}: {data.shape[0]} rows do not form a {nx}x{ny} grid")
    x_max, y_max = xs[-1], ys[-1]
    if periodic:
        x_max = xs[0] + nx * (xs[-1] - xs[0]) / (nx - 1)
        y_max = ys[0] + ny * (ys[-1] - ys[0]) / (ny - 1)
    spec = GridSpec(xs[0], x_max, ys[0], y_max, nx, ny, periodic)
    values = np.empty(data.shape[0], dtype=complex)
    values.real, values.imag = data[:, 2], data[:, 3]  # keeps signed zeros and infs intact
    values = values.reshape(ny, nx).T
    mask = data[:, 4].reshape(ny, nx).T.astype(bool)
    return ComplexGridField(spec, values, mask)
