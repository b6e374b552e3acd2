"""Factorization ``F = h o chi`` of a quasilinear solution on a rectangle.

Once F is known its coefficient is an ordinary function of position, so
chi solves a linear Beltrami equation.  chi comes from the periodic grid
solver on a padded copy of F's grid, ``g = chi^-1`` from Newton inversion,
and ``h = F o g`` is sampled on a grid over chi's image and tested for
holomorphy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .beltrami import GridInverse, PhiSolution, solve_phi_grid
from .errors import EllipticityError
from .grid import ComplexGridField, GridSpec, interpolate, wirtinger_fd
from .verify import ResidualReport, holomorphy_report, make_report, residual_hodograph

FAILED_THRESHOLD = 0.05


@dataclass
class Factorization:
    chi: ComplexGridField
    g: GridInverse
    g_grid: ComplexGridField
    h: ComplexGridField
    holomorphy_residual: float
    holomorphy: ResidualReport
    linear_residual: ResidualReport
    composition_error: float
    failed: bool
    solution: PhiSolution
    conventions: dict = field(default_factory=dict)

    def manifest(self) -> dict:
        return {
            "holomorphy_residual": self.holomorphy_residual,
            "holomorphy": self.holomorphy.to_dict(),
            "linear_residual": self.linear_residual.to_dict(),
            "value_coefficient_conventions": {k: v.to_dict() for k, v in self.conventions.items()},
            "composition_error": self.composition_error,
            "failed": self.failed,
            "chi": self.solution.manifest(),
            "w_grid": self.h.spec.to_dict(),
        }


def padded_periodic(spec: GridSpec, pad: int) -> GridSpec:
    """Periodic grid sharing ``spec``'s nodes with ``pad`` extra nodes per side."""
    x0 = spec.x_min - pad * spec.hx
    y0 = spec.y_min - pad * spec.hy
    nx, ny = spec.nx + 2 * pad, spec.ny + 2 * pad
    return GridSpec(x0, x0 + nx * spec.hx, y0, y0 + ny * spec.hy, nx, ny, periodic=True)


def coefficient_fd(F: ComplexGridField) -> ComplexGridField:
    """``F_zbar / F_z`` by central differences; masked where F_z vanishes."""
    Fz, Fzb = wirtinger_fd(F)
    ok = Fz.mask & (np.abs(Fz.values) > 1e-12 * max(1.0, np.abs(Fz.values[Fz.mask]).max()))
    with np.errstate(all="ignore"):
        return ComplexGridField(F.spec, Fzb.values / Fz.values, ok)


CoeffType = Union[Callable, ComplexGridField]


def _coeff_on_nodes(coeff: CoeffType, F: ComplexGridField) -> ComplexGridField:
    if isinstance(coeff, ComplexGridField):
        if coeff.spec != F.spec:
            raise ValueError("coefficient grid must match F's grid")
        return coeff.restricted(F.mask)
    return ComplexGridField.from_function(F.spec, coeff, F.mask)


def factorize(F: ComplexGridField, coeff: CoeffType, value_coeff: Optional[Callable] = None,
              k_max: Optional[float] = None, tol: float = 1e-10, extension: str = "harmonic",
              pad: Optional[int] = None) -> Factorization:
    """Factor F given its coefficient ``coeff(z)`` (``F_zbar = coeff F_z``).

    ``coeff`` is a function of position or a grid field on F's grid.
    ``value_coeff`` (optional) expresses the same coefficient as a function
    of the value F; both placements ``c(h)`` and ``c(conj h)`` are then
    scored on g.
    """
    spec = F.spec
    c = _coeff_on_nodes(coeff, F)
    if not c.mask.any():
        raise ValueError("coefficient is undefined on every node of F")
    k = c.sup_abs()
    if k >= 1 or (k_max is not None and k > k_max):
        raise EllipticityError(f"sup|coeff| = {k:.6g} exceeds {1 if k_max is None else k_max}")

    pad = spec.nx // 2 if pad is None else pad
    big = padded_periodic(spec, pad)
    inner = (slice(pad, pad + spec.nx), slice(pad, pad + spec.ny))
    vals = np.zeros(big.shape, dtype=complex)
    mask = np.zeros(big.shape, dtype=bool)
    vals[inner] = np.where(c.mask, c.values, 0.0)
    mask[inner] = c.mask
    sol = solve_phi_grid(ComplexGridField(big, vals, mask), tol=tol, k_max=k_max, extension=extension)
    chi = ComplexGridField(spec, sol.grid.values[inner], F.mask)
    inv: GridInverse = sol.inverse

    img = chi.valid()
    wspec = GridSpec(img.real.min(), img.real.max(), img.imag.min(), img.imag.max(), spec.nx, spec.ny)
    w = wspec.mesh()
    gz, ok = inv.solve(w)
    hv, hok = interpolate(F, np.where(ok, gz, spec.x_min + 1j * spec.y_min))
    ok &= hok
    g_grid = ComplexGridField(wspec, gz, ok)
    h = ComplexGridField(wspec, hv, ok)

    holo = holomorphy_report(h)

    dg, dgb = wirtinger_fd(g_grid)
    lm = dg.mask
    if isinstance(coeff, ComplexGridField):
        cg, cok = interpolate(c, np.where(lm, gz, spec.x_min + 1j * spec.y_min))
    else:
        with np.errstate(all="ignore"):
            cg = np.asarray(coeff(np.where(lm, gz, 0.0)), dtype=complex)
        cok = np.isfinite(cg)
    lin = make_report("hodograph_linear", dgb.values + cg * np.conj(dg.values), np.abs(dg.values), lm & cok,
                      "sup |g_w|", excluded=int(g_grid.n_valid - (lm & cok).sum()), convention="position")

    conventions = {}
    if value_coeff is not None:
        for conv in ("linear", "conjugated"):
            conventions[conv] = residual_hodograph(g_grid, h, value_coeff, conv)

    # composition h(chi(z)) against F(z) on nodes whose image stays inside the h grid
    zc = np.where(chi.mask, chi.values, wspec.x_min + 1j * wspec.y_min)
    back, bok = interpolate(h, zc)
    bok &= chi.mask
    scale = max(1.0, F.sup_abs())
    comp = float(np.max(np.abs(back - F.values)[bok]) / scale) if bok.any() else float("nan")

    return Factorization(chi, inv, g_grid, h, holo.rel_sup, holo, lin, comp,
                         bool(holo.rel_sup > FAILED_THRESHOLD), sol, conventions)
