"""Residual checks for each identity along the reduction chain.

Every check returns a :class:`ResidualReport`.  Relative norms divide by the
sup of a stated dominant term plus a 1e-14 floor so they stay meaningful
near critical points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .beltrami import PhiSolution
from .conformal import PointClass, nu_from_derivatives
from .errors import OutOfDomainError
from .fields import StructureField
from .grid import ComplexGridField, partials_fd, wirtinger_fd

FLOOR = 1e-14
IDENTITY_IDS = ("div_form", "complex_gradient", "chain_rule", "reduction_condition",
                "quasilinear", "hodograph_linear", "holomorphy")


@dataclass
class ResidualReport:
    identity_id: str
    abs_sup: float
    rel_sup: float
    rel_l2: float
    points_used: int
    excluded: int
    normalizer: str
    details: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.points_used > 0

    def to_dict(self) -> dict:
        return {"identity_id": self.identity_id, "abs_sup": self.abs_sup, "rel_sup": self.rel_sup,
                "rel_l2": self.rel_l2, "points_used": self.points_used, "excluded": self.excluded,
                "normalizer": self.normalizer, "details": self.details}


def make_report(identity_id: str, residual, normalizer_values, mask, normalizer: str,
                excluded: int = 0, **details) -> ResidualReport:
    mask = np.asarray(mask, dtype=bool) & np.isfinite(residual) & np.isfinite(normalizer_values)
    n = int(mask.sum())
    if n == 0:
        raise ValueError(f"{identity_id}: no points left to score")
    r = np.abs(np.asarray(residual)[mask])
    q = np.abs(np.asarray(normalizer_values)[mask])
    abs_sup = float(r.max())
    return ResidualReport(identity_id, abs_sup, abs_sup / (float(q.max()) + FLOOR),
                          float(np.sqrt(np.sum(r * r)) / (np.sqrt(np.sum(q * q)) + FLOOR)),
                          n, int(excluded), normalizer, dict(details))


def _require_real(u: ComplexGridField):
    v = u.valid()
    if v.size and np.abs(v.imag).max() > 1e-12 * max(1.0, np.abs(v.real).max()):
        raise ValueError("u must be real-valued")


def gradient_fd(u: ComplexGridField) -> ComplexGridField:
    """``u_x + i u_y`` by central differences."""
    _require_real(u)
    dx, dy, m = partials_fd(u.with_values(u.values.real))
    return ComplexGridField(u.spec, dx.real + 1j * dy.real, m)


def residual_divergence(A: StructureField, u: ComplexGridField) -> ResidualReport:
    """Strong-form ``d_x V1 + d_y V2`` with ``V = A(grad u)``, both derivatives by differences."""
    grad = gradient_fd(u)
    with np.errstate(all="ignore"):
        V = A(np.where(grad.mask, grad.values, 0.0))
    Vf = ComplexGridField(u.spec, V, grad.mask)
    dx, dy, m = partials_fd(Vf)
    a, b = dx.real, dy.imag
    return make_report("div_form", a + b, np.abs(a) + np.abs(b), m, "|d_x V1| + |d_y V2|",
                       excluded=int(u.n_valid - m.sum()))


def residual_complex_gradient(boldA: StructureField, u: ComplexGridField,
                              f: Optional[ComplexGridField] = None) -> ResidualReport:
    """``f_zbar - conj(nu(f)) f_z - nu(f) conj(f_z)`` with ``f = u_z``.

    ``f`` defaults to the difference quotient of ``u``; pass analytic
    samples to remove one differentiation.  Points where nu(f) is degenerate
    or undefined are excluded and counted.
    """
    if f is None:
        grad = gradient_fd(u)
        f = ComplexGridField(u.spec, 0.5 * np.conj(grad.values), grad.mask)
    fz, fzb = wirtinger_fd(f)
    m = fz.mask
    with np.errstate(all="ignore"):
        bz, bzb = boldA.wirtinger(np.where(m, f.values, 0.0))
    nu, cls = nu_from_derivatives(bz, bzb)
    ok = m & (cls <= PointClass.NEAR_DEGENERATE)
    res = fzb.values - np.conj(nu) * fz.values - nu * np.conj(fz.values)
    return make_report("complex_gradient", res, np.abs(fz.values), ok, "sup |f_z|",
                       excluded=int((m & ~ok).sum()),
                       n_degenerate=int((m & (cls == PointClass.DEGENERATE)).sum()),
                       n_nu_undefined=int((m & (cls == PointClass.NU_UNDEFINED)).sum()))


# ---------------------------------------------------------------------------
# chain rule and reduction condition


def reduction_expression(phi_w, phi_wb, nu, mu):
    """Coefficient of ``conj(F_z)`` in the chain-rule identity; zero iff F is C-quasilinear."""
    return phi_w ** 2 * nu + phi_w * phi_wb * (np.abs(nu) ** 2 - np.abs(mu) ** 2 + 1) + phi_wb ** 2 * np.conj(nu)


def nonzero_guard(phi_w, phi_wb, nu, mu):
    return np.abs(phi_w + phi_wb * np.conj(nu)) ** 2 - np.abs(phi_wb * np.conj(mu)) ** 2


def chain_coefficient(phi_w, phi_wb, nu, mu):
    """Coefficient of ``F_z`` once the reduction condition holds."""
    return mu * (np.abs(phi_w) ** 2 - np.abs(phi_wb) ** 2) / nonzero_guard(phi_w, phi_wb, nu, mu)


@dataclass
class ChainRuleReport:
    chain: ResidualReport
    reduction: ResidualReport
    nz_min: float
    coefficient_vs_gamma: float

    def to_dict(self) -> dict:
        return {"chain_rule": self.chain.to_dict(), "reduction_condition": self.reduction.to_dict(),
                "nz_min": self.nz_min, "coefficient_vs_gamma": self.coefficient_vs_gamma}


def residual_chain_rule(phi: PhiSolution, f: ComplexGridField, nu_of: Callable, mu_of: Callable,
                        gamma_of: Optional[Callable] = None) -> ChainRuleReport:
    """Both sides of the chain-rule identity for ``F = Phi(f)`` plus the reduction condition.

    ``f`` solves ``f_zbar = mu(f) f_z + nu(f) conj(f_z)``.  The reduction
    condition and the nonvanishing guard are evaluated at the sampled f
    values with Phi's own derivatives; the chain identity uses difference
    quotients of F.  With ``gamma_of`` the resulting F_z coefficient is
    compared against gamma(f).
    """
    if phi.derivatives is None:
        raise ValueError("Phi derivatives unavailable")
    m = f.mask
    w = np.where(m, f.values, 0.0)
    with np.errstate(all="ignore"):
        pw, pwb = phi.derivatives(w)
        nu, mu = nu_of(w), mu_of(w)
    ok = m & np.isfinite(pw) & np.isfinite(pwb) & np.isfinite(nu) & np.isfinite(mu)
    if not ok.any():
        raise ValueError("Phi derivatives unavailable at every sampled f")

    red = reduction_expression(pw, pwb, nu, mu)
    guard = nonzero_guard(pw, pwb, nu, mu)
    reduction = make_report("reduction_condition", red, np.abs(pw) ** 2 + np.abs(pwb) ** 2, ok,
                            "sup (|Phi_w|^2 + |Phi_wbar|^2)", excluded=int((m & ~ok).sum()))

    F = ComplexGridField(f.spec, phi(w), ok)
    Fz, Fzb = wirtinger_fd(F)
    cm = Fz.mask
    lhs = guard * Fzb.values
    rhs = mu * (np.abs(pw) ** 2 - np.abs(pwb) ** 2) * Fz.values + red * np.conj(Fz.values)
    chain = make_report("chain_rule", lhs - rhs, np.abs(guard * Fz.values), cm, "sup |guard * F_z|",
                        excluded=int((ok & ~cm).sum()))
    dev = float("nan")
    if gamma_of is not None:
        with np.errstate(all="ignore"):
            c = chain_coefficient(pw, pwb, nu, mu)
            g = gamma_of(w)
        dev = float(np.nanmax(np.abs(c - g)[ok]))
    return ChainRuleReport(chain, reduction, float(guard[ok].min()), dev)


# ---------------------------------------------------------------------------
# quasilinear form and hodograph


def quasilinear_coefficient(F_values, phi: PhiSolution, eta_of: Callable):
    """``-conj(eta(Phi^-1(F)))`` with per-point inversion flags."""
    F_values = np.asarray(F_values, dtype=complex)
    with np.errstate(all="ignore"):
        pre = phi.inverse(F_values)
        coeff = -np.conj(eta_of(pre))
    return coeff, np.isfinite(coeff)


def residual_quasilinear(F: ComplexGridField, phi: PhiSolution, eta_of: Callable,
                         expected_coefficient: Optional[Callable] = None) -> ResidualReport:
    """``F_zbar + conj(eta(Phi^-1(F))) F_z`` from difference quotients of F.

    ``expected_coefficient(F)`` is an optional closed form for
    ``-conj(eta(Phi^-1(F)))`` checked pointwise at the sampled F values.
    """
    Fz, Fzb = wirtinger_fd(F)
    m = Fz.mask
    coeff, inv_ok = quasilinear_coefficient(np.where(m, F.values, 0.0), phi, eta_of)
    failed = m & ~inv_ok
    if failed.sum() > 0.01 * max(1, m.sum()):
        raise OutOfDomainError(f"F leaves the image of Phi at {int(failed.sum())} of {int(m.sum())} points")
    ok = m & inv_ok
    res = Fzb.values - coeff * Fz.values
    details = {"inversion_failures": int(failed.sum())}
    if expected_coefficient is not None:
        with np.errstate(all="ignore"):
            target = expected_coefficient(F.values)
        details["coefficient_identity_max_dev"] = float(np.max(np.abs(coeff - target)[ok]))
    return make_report("quasilinear", res, np.abs(Fz.values), ok, "sup |F_z|",
                       excluded=int(F.n_valid - ok.sum()), **details)


def residual_hodograph(g: ComplexGridField, h, coeff_of_value: Callable,
                       convention: str = "linear") -> ResidualReport:
    """``g_wbar + c(h(w)) conj(g_w)`` where c maps an F value to its coefficient.

    ``h`` is a callable or a field on g's grid.  ``convention="linear"``
    uses ``c(h(w))``; ``"conjugated"`` uses ``c(conj(h(w)))``, the
    alternative coefficient placement.
    """
    gz, gzb = wirtinger_fd(g)
    m = gz.mask
    if isinstance(h, ComplexGridField):
        m = m & h.mask
        hv = np.where(m, h.values, 0.0)
    else:
        with np.errstate(all="ignore"):
            hv = np.asarray(h(np.where(m, g.spec.mesh(), 0.0)), dtype=complex)
    if convention == "linear":
        with np.errstate(all="ignore"):
            c = coeff_of_value(hv)
    elif convention == "conjugated":
        with np.errstate(all="ignore"):
            c = coeff_of_value(np.conj(hv))
    else:
        raise ValueError(f"unknown convention {convention!r}")
    ok = m & np.isfinite(c)
    if not ok.any():
        raise ValueError("h evaluation failed at every point")
    res = gzb.values + c * np.conj(gz.values)
    return make_report("hodograph_linear", res, np.abs(gz.values), ok, "sup |g_w|",
                       excluded=int(g.n_valid - ok.sum()), convention=convention)


def holomorphy_report(h: ComplexGridField) -> ResidualReport:
    hz, hzb = wirtinger_fd(h)
    return make_report("holomorphy", hzb.values, np.abs(hz.values), hz.mask, "sup |h_w|",
                       excluded=int(h.n_valid - hz.mask.sum()))


def conformal_equivalence(first: PhiSolution, second: PhiSolution, z) -> float:
    """sup of ``|h_wbar / h_w|`` for the transition map ``h = first o second^-1`` at the points z.

    Two solutions of the same Beltrami equation differ by a conformal map, so
    the value is zero up to discretization error.  Derivatives of h come from
    the chain rule and need no inversion.
    """
    if first.derivatives is None or second.derivatives is None:
        raise ValueError("both solutions need derivatives")
    z = np.asarray(z, dtype=complex)
    fz, fzb = first.derivatives(z)
    sz, szb = second.derivatives(z)
    jac = np.abs(sz) ** 2 - np.abs(szb) ** 2
    h_w = (fz * np.conj(sz) - fzb * np.conj(szb)) / jac
    h_wb = (fzb * sz - fz * szb) / jac
    ratio = np.abs(h_wb) / np.abs(h_w)
    if not np.all(np.isfinite(ratio)):
        raise ValueError("transition map derivatives undefined at some sample point")
    return float(ratio.max())


def refinement_ratio(coarse: ResidualReport, fine: ResidualReport) -> float:
    return coarse.rel_sup / fine.rel_sup if fine.rel_sup > 0 else float("inf")
