"""Beltrami coefficient nu, conformal-structure coefficient eta, and gamma / mu.

For a bold field ``B`` the complex gradient ``f = u_z`` solves
``f_zbar = conj(nu(f)) f_z + nu(f) conj(f_z)`` with
``nu = -B_zbar / (2 Re B_z)``.  The map ``Phi`` with ``Phi_zbar = eta Phi_z``
turns ``F = Phi(f)`` into a solution of ``F_zbar = mu(Phi^-1(F)) F_z`` where
eta is the small root of ``nu + eta + conj(nu) eta^2 = 0`` and
``mu = gamma = -conj(eta)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

import numpy as np

from .errors import InternalInconsistencyError
from .fields import StructureField
from .grid import ComplexGridField, GridSpec

EPS_GUARD = 1e-6
NU_UNDEFINED_VALUE = 0.25


class PointClass(IntEnum):
    ELLIPTIC = 0
    NEAR_DEGENERATE = 1
    DEGENERATE = 2
    NU_UNDEFINED = 3


CLASS_NAMES = {c: c.name.lower() for c in PointClass}


def classify(nu: np.ndarray, undefined: np.ndarray, eps_guard: float = EPS_GUARD) -> np.ndarray:
    r = np.abs(nu)
    cls = np.full(np.shape(nu), PointClass.DEGENERATE, dtype=np.int8)
    cls[r < 0.5] = PointClass.NEAR_DEGENERATE
    cls[r < 0.5 - eps_guard] = PointClass.ELLIPTIC
    cls[undefined] = PointClass.NU_UNDEFINED
    return cls


def nu_from_derivatives(bz, bzb, eps_guard: float = EPS_GUARD):
    """``nu = -B_zbar / (2 Re B_z)`` with the 1/4 convention where undefined.

    Returns ``(nu, classification)``.
    """
    bz = np.asarray(bz, dtype=complex)
    bzb = np.asarray(bzb, dtype=complex)
    den = 2 * bz.real
    undefined = ~(np.isfinite(bz) & np.isfinite(bzb)) | (den == 0)
    with np.errstate(all="ignore"):
        nu = -bzb / np.where(undefined, 1.0, den)
    nu = np.where(undefined, NU_UNDEFINED_VALUE, nu)
    return nu, classify(nu, undefined, eps_guard)


def nu_values(boldA: StructureField, z):
    bz, bzb = boldA.wirtinger(z)
    return nu_from_derivatives(bz, bzb)


def eta_from_nu(nu) -> np.ndarray:
    """Small root of ``nu + eta + conj(nu) eta^2 = 0``.

    Written as ``-(nu/|nu|) r / (1/2 + sqrt((1/2 - r)(1/2 + r)))`` with
    ``r = |nu|`` so nothing cancels as r -> 0.  NaN where ``|nu| > 1/2``.
    """
    nu = np.asarray(nu, dtype=complex)
    r = np.abs(nu)
    with np.errstate(all="ignore"):
        root = np.sqrt((0.5 - r) * (0.5 + r))
        mag = r / (0.5 + root)
        # componentwise: complex division by a subnormal modulus overflows
        safe = np.where(r > 0, r, 1.0)
        phase = np.where(r > 0, nu.real / safe + 1j * (nu.imag / safe), 0.0)
    return -phase * mag


def quadratic_roots(nu):
    """Both roots ``eta_+, eta_-`` of the quadratic, principal square root."""
    nu = np.asarray(nu, dtype=complex)
    nb = np.conj(nu)
    with np.errstate(all="ignore"):
        s = np.sqrt(1 / (4 * nb * nb) - nu / nb)
        base = -1 / (2 * nb)
    return base + s, base - s


def eta_by_branch(nu) -> np.ndarray:
    """Root selection by the argument of nu: ``eta_+`` on the right half plane
    (arg in [-pi/2, pi/2]), ``eta_-`` otherwise, 0 at nu = 0.

    With the principal root, ``sqrt(1/(4 conj(nu)^2)) = 1/(2 conj(nu))``
    exactly when Re nu > 0, which is where ``eta_+`` is the small root.
    """
    nu = np.asarray(nu, dtype=complex)
    plus, minus = quadratic_roots(nu)
    right = np.abs(np.angle(nu)) <= np.pi / 2
    return np.where(nu == 0, 0.0, np.where(right, plus, minus))


def gamma_quotient(nu, eta) -> tuple[np.ndarray, np.ndarray]:
    """``gamma = (1-|eta|^2) conj(nu) / (|1 + eta conj(nu)|^2 - |eta nu|^2)``;
    returns ``(gamma, denominator)``."""
    nu = np.asarray(nu, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    den = np.abs(1 + eta * np.conj(nu)) ** 2 - np.abs(eta * nu) ** 2
    with np.errstate(all="ignore"):
        g = (1 - np.abs(eta) ** 2) * np.conj(nu) / den
    return g, den


def general_coefficient(eta, nu, mu) -> np.ndarray:
    """Quasilinear coefficient for a general (mu, nu) equation after ``F = Phi(f)``:
    ``(1-|eta|^2) mu / (|1 + eta conj(nu)|^2 - |eta conj(mu)|^2)``."""
    eta, nu, mu = (np.asarray(a, dtype=complex) for a in (eta, nu, mu))
    den = np.abs(1 + eta * np.conj(nu)) ** 2 - np.abs(eta * np.conj(mu)) ** 2
    with np.errstate(all="ignore"):
        return (1 - np.abs(eta) ** 2) * mu / den


def eta_function(boldA: StructureField):
    """Pointwise map ``z -> eta(z)``; NaN where the equation degenerates."""

    def eta(z):
        nu, cls = nu_values(boldA, z)
        out = eta_from_nu(nu)
        return np.where(cls == PointClass.NU_UNDEFINED, np.nan, out)

    return eta


def mu_function(boldA: StructureField):
    """Complex structure coefficient ``z -> -conj(eta(z))``."""
    eta = eta_function(boldA)
    return lambda z: -np.conj(eta(z))


# ---------------------------------------------------------------------------
# grid-level operations


@dataclass
class ConformalData:
    nu: ComplexGridField
    eta: ComplexGridField
    gamma: ComplexGridField
    gamma_quotient: ComplexGridField
    mu: ComplexGridField
    classification: np.ndarray
    k_bound: float

    @property
    def spec(self) -> GridSpec:
        return self.nu.spec


AtType = Union[GridSpec, ComplexGridField]


def _points(at: AtType):
    if isinstance(at, GridSpec):
        return at, at.mesh(), np.ones(at.shape, dtype=bool)
    return at.spec, at.spec.mesh(), at.mask


def compute_nu(boldA: StructureField, at: AtType) -> tuple[ComplexGridField, np.ndarray]:
    """nu on the grid nodes plus per-node classification.

    ``at`` may be a GridSpec or a field whose mask selects the region.
    Undefined points carry the value 1/4 but are masked out.
    """
    spec, z, region = _points(at)
    nu, cls = nu_values(boldA, z)
    valid = region & (cls != PointClass.NU_UNDEFINED)
    return ComplexGridField(spec, nu, valid), cls


def compute_eta(nu: ComplexGridField, classification=None) -> ComplexGridField:
    """eta at every node with ``|nu| < 1/2``; degenerate nodes are masked."""
    eta = eta_from_nu(nu.values)
    mask = nu.mask & (np.abs(nu.values) < 0.5)
    if classification is not None:
        mask &= np.asarray(classification) != PointClass.NU_UNDEFINED
    if nu.n_valid and not mask.any():
        warnings.warn("every point is degenerate; elliptic set is empty", RuntimeWarning, stacklevel=2)
    return ComplexGridField(nu.spec, np.where(mask, eta, np.nan), mask)


def compute_gamma_mu(nu: ComplexGridField, eta: ComplexGridField, classification=None):
    """Return ``(gamma_quotient, gamma, mu)`` with ``gamma = mu = -conj(eta)``.

    Raises when the quotient's denominator is not positive at an elliptic point.
    """
    mask = nu.mask & eta.mask
    gq, den = gamma_quotient(nu.values, eta.values)
    check = mask if classification is None else mask & (np.asarray(classification) == PointClass.ELLIPTIC)
    if np.any(check & ~(den > 0)):
        bad = np.argwhere(check & ~(den > 0))[0]
        raise InternalInconsistencyError(
            f"gamma denominator {den[tuple(bad)]} <= 0 at elliptic node {tuple(bad)}")
    neg = -np.conj(eta.values)
    return (ComplexGridField(nu.spec, gq, mask), ComplexGridField(nu.spec, neg, mask),
            ComplexGridField(nu.spec, neg.copy(), mask))


def compute_conformal(boldA: StructureField, at: AtType) -> ConformalData:
    nu, cls = compute_nu(boldA, at)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eta = compute_eta(nu, cls)
    gq, gamma, mu = compute_gamma_mu(nu, eta, cls)
    ell = eta.mask & (cls == PointClass.ELLIPTIC)
    k = float(np.abs(eta.values[ell]).max()) if ell.any() else float("nan")
    return ConformalData(nu, eta, gamma, gq, mu, cls, k)


@dataclass
class EllipticityReport:
    n_points: int
    fractions: dict
    sup_two_nu: float
    sup_eta: float
    crossing_points: list
    uniformly_elliptic: bool

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "fractions": self.fractions,
            "sup_2nu_elliptic": self.sup_two_nu,
            "sup_eta_elliptic": self.sup_eta,
            "uniformly_elliptic": self.uniformly_elliptic,
            "n_crossings": len(self.crossing_points),
            "crossing_points": [[p.real, p.imag] for p in self.crossing_points[:200]],
        }


def ellipticity_report(data: ConformalData, region=None) -> EllipticityReport:
    """Class fractions, sup 2|nu| and sup |eta| on elliptic nodes, and the
    midpoints of grid edges where |nu| crosses 1/2."""
    spec = data.spec
    inside = np.ones(spec.shape, dtype=bool) if region is None else np.asarray(region, dtype=bool)
    cls = data.classification
    n = int(inside.sum())
    fractions = {CLASS_NAMES[c]: (float(((cls == c) & inside).sum()) / n if n else 0.0) for c in PointClass}
    ell = inside & (cls == PointClass.ELLIPTIC)
    two_nu = float(2 * np.abs(data.nu.values[ell]).max()) if ell.any() else float("nan")
    sup_eta = float(np.abs(data.eta.values[ell]).max()) if ell.any() else float("nan")

    z = spec.mesh()
    defined = inside & (cls != PointClass.NU_UNDEFINED)
    side = np.abs(data.nu.values) >= 0.5
    crossings = []
    for axis in (0, 1):
        a = [slice(None), slice(None)]
        b = [slice(None), slice(None)]
        a[axis], b[axis] = slice(None, -1), slice(1, None)
        a, b = tuple(a), tuple(b)
        hit = defined[a] & defined[b] & (side[a] != side[b])
        crossings.extend((0.5 * (z[a] + z[b]))[hit].tolist())
    return EllipticityReport(n, fractions, two_nu, sup_eta, crossings,
                             bool(n and fractions["elliptic"] == 1.0))
