"""Structure fields, the bold transform and monotonicity audits.

A structure field is a map ``A: N -> C`` (plane vectors identified with
complex numbers) driving ``div A(grad u) = 0``.  Every callable here is
vectorised over numpy complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import OutOfDomainError
from .grid import GridSpec, wirtinger_at

CATALOG_IDS = ("identity", "p_laplacian", "minimal_surface", "maximal_spacelike", "p_orthotropic")


@dataclass(frozen=True)
class Domain:
    """Admissible gradient domain N.

    kind is one of ``plane``, ``disk`` (radius), ``annulus`` (inner, radius),
    ``quadrant`` (open quadrant number 1..4, optionally cut at ``radius``).
    """

    kind: str = "plane"
    radius: float = math.inf
    inner: float = 0.0
    quadrant: int = 1

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if self.kind == "plane":
            return np.isfinite(z)
        if self.kind == "disk":
            return r < self.radius
        if self.kind == "annulus":
            return (r > self.inner) & (r < self.radius)
        if self.kind == "quadrant":
            sx, sy = {1: (1, 1), 2: (-1, 1), 3: (-1, -1), 4: (1, -1)}[self.quadrant]
            return (sx * z.real > 0) & (sy * z.imag > 0) & (r < self.radius)
        raise ValueError(f"unknown domain kind {self.kind!r}")

    def scaled_conjugate(self, factor: float) -> "Domain":
        """Image of the domain under ``z -> factor * conj(z)``."""
        q = {1: 4, 2: 3, 3: 2, 4: 1}[self.quadrant] if self.kind == "quadrant" else self.quadrant
        return Domain(self.kind, self.radius * factor, self.inner * factor, q)

    def sample(self, rng: np.random.Generator, n: int, r_min: float = 0.1, r_max: float = 2.0) -> np.ndarray:
        """Random points in the domain, kept within ``r_min <= |z| <= r_max``
        and a 5% relative margin from the domain boundary."""
        lo = max(r_min, self.inner * 1.05)
        hi = min(r_max, self.radius * 0.95)
        r = np.sqrt(rng.uniform(lo * lo, hi * hi, n))
        if self.kind == "quadrant":
            base = (self.quadrant - 1) * np.pi / 2
            th = base + rng.uniform(0.05, np.pi / 2 - 0.05, n)
        else:
            th = rng.uniform(-np.pi, np.pi, n)
        return r * np.exp(1j * th)

    def describe(self) -> str:
        if self.kind == "plane":
            return "C"
        if self.kind == "disk":
            return f"disk |z|<{self.radius:g}"
        if self.kind == "annulus":
            return f"annulus {self.inner:g}<|z|<{self.radius:g}"
        cut = "" if math.isinf(self.radius) else f", |z|<{self.radius:g}"
        return f"open quadrant Q{self.quadrant}{cut}"


@dataclass(frozen=True)
class StructureField:
    id: str
    params: dict
    eval: Callable
    analytic_wirtinger: Optional[Callable] = None
    domain_N: Domain = field(default_factory=Domain)
    bold_depth: int = 0

    def __call__(self, z):
        with np.errstate(all="ignore"):
            return self.eval(np.asarray(z, dtype=complex))

    def wirtinger(self, z, step: float = 1e-5):
        """``(A_z, A_zbar)``: analytic when available, else central differences."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            if self.analytic_wirtinger is not None:
                return self.analytic_wirtinger(z)
            return wirtinger_at(self.eval, z, step)

    @property
    def label(self) -> str:
        return "bold^" * self.bold_depth + self.id


# ---------------------------------------------------------------------------
# catalog


def _radial(rho: Callable, drho: Callable, rho_over_t: Callable):
    """Field ``rho(|z|) z/|z|`` and its Wirtinger derivatives.

    ``rho_over_t`` is passed separately so the limit at the origin is exact.
    """

    def ev(z):
        t = np.abs(z)
        return rho_over_t(t) * z

    def wirt(z):
        t = np.abs(z)
        d, q = drho(t), rho_over_t(t)
        phase = np.where(t > 0, z / np.where(t > 0, np.conj(z), 1), 1.0)
        dz = 0.5 * (d + q) + 0 * z
        diff = d - q
        dzb = 0.5 * phase * diff
        # radial profile with equal slopes at 0 has no anti-holomorphic part there
        dzb = np.where((t == 0) & (diff == 0), 0.0, dzb)
        return dz, dzb

    return ev, wirt


def _p_orthotropic(p: float):
    def ev(z):
        x, y = z.real, z.imag
        return np.abs(x) ** (p - 2) * x + 1j * np.abs(y) ** (p - 2) * y

    def wirt(z):
        a = np.abs(z.real) ** (p - 2)
        b = np.abs(z.imag) ** (p - 2)
        c = 0.5 * (p - 1)
        return c * (a + b) + 0j, c * (a - b) + 0j

    return ev, wirt


def catalog(id: str, params: Optional[dict] = None) -> StructureField:
    """Closed-form structure field with analytic Wirtinger derivatives."""
    params = dict(params or {})
    if id not in CATALOG_IDS:
        raise ValueError(f"unknown structure field {id!r}; choose from {', '.join(CATALOG_IDS)}")
    if id in ("p_laplacian", "p_orthotropic"):
        if "p" not in params:
            raise ValueError(f"{id} needs parameter p")
        p = float(params["p"])
        if not p > 1:
            raise ValueError(f"{id} needs p > 1, got {p}")
        params["p"] = p
    elif params:
        raise ValueError(f"{id} takes no parameters, got {sorted(params)}")

    if id == "identity":
        ev, wirt = _radial(lambda t: t, lambda t: np.ones_like(t), lambda t: np.ones_like(t))
        dom = Domain("plane")
    elif id == "p_laplacian":
        p = params["p"]
        ev, wirt = _radial(lambda t: t ** (p - 1), lambda t: (p - 1) * t ** (p - 2), lambda t: t ** (p - 2))
        dom = Domain("plane")
    elif id == "minimal_surface":
        ev, wirt = _radial(lambda t: t / np.sqrt(1 + t * t),
                           lambda t: (1 + t * t) ** -1.5,
                           lambda t: (1 + t * t) ** -0.5)
        dom = Domain("plane")
    elif id == "maximal_spacelike":
        def q(t):
            return np.where(t < 1, 1 - t * t, np.nan)
        ev, wirt = _radial(lambda t: t / np.sqrt(q(t)), lambda t: q(t) ** -1.5, lambda t: q(t) ** -0.5)
        dom = Domain("disk", radius=1.0)
    else:
        ev, wirt = _p_orthotropic(params["p"])
        # every open quadrant is a locally monotone component; Q1 is the one tracked
        dom = Domain("quadrant", quadrant=1)
    return StructureField(id, params, ev, wirt, dom)


def custom(fn: Callable, wirtinger: Optional[Callable] = None, domain: Optional[Domain] = None,
           params: Optional[dict] = None) -> StructureField:
    return StructureField("custom", dict(params or {}), fn, wirtinger, domain or Domain())


def to_bold(A: StructureField) -> StructureField:
    """``bold A(z) = conj(A(2 conj z))``.

    Chain rule through ``w = 2 conj z``: ``bold A_z = 2 conj(A_z(w))`` and
    ``bold A_zbar = 2 conj(A_zbar(w))``.
    """

    def ev(z):
        return np.conj(A.eval(2 * np.conj(z)))

    wirt = None
    if A.analytic_wirtinger is not None:
        def wirt(z):
            az, azb = A.analytic_wirtinger(2 * np.conj(z))
            return 2 * np.conj(az), 2 * np.conj(azb)

    return StructureField(A.id, A.params, ev, wirt, A.domain_N.scaled_conjugate(0.5), A.bold_depth + 1)


def wirtinger_audit(A: StructureField, n_points: int = 200, seed: int = 0, step_scale: float = 1e-4,
                    axis_guard: bool = False) -> dict:
    """Compare analytic Wirtinger derivatives with 5-point central differences
    (step ``step_scale * |z|``) at random points of N.

    Returns the maximum relative deviation; ``axis_guard`` drops points
    within one step of the coordinate axes (fields with ``|x|^(p-2)`` terms).
    """
    if A.analytic_wirtinger is None:
        raise ValueError("field has no analytic Wirtinger derivatives to audit")
    rng = np.random.default_rng(seed)
    z = A.domain_N.sample(rng, n_points)
    scale = np.maximum(np.abs(z), 1e-3)
    step = step_scale * scale
    if axis_guard:
        keep = (np.abs(z.real) > step) & (np.abs(z.imag) > step)
        z, step = z[keep], step[keep]
    az, azb = A.wirtinger(z)
    fz, fzb = wirtinger_at(A.eval, z, step, order=4)
    norm = np.maximum(np.abs(az) + np.abs(azb), 1e-14)
    dev = np.maximum(np.abs(az - fz), np.abs(azb - fzb)) / norm
    return {"max_rel_deviation": float(dev.max()), "n_points": int(z.size)}


# ---------------------------------------------------------------------------
# delta-monotonicity


def distortion_from_delta(delta: float) -> float:
    """``K = (1 + sqrt(1 - d^2)) / (1 - sqrt(1 - d^2))``; infinite at ``d = 0``."""
    if delta <= 0:
        return math.inf
    s = math.sqrt(max(0.0, 1 - delta * delta))
    return (1 + s) / (1 - s)


@dataclass
class MonotonicityReport:
    delta_max: float
    K: float
    violation_points: list
    sample_spec: GridSpec
    delta_requested: Optional[float] = None
    passed: Optional[bool] = None
    n_points: int = 0
    n_excluded: int = 0
    note: str = "sampled estimate over grid nodes, not a proof"

    def to_dict(self) -> dict:
        return {
            "delta_max": self.delta_max,
            "K": self.K if math.isfinite(self.K) else "inf",
            "delta_requested": self.delta_requested,
            "passed": self.passed,
            "n_points": self.n_points,
            "n_excluded": self.n_excluded,
            "n_violations": len(self.violation_points),
            "violation_points": [[p.real, p.imag] for p in self.violation_points[:200]],
            "sample_spec": self.sample_spec.to_dict(),
            "note": self.note,
        }


def _dm_holds(a_bar, im_abs, re, delta, tol):
    return a_bar + delta * im_abs <= math.sqrt(max(0.0, 1 - delta * delta)) * re + tol


def monotonicity_audit(A: StructureField, sample: GridSpec, delta: Optional[float] = None,
                       mask=None, tol: float = 1e-6) -> MonotonicityReport:
    """Pointwise check of ``|A_zbar| + d|Im A_z| <= sqrt(1-d^2) Re A_z`` on grid nodes.

    Without ``delta`` the largest feasible d in (0, 1] is found by bisection
    to ``tol``; when none is feasible ``delta_max = 0`` and violations are
    reported at ``d = tol``.
    """
    z = sample.mesh()
    keep = np.ones(z.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    z = z[keep]
    if z.size == 0:
        raise ValueError("empty sample")
    az, azb = A.wirtinger(z)
    finite = np.isfinite(az) & np.isfinite(azb)
    z, az, azb = z[finite], az[finite], azb[finite]
    a_bar, im_abs, re = np.abs(azb), np.abs(az.imag), az.real
    scale = np.maximum(np.abs(az) + a_bar, 1e-300)
    rtol = 1e-14 * scale  # roundoff only; an equality case must fail for any d > 0

    def feasible(d):
        return bool(np.all(_dm_holds(a_bar, im_abs, re, d, rtol)))

    if feasible(1.0):
        dmax = 1.0
    elif not feasible(tol):
        dmax = 0.0
    else:
        lo, hi = tol, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if feasible(mid) else (lo, mid)
        dmax = lo

    probe = delta if delta is not None else (dmax if dmax > 0 else tol)
    bad = ~_dm_holds(a_bar, im_abs, re, probe, rtol)
    report = MonotonicityReport(dmax, distortion_from_delta(dmax), list(z[bad]), sample,
                                n_points=int(z.size), n_excluded=int((~finite).sum()))
    if delta is not None:
        if not 0 < delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        report.delta_requested = delta
        report.passed = not bad.any()
    return report


def parse_params(items) -> dict:
    """Parse ``["p=4", ...]`` into ``{"p": 4.0}``."""
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not of the form key=value")
        out[key.strip()] = float(val)
    return out


def ensure_in_domain(A: StructureField, z) -> None:
    z = np.asarray(z, dtype=complex)
    if not np.all(A.domain_N.contains(z)):
        raise OutOfDomainError(f"points outside the domain {A.domain_N.describe()} of {A.label}")
