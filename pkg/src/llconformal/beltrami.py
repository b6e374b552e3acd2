"""Homeomorphic solutions of ``Phi_zbar = eta Phi_z``.

Three routes: radial stretchings ``rho(|z|) z/|z|`` for coefficients of the
form ``eta = g(|z|) z/conj(z)`` (a separable ODE for rho), closed forms for
catalog fields, and a periodic-grid principal solution built from the
Beurling transform by Neumann iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg
from scipy.spatial import cKDTree

from .errors import (EllipticityError, NeumannDivergenceError, NotHomeomorphicError,
                     OutOfDomainError)
from .grid import (ComplexGridField, interpolate, interpolate_with_derivatives, partials_fd,
                   wavenumbers, wirtinger_at, wirtinger_spectral)

RESIDUAL_FLOOR = 1e-14


@dataclass
class PhiSolution:
    method: str
    forward: Callable
    inverse: Callable
    residual: float
    jacobian_sign: str
    derivatives: Optional[Callable] = None
    iterations: int = 0
    grid: Optional[ComplexGridField] = None
    image: str = ""
    info: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.forward(np.asarray(z, dtype=complex))

    def manifest(self) -> dict:
        out = {"method": self.method, "residual": self.residual, "jacobian_sign": self.jacobian_sign,
               "iterations": self.iterations, "image": self.image}
        out.update(self.info)
        return out


def radial_derivatives(z, rho_over_t, drho):
    """Wirtinger derivatives of ``rho(|z|) z/|z|`` given ``rho(t)/t`` and ``rho'(t)``."""
    z = np.asarray(z, dtype=complex)
    t = np.abs(z)
    phase = z / np.conj(z)
    return 0.5 * (drho + rho_over_t), 0.5 * phase * (drho - rho_over_t)


def beltrami_residual(forward: Callable, eta: Callable, z, step=None) -> float:
    """sup ``|Phi_zbar - eta Phi_z| / (|Phi_z| + floor)`` from 5-point differences."""
    z = np.asarray(z, dtype=complex)
    if step is None:
        step = 1e-4 * np.maximum(np.abs(z), 1e-2)
    pz, pzb = wirtinger_at(forward, z, step, order=4)
    res = np.abs(pzb - eta(z) * pz) / (np.abs(pz) + RESIDUAL_FLOOR)
    return float(np.nanmax(res))


# ---------------------------------------------------------------------------
# radial stretchings

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def radial_profile(eta: Callable, t_range, n_t: int = 64, n_theta: int = 16, tol: float = 1e-8) -> Callable:
    """Extract ``g`` from ``eta(z) = g(|z|) z/conj(z)``, checking the form on circles.

    Raises if eta deviates from the radial form by more than ``tol`` or ``g``
    is not real.
    """
    t_lo, t_hi = t_range
    t = np.geomspace(t_lo, t_hi, n_t)
    th = np.linspace(-np.pi, np.pi, n_theta, endpoint=False)
    z = t[:, None] * np.exp(1j * th)[None, :]
    with np.errstate(all="ignore"):
        on_axis = eta(t + 0j)
        vals = eta(z)
    if not np.all(np.isfinite(vals)):
        raise EllipticityError("eta is undefined (degenerate) somewhere on the requested radii")
    dev = np.abs(vals - on_axis[:, None] * (z / np.conj(z)))
    if dev.max() > tol or np.abs(on_axis.imag).max() > tol:
        raise ValueError(f"eta is not of radial form g(|z|) z/conj(z) (deviation {max(dev.max(), np.abs(on_axis.imag).max()):.3e})")

    def g(s):
        return np.real(eta(np.asarray(s, dtype=float) + 0j))

    return g


class _LogIntegral:
    """``G(t) = int_{t_lo}^{t} 2 g(s) / (s (1 - g(s))) ds`` on adaptively refined panels."""

    def __init__(self, gamma0: Callable, t_lo: float, t_hi: float, tol: float = 1e-10):
        self.gamma0 = gamma0
        self.t_lo, self.t_hi = t_lo, t_hi
        breaks = list(np.geomspace(t_lo, t_hi, 9))
        accepted = [breaks[0]]
        stack = [(breaks[i], breaks[i + 1]) for i in range(len(breaks) - 2, -1, -1)]
        total_len = np.log(t_hi / t_lo)
        while stack:
            a, b = stack.pop()
            m = np.sqrt(a * b)
            whole = self._panel(a, b)
            halves = self._panel(a, m) + self._panel(m, b)
            budget = tol * np.log(b / a) / total_len
            if abs(whole - halves) <= budget or b - a < 1e-12 * b:
                accepted.append(b)
            else:
                stack.append((m, b))
                stack.append((a, m))
        self.breaks = np.array(accepted)
        pieces = [self._panel(a, b) for a, b in zip(self.breaks[:-1], self.breaks[1:])]
        self.cum = np.concatenate([[0.0], np.cumsum(pieces)])

    def integrand(self, s):
        g = np.asarray(self.gamma0(s), dtype=float)
        if not np.all(np.isfinite(g)) or np.any(np.abs(g) >= 1):
            raise EllipticityError("|g(t)| >= 1 (or undefined) inside the requested radius range")
        return 2 * g / (s * (1 - g))

    def _panel(self, a, b):
        s = 0.5 * (b - a) * _GL_X + 0.5 * (b + a)
        return 0.5 * (b - a) * float(np.dot(_GL_W, self.integrand(s)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        k = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1, 0, len(self.breaks) - 2)
        a = self.breaks[k]
        half = 0.5 * (flat - a)
        nodes = half[:, None] * (_GL_X[None, :] + 1) + a[:, None]
        vals = self.integrand(nodes.ravel()).reshape(nodes.shape)
        return (self.cum[k] + half * (vals @ _GL_W)).reshape(t.shape)


def solve_phi_radial(gamma0: Optional[Callable] = None, t_range=(0.05, 2.0), *, eta: Optional[Callable] = None,
                     rho_hi: Optional[float] = None, tol: float = 1e-10) -> PhiSolution:
    """Radial stretching solving ``rho' = (rho/t) (1 + g)/(1 - g)``.

    Pass the profile ``gamma0`` directly, or ``eta`` (validated to be of
    radial form).  ``rho(t_hi) = rho_hi`` fixes the free multiplicative
    constant; default ``rho_hi = t_hi``.
    """
    t_lo, t_hi = map(float, t_range)
    if not 0 < t_lo < t_hi:
        raise ValueError("t_range must satisfy 0 < t_lo < t_hi")
    if gamma0 is None:
        if eta is None:
            raise ValueError("pass gamma0 or eta")
        gamma0 = radial_profile(eta, (t_lo, t_hi))
    elif eta is None:
        def eta(z):
            z = np.asarray(z, dtype=complex)
            return gamma0(np.abs(z)) * (z / np.conj(z))

    check = np.asarray(gamma0(np.geomspace(t_lo, t_hi, 512)), dtype=float)
    if not np.all(np.isfinite(check)) or np.abs(check).max() >= 1:
        raise EllipticityError("|g(t)| >= 1 (or undefined) inside the requested radius range")

    G = _LogIntegral(gamma0, t_lo, t_hi, tol)
    rho_hi = t_hi if rho_hi is None else float(rho_hi)
    log_c = np.log(rho_hi / t_hi) - G(t_hi)

    def in_range(t):
        return (t >= t_lo * (1 - 1e-12)) & (t <= t_hi * (1 + 1e-12))

    def rho_over_t(t):
        t = np.asarray(t, dtype=float)
        ok = in_range(t)
        tc = np.where(ok, np.clip(t, t_lo, t_hi), t_lo)
        return np.where(ok, np.exp(log_c + G(tc)), np.nan)

    def forward(z):
        z = np.asarray(z, dtype=complex)
        return rho_over_t(np.abs(z)) * z

    def derivatives(z):
        z = np.asarray(z, dtype=complex)
        t = np.abs(z)
        q = rho_over_t(t)
        g = gamma0(np.where(in_range(t), np.clip(t, t_lo, t_hi), t_lo))
        return radial_derivatives(z, q, q * (1 + g) / (1 - g))

    log_rho_lo = np.log(t_lo) + log_c
    log_rho_hi = np.log(t_hi) + log_c + G(t_hi)

    def inverse(w):
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore"):
            target = np.log(np.abs(w))
        ok = (target >= log_rho_lo - 1e-12) & (target <= log_rho_hi + 1e-12)
        lo = np.full(target.shape, np.log(t_lo))
        hi = np.full(target.shape, np.log(t_hi))
        frac = np.clip((target - log_rho_lo) / (log_rho_hi - log_rho_lo), 0, 1)
        s = np.where(ok, lo + frac * (hi - lo), lo)
        for _ in range(100):
            t = np.exp(s)
            g = gamma0(t)
            f = np.log(t) + log_c + G(t) - np.where(ok, target, np.log(t_lo) + log_c)
            lo = np.where(f < 0, s, lo)
            hi = np.where(f > 0, s, hi)
            step = f / ((1 + g) / (1 - g))
            s_new = s - step
            bad = (s_new <= lo) | (s_new >= hi)
            s_new = np.where(bad, 0.5 * (lo + hi), s_new)
            if np.all(np.abs(s_new - s) <= 1e-15 * np.maximum(1, np.abs(s))):
                s = s_new
                break
            s = s_new
        t = np.exp(s)
        return np.where(ok, t * np.where(w == 0, 0, w / np.where(w == 0, 1, np.abs(w))), np.nan + 0j)

    rng = np.random.default_rng(0)
    zs = np.geomspace(t_lo * 1.01, t_hi * 0.99, 64) * np.exp(1j * rng.uniform(-np.pi, np.pi, 64))
    res = beltrami_residual(forward, eta, zs)
    pz, pzb = derivatives(zs)
    jac = np.abs(pz) ** 2 - np.abs(pzb) ** 2
    sign = "positive" if np.all(jac > 0) else ("negative" if np.all(jac < 0) else "mixed")
    return PhiSolution("radial_ode", forward, inverse, res, sign, derivatives,
                       image=f"annulus {np.exp(log_rho_lo):.12g}<=|w|<={np.exp(log_rho_hi):.12g}",
                       info={"t_range": [t_lo, t_hi], "rho_hi": rho_hi, "panels": int(len(G.breaks) - 1)})


# ---------------------------------------------------------------------------
# closed forms


def closed_form_phi(field_id: str, params: Optional[dict] = None, eta: Optional[Callable] = None) -> PhiSolution:
    """Explicit homeomorphic solutions for the radial catalog fields.

    p_laplacian: ``|z|^(d-1) z`` with ``d = sqrt(p-1)``; minimal_surface:
    ``2z / (1 + sqrt(1 + 4|z|^2))`` onto the unit disk; maximal_spacelike:
    ``z / (1 + sqrt(1 - 4|z|^2))``, a self-map of the disk of radius 1/2.
    ``eta`` (optional) is used to score the Beltrami residual.
    """
    params = params or {}
    if field_id == "identity":
        def fwd(z): return np.asarray(z, dtype=complex)
        def inv(w): return np.asarray(w, dtype=complex)
        def q(t): return np.ones_like(t)
        def d(t): return np.ones_like(t)
        image = "C"
    elif field_id == "p_laplacian":
        delta = np.sqrt(float(params["p"]) - 1)
        def q(t): return t ** (delta - 1)
        def d(t): return delta * t ** (delta - 1)
        def fwd(z):
            z = np.asarray(z, dtype=complex)
            return q(np.abs(z)) * z
        def inv(w):
            w = np.asarray(w, dtype=complex)
            return np.abs(w) ** (1 / delta - 1) * w
        image = "C"
    elif field_id == "minimal_surface":
        def q(t): return 2 / (1 + np.sqrt(1 + 4 * t * t))
        def d(t): return q(t) / np.sqrt(1 + 4 * t * t)
        def fwd(z):
            z = np.asarray(z, dtype=complex)
            return q(np.abs(z)) * z
        def inv(w):
            w = np.asarray(w, dtype=complex)
            a = np.abs(w)
            return np.where(a < 1, w / (1 - a * a), np.nan)
        image = "unit disk"
    elif field_id == "maximal_spacelike":
        def q(t): return 1 / (1 + np.sqrt(1 - 4 * t * t))
        def d(t): return q(t) / np.sqrt(1 - 4 * t * t)
        def fwd(z):
            z = np.asarray(z, dtype=complex)
            return q(np.abs(z)) * z
        def inv(w):
            w = np.asarray(w, dtype=complex)
            a = np.abs(w)
            return np.where(a < 0.5, 2 * w / (1 + 4 * a * a), np.nan)
        image = "disk |w|<1/2"
    else:
        raise ValueError(f"no closed-form solution for {field_id!r}")

    def derivatives(z):
        z = np.asarray(z, dtype=complex)
        t = np.abs(z)
        with np.errstate(all="ignore"):
            return radial_derivatives(z, q(t), d(t))

    res = float("nan")
    if eta is not None:
        rng = np.random.default_rng(0)
        top = 0.45 if field_id == "maximal_spacelike" else 1.5
        zs = rng.uniform(0.05, top, 64) * np.exp(1j * rng.uniform(-np.pi, np.pi, 64))
        res = beltrami_residual(fwd, eta, zs)
    return PhiSolution("closed_form", fwd, inv, res, "positive", derivatives, image=image,
                       info={"field": field_id, "params": dict(params)})


# ---------------------------------------------------------------------------
# periodic grid solver


def harmonic_fill(field: ComplexGridField) -> np.ndarray:
    """Values on masked nodes replaced by the discrete harmonic extension of the valid ones."""
    spec = field.spec
    m = field.mask
    out = np.where(m, field.values, 0.0).astype(complex)
    unknown = ~m
    if not unknown.any() or not m.any():
        return out
    idx = -np.ones(m.shape, dtype=np.int64)
    idx[unknown] = np.arange(unknown.sum())
    I, J = np.nonzero(unknown)
    n = I.size
    diag = np.zeros(n)
    rhs = np.zeros(n, dtype=complex)
    rows, cols = [], []
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = I + di, J + dj
        if spec.periodic:
            ni %= spec.nx
            nj %= spec.ny
            inb = np.ones(n, dtype=bool)
        else:
            inb = (ni >= 0) & (ni < spec.nx) & (nj >= 0) & (nj < spec.ny)
        ni_c, nj_c = np.where(inb, ni, 0), np.where(inb, nj, 0)
        diag += inb
        nbr_unknown = inb & unknown[ni_c, nj_c]
        rows.append(np.nonzero(nbr_unknown)[0])
        cols.append(idx[ni_c, nj_c][nbr_unknown])
        known = inb & ~unknown[ni_c, nj_c]
        rhs[known] += out[ni_c, nj_c][known]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    A = sparse.csr_matrix((np.concatenate([diag, -np.ones(r.size)]),
                           (np.concatenate([np.arange(n), r]), np.concatenate([np.arange(n), c]))),
                          shape=(n, n))
    sol = splinalg.spsolve(A.tocsc(), rhs)
    out[unknown] = sol
    return out


def smooth_cutoff(r, r0: float, r1: float):
    """C-infinity step: 1 for ``r <= r0``, 0 for ``r >= r1``."""
    r = np.asarray(r, dtype=float)
    s = np.clip((r - r0) / (r1 - r0), 0, 1)

    def bump(x):
        with np.errstate(all="ignore"):
            return np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)

    return bump(1 - s) / (bump(1 - s) + bump(s))


def solve_phi_grid(eta: ComplexGridField, tol: float = 1e-10, max_iter: int = 500,
                   k_max: Optional[float] = None, extension: str = "zero") -> PhiSolution:
    """Principal solution ``Phi = z + c conj(z) + C[phi - c]`` on a periodic cell.

    ``phi = Phi_zbar`` solves ``phi = eta (1 + S phi)`` with the Beurling
    multiplier ``conj(k)/k``, iterated until the RMS update drops below
    ``tol``; ``c`` is the cell mean of phi.  Masked eta samples are replaced
    by zero (``extension="zero"``) or the harmonic extension of the valid
    samples (``"harmonic"``) before solving.
    """
    spec = eta.spec
    if not spec.periodic:
        raise ValueError("the grid solver needs a periodic grid")
    if extension == "zero":
        e = np.where(eta.mask, eta.values, 0.0)
    elif extension == "harmonic":
        e = harmonic_fill(eta)
    else:
        raise ValueError(f"unknown extension {extension!r}")
    k = float(np.abs(e).max())
    if k >= 1 or (k_max is not None and k > k_max):
        raise EllipticityError(f"sup|eta| = {k:.6g} is not below {1 if k_max is None else k_max}")

    kx, ky = wavenumbers(spec)
    kk = (kx + 1j * ky) * np.ones(spec.shape)
    nz = kk != 0
    beurling = np.where(nz, np.conj(kk) / np.where(nz, kk, 1), 0.0)
    cauchy = np.where(nz, 1 / (0.5j * np.where(nz, kk, 1)), 0.0)

    phi = e.copy()
    prev = np.inf
    growth = 0
    it = 0
    upd = 0.0
    for it in range(1, max_iter + 1):
        new = e * (1 + np.fft.ifft2(beurling * np.fft.fft2(phi)))
        upd = float(np.sqrt(np.mean(np.abs(new - phi) ** 2)))
        phi = new
        if upd < tol:
            break
        growth = growth + 1 if upd > prev else 0
        if growth >= 3:
            raise NeumannDivergenceError(f"update grew for 3 consecutive iterations (now {upd:.3e})")
        prev = upd
    else:
        raise NeumannDivergenceError(f"no convergence after {max_iter} iterations (update {upd:.3e})")

    c = complex(phi.mean())
    z = spec.mesh()
    periodic_part = np.fft.ifft2(cauchy * np.fft.fft2(phi - c))
    values = z + c * np.conj(z) + periodic_part

    pz, pzb = wirtinger_spectral(ComplexGridField(spec, periodic_part))
    phi_z = 1 + pz.values
    phi_zb = c + pzb.values
    pointwise = np.abs(phi_zb - e * phi_z) / (np.abs(phi_z) + RESIDUAL_FLOOR)
    jac = np.abs(phi_z) ** 2 - np.abs(phi_zb) ** 2
    if not np.all(jac > 0):
        raise NotHomeomorphicError("not homeomorphic on grid: discrete Jacobian changes sign")

    grid = ComplexGridField(spec, values)
    dz_grid = ComplexGridField(spec, phi_z)
    dzb_grid = ComplexGridField(spec, phi_zb)
    inv = invert_map(grid, check_orientation=False)

    def forward(p):
        return interpolate(grid, p)[0]

    def derivatives(p):
        return interpolate(dz_grid, p)[0], interpolate(dzb_grid, p)[0]

    return PhiSolution(
        "neumann_grid", forward, inv, float(pointwise[eta.mask].max() if eta.mask.any() else pointwise.max()),
        "positive", derivatives, iterations=it, grid=grid, image="grid image",
        info={"k": k, "mean_phi_zbar": [c.real, c.imag], "final_update": upd,
              "residual_all_nodes": float(pointwise.max()),
              "truncation_estimate": 10 * k ** it / (1 - k) if k > 0 else 0.0,
              "extension": extension})


# ---------------------------------------------------------------------------
# inversion


class GridInverse:
    """Inverse of a grid-sampled homeomorphism by seeded Newton iteration.

    Seeds come from the nearest image node (k-d tree); each Newton step uses
    the cubic interpolant and its derivatives.
    """

    def __init__(self, phi: ComplexGridField, tol: float = 1e-10, max_iter: int = 50):
        self.phi = phi
        self.tol = tol
        self.max_iter = max_iter
        self.scale = max(1.0, phi.sup_abs())
        z = phi.spec.mesh()
        self._nodes = z[phi.mask]
        img = phi.values[phi.mask]
        self._tree = cKDTree(np.column_stack([img.real, img.imag]))

    def solve(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(z, ok)``; ``ok`` is False outside the image or on non-convergence."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        shape = w.shape
        w = w.ravel()
        _, nearest = self._tree.query(np.column_stack([w.real, w.imag]))
        z = self._nodes[nearest].copy()
        spec = self.phi.spec
        lo = complex(spec.x_min, spec.y_min)
        hi_x = spec.x[-1]
        hi_y = spec.y[-1]
        done = np.zeros(w.size, dtype=bool)
        failed = ~np.isfinite(w)
        for _ in range(self.max_iter):
            active = ~(done | failed)
            if not active.any():
                break
            za = z[active]
            val, dx, dy, ok = interpolate_with_derivatives(self.phi, za)
            r = val - w[active]
            conv = ok & (np.abs(r) <= self.tol * self.scale)
            a, b, c, d = dx.real, dy.real, dx.imag, dy.imag
            det = a * d - b * c
            with np.errstate(all="ignore"):
                sx = (d * r.real - b * r.imag) / det
                sy = (-c * r.real + a * r.imag) / det
            step_ok = ok & np.isfinite(sx) & np.isfinite(sy)
            znew = za - (sx + 1j * sy)
            znew = np.clip(znew.real, lo.real, hi_x) + 1j * np.clip(znew.imag, lo.imag, hi_y)
            idx = np.nonzero(active)[0]
            done[idx[conv]] = True
            failed[idx[~ok | ~step_ok]] = True
            move = ~conv & step_ok
            z[idx[move]] = znew[move]
        ok = done & ~failed  # points still active after max_iter count as failures
        z =np.where(ok, z, np.nan + 0j)
        return z.reshape(shape), ok.reshape(shape)

    def __call__(self, w):
        z, ok = self.solve(w)
        if not np.all(ok):
            raise OutOfDomainError(f"{int((~ok).sum())} query point(s) outside the image or not converged")
        return z if np.ndim(w) else complex(z.ravel()[0])


def jacobian_sign(phi: ComplexGridField) -> str:
    dx, dy, m = partials_fd(phi)
    jac = (dx.real * dy.imag - dx.imag * dy.real)[m]
    if jac.size == 0:
        return "mixed"
    if np.all(jac > 0):
        return "positive"
    if np.all(jac < 0):
        return "negative"
    return "mixed"


def invert_map(phi_grid: ComplexGridField, tol: float = 1e-10, max_iter: int = 50,
               check_orientation: bool = True) -> GridInverse:
    if check_orientation:
        sign = jacobian_sign(phi_grid)
        if sign != "positive":
            raise NotHomeomorphicError(f"grid map is not orientation preserving (Jacobian sign {sign})")
    return GridInverse(phi_grid, tol, max_iter)
