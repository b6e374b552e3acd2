"""Classical solutions of the catalog equations with analytic gradients.

Gradients are returned in complex form ``u_x + i u_y``; the complex gradient
``u_z = conj(grad)/2`` is derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import CATALOG_IDS


@dataclass(frozen=True)
class ReferenceSolution:
    equation_id: str
    name: str
    u: Callable
    grad_u: Callable
    region: str
    sample: Callable  # (rng, n) -> interior points
    notes: str = ""

    def complex_gradient(self, z):
        return 0.5 * np.conj(self.grad_u(np.asarray(z, dtype=complex)))

    def default_box(self) -> tuple[float, float, float, float]:
        """Bounding box of the natural test region (x_min, x_max, y_min, y_max)."""
        return _BOXES[self.name]


_BOXES = {"linear": (-1.0, 1.0, -1.0, 1.0), "harmonic": (-1.0, 1.0, -1.0, 1.0),
          "scherk": (-1.2, 1.2, -1.2, 1.2), "radial": (-1.0, 1.0, -1.0, 1.0)}


def _square(half):
    def sample(rng, n):
        return rng.uniform(-half, half, n) + 1j * rng.uniform(-half, half, n)
    return sample


def _annulus(r0, r1):
    def sample(rng, n):
        return rng.uniform(r0, r1, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    return sample


def _linear(equation_id: str, a: complex) -> ReferenceSolution:
    a = complex(a)
    if equation_id == "maximal_spacelike" and not abs(a) < 1:
        raise ValueError("maximal spacelike needs |a| < 1 (gradient inside the unit disk)")
    if equation_id == "p_orthotropic" and (a.real < 0 or a.imag < 0):
        raise ValueError("p-orthotropic needs a gradient in the closed first quadrant")

    def u(z):
        z = np.asarray(z, dtype=complex)
        return np.real(np.conj(a) * z)

    def grad(z):
        return np.full(np.shape(z), a, dtype=complex)

    return ReferenceSolution(equation_id, "linear", u, grad, "plane", _square(1.0),
                             f"u = Re(conj(a) z), a = {a}")


def _scherk() -> ReferenceSolution:
    def u(z):
        z = np.asarray(z, dtype=complex)
        return np.log(np.cos(z.real) / np.cos(z.imag))

    def grad(z):
        z = np.asarray(z, dtype=complex)
        return -np.tan(z.real) + 1j * np.tan(z.imag)

    return ReferenceSolution("minimal_surface", "scherk", u, grad, "|x|, |y| < pi/2", _square(1.2),
                             "Scherk surface u = log(cos x / cos y)")


def _radial(p: float) -> ReferenceSolution:
    alpha = (p - 2) / (p - 1)

    def u(z):
        return np.abs(np.asarray(z, dtype=complex)) ** alpha

    def grad(z):
        z = np.asarray(z, dtype=complex)
        return alpha * np.abs(z) ** (alpha - 2) * z

    return ReferenceSolution("p_laplacian", "radial", u, grad, "z != 0 (tested on 0.5 <= |z| <= 1)",
                             _annulus(0.5, 1.0), f"u = |z|^((p-2)/(p-1)), p = {p}")


def _harmonic(equation_id: str) -> ReferenceSolution:
    def u(z):
        z = np.asarray(z, dtype=complex)
        return z.real ** 2 - z.imag ** 2

    def grad(z):
        return 2 * np.conj(np.asarray(z, dtype=complex))

    return ReferenceSolution(equation_id, "harmonic", u, grad, "plane", _square(1.0), "u = x^2 - y^2")


def reference(equation_id: str, name: str, **params) -> ReferenceSolution:
    """Look up a reference solution.

    ``linear`` (parameter ``a``, default 0.3+0.4i) exists for every catalog
    equation; ``scherk`` for the minimal surface; ``radial`` (parameter p)
    for the p-Laplacian with p != 2; ``harmonic`` for the identity field and
    the p-Laplacian at p = 2.
    """
    if equation_id not in CATALOG_IDS:
        raise ValueError(f"unknown equation {equation_id!r}")
    if name == "linear":
        return _linear(equation_id, params.get("a", 0.3 + 0.4j))
    if name == "scherk" and equation_id == "minimal_surface":
        return _scherk()
    if name == "radial" and equation_id == "p_laplacian":
        p = float(params.get("p", 4.0))
        if p <= 1 or p == 2:
            raise ValueError("radial solution needs p > 1, p != 2")
        return _radial(p)
    if name == "harmonic" and (equation_id == "identity"
                               or (equation_id == "p_laplacian" and float(params.get("p", 2.0)) == 2.0)):
        return _harmonic(equation_id)
    raise ValueError(f"no reference solution {name!r} for {equation_id!r} with {params}")


def gradient_audit(sol: ReferenceSolution, n_points: int = 100, seed: int = 0, step: float = 1e-3) -> float:
    """Max relative deviation of ``grad_u`` from 5-point differences of ``u``."""
    rng = np.random.default_rng(seed)
    z = sol.sample(rng, n_points)

    def d(e):
        return (8 * (sol.u(z + e) - sol.u(z - e)) - (sol.u(z + 2 * e) - sol.u(z - 2 * e))) / (12 * step)

    fd = d(step) + 1j * d(1j * step)
    g = sol.grad_u(z)
    return float(np.max(np.abs(fd - g) / np.maximum(1.0, np.abs(g))))
