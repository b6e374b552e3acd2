"""Exit criteria of the toolkit, one test per criterion at its stated tolerance.

Each test is tagged ``acceptance(label=..., budget=...)``; conftest prints a
PASS/FAIL line per label after the run.  Budgets are wall-clock seconds and
are asserted inside the test.
"""

import time

import numpy as np
import pytest

import pipelines
from llconformal import verify as V
from llconformal.beltrami import closed_form_phi, smooth_cutoff, solve_phi_grid, solve_phi_radial
from llconformal.conformal import eta_from_nu, eta_function, gamma_quotient, nu_values
from llconformal.fields import catalog, monotonicity_audit, to_bold
from llconformal.grid import ComplexGridField, GridSpec
from llconformal.hodograph import coefficient_fd, factorize
from llconformal.quoted import discrepancy_report, orthotropic_axis_values


def disk_points(rng, n, r_lo, r_hi):
    return rng.uniform(r_lo, r_hi, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))


def wrapped_angle(a):
    return np.abs(np.angle(np.exp(1j * a)))


class Stopwatch:
    def __init__(self, budget):
        self.budget = budget
        self.start = time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.start
        assert elapsed < self.budget, f"took {elapsed:.2f}s, budget {self.budget}s"


@pytest.mark.acceptance(label="branch selection and quadratic", budget=1)
def test_branch_selection_and_quadratic():
    rng = np.random.default_rng(0)
    nu = 0.499 * np.sqrt(rng.uniform(0, 1, 10_000)) * np.exp(1j * rng.uniform(-np.pi, np.pi, 10_000))
    watch = Stopwatch(1)
    eta = eta_from_nu(nu)
    gamma, _ = gamma_quotient(nu, eta)
    watch.check()
    assert np.max(np.abs(nu + eta + np.conj(nu) * eta ** 2)) <= 1e-12
    assert np.all(np.abs(eta) < 1)
    assert np.max(wrapped_angle(np.angle(eta) - np.angle(nu) - np.pi)) <= 1e-10
    # gamma from the quotient formula against -conj(eta)
    assert np.max(np.abs(gamma + np.conj(eta))) <= 1e-12
    assert np.max(np.abs(np.abs(gamma) - np.abs(eta))) <= 1e-12


@pytest.mark.acceptance(label="p-Laplacian closed loop", budget=5)
@pytest.mark.parametrize("p", [1.5, 3.0, 4.0, 10.0])
def test_p_laplacian_closed_loop(p):
    watch = Stopwatch(5)
    d = np.sqrt(p - 1)
    eta = eta_function(to_bold(catalog("p_laplacian", {"p": p})))
    z = disk_points(np.random.default_rng(1), 1000, 0.05, 3.0)
    expected = -((1 - d) / (1 + d)) * z / np.conj(z)
    assert np.max(np.abs(eta(z) - expected)) <= 1e-10

    phi = solve_phi_radial(eta=eta, t_range=(0.1, 1.0), rho_hi=1.0)
    ring = disk_points(np.random.default_rng(2), 1000, 0.1, 1.0)
    assert np.max(np.abs(phi(ring) - np.abs(ring) ** (d - 1) * ring)) <= 1e-8
    watch.check()


@pytest.mark.acceptance(label="minimal-surface closed loop", budget=5)
def test_minimal_surface_closed_loop():
    watch = Stopwatch(5)
    eta = eta_function(to_bold(catalog("minimal_surface")))

    def closed(w):
        return 2 * w / (1 + np.sqrt(1 + 4 * np.abs(w) ** 2))

    radial = solve_phi_radial(eta=eta, t_range=(0.05, 2.0), rho_hi=float(closed(2.0)))
    z = disk_points(np.random.default_rng(3), 1000, 0.05, 2.0)
    assert np.max(np.abs(radial(z) - closed(z))) <= 1e-8

    phi = closed_form_phi("minimal_surface", eta=eta)
    F = phi(disk_points(np.random.default_rng(4), 1000, 0.0, 5.0))
    coeff, ok = V.quasilinear_coefficient(F, phi, eta)
    assert ok.all()
    assert np.max(np.abs(coeff - np.conj(F) ** 2)) <= 1e-6
    watch.check()


@pytest.mark.acceptance(label="PDE residuals and refinement", budget=30)
@pytest.mark.parametrize("make", [pipelines.scherk, pipelines.radial], ids=["scherk", "radial_p4"])
def test_pde_residuals(make):
    watch = Stopwatch(30)
    coarse, fine = make(256), make(512)
    for check in (lambda p: V.residual_divergence(p.A, p.u), lambda p: V.residual_complex_gradient(p.bold, p.u)):
        a, b = check(coarse), check(fine)
        assert a.rel_sup <= 5e-3
        assert V.refinement_ratio(a, b) >= 3
    watch.check()


@pytest.mark.acceptance(label="quasilinear reduction", budget=30)
@pytest.mark.parametrize("make", [pipelines.scherk, pipelines.radial], ids=["scherk", "radial_p4"])
def test_quasilinear_reduction(make):
    watch = Stopwatch(30)
    p = make(256)
    phi = p.phi()
    F = p.f.with_values(phi(p.f.values))
    assert V.residual_quasilinear(F, phi, p.eta).rel_sup <= 5e-3

    def nu_of(w):
        return nu_values(p.bold, w)[0]

    chain = V.residual_chain_rule(phi, p.f, nu_of, lambda w: np.conj(nu_of(w)))
    assert chain.reduction.abs_sup <= 1e-8
    watch.check()


@pytest.mark.acceptance(label="grid Beltrami solver", budget=60)
def test_grid_beltrami_solver():
    watch = Stopwatch(60)
    spec = GridSpec.square(-1.0, 1.0, 256, periodic=True)
    z = spec.mesh()

    identity = solve_phi_grid(ComplexGridField(spec, np.zeros(spec.shape)))
    assert np.array_equal(identity.grid.values, z)

    affine = solve_phi_grid(ComplexGridField(spec, np.full(spec.shape, 0.3 + 0j)))
    interior = np.abs(z) <= 0.9
    assert np.max(np.abs(affine.grid.values - (z + 0.3 * np.conj(z)))[interior]) <= 1e-8

    # minimal-surface eta cut off radially, so the radial solver sees the same equation
    eta = eta_function(to_bold(catalog("minimal_surface")))
    r = np.abs(z)
    cut = np.where(r > 0, eta(np.where(r > 0, z, 1)), 0) * smooth_cutoff(r, 0.4, 0.8)
    grid = solve_phi_grid(ComplexGridField(spec, cut))

    def profile(t):
        t = np.asarray(t, dtype=float)
        return np.real(eta(t + 0j)) * smooth_cutoff(t, 0.4, 0.8)

    radial = solve_phi_radial(profile, (0.02, 0.9))
    sample = disk_points(np.random.default_rng(5), 1000, 0.1, 0.7)
    assert V.conformal_equivalence(grid, radial, sample) <= 1e-3
    watch.check()


@pytest.mark.acceptance(label="factorization", budget=60)
def test_factorization():
    watch = Stopwatch(60)
    results = []
    for n in (128, 256):
        spec = GridSpec.square(-1.0, 1.0, n)
        r = np.abs(spec.mesh())
        F = ComplexGridField.from_function(spec, lambda w: (w + 0.2 * np.conj(w)) ** 2, (r >= 0.5) & (r <= 1.0))
        results.append(factorize(F, coefficient_fd(F)))
    coarse, fine = results
    assert coarse.holomorphy_residual <= 1e-2
    assert fine.holomorphy_residual <= coarse.holomorphy_residual or fine.holomorphy_residual <= 1e-12
    assert coarse.linear_residual.rel_sup <= 1e-2 and fine.linear_residual.rel_sup <= 1e-2
    watch.check()


@pytest.mark.acceptance(label="monotonicity audits", budget=5)
def test_monotonicity_audits():
    watch = Stopwatch(5)
    spec = GridSpec.square(-1.0, 1.0, 65)
    r = np.abs(spec.mesh())
    rep = monotonicity_audit(catalog("p_laplacian", {"p": 4}), spec, mask=(r >= 0.5) & (r <= 1.0))
    assert rep.delta_max == pytest.approx(2 * np.sqrt(3) / 4, abs=1e-4)

    ortho = monotonicity_audit(catalog("p_orthotropic", {"p": 4}), GridSpec.square(-1.0, 1.0, 33))
    assert ortho.delta_max == 0 and ortho.violation_points
    pts = np.array(ortho.violation_points)
    assert np.all(np.minimum(np.abs(pts.real), np.abs(pts.imag)) <= 1e-12)

    axes = orthotropic_axis_values()
    assert np.allclose(axes["near_real_axis"], 1, atol=1e-6)
    assert np.allclose(axes["near_imaginary_axis"], -1, atol=1e-6)
    assert np.all(np.abs(axes["diagonal"]) <= 1e-15)
    watch.check()


@pytest.mark.acceptance(label="discrepancy report", budget=5)
def test_discrepancy_report():
    flagged = {item.name: item for item in discrepancy_report() if item.kind == "flagged"}
    assert {"maximal_spacelike.bold_A_zbar", "maximal_spacelike.nu_modulus", "p_orthotropic.eta"} <= set(flagged)
    assert all(item.deviation >= 1e-2 for item in flagged.values())
