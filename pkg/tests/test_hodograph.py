import numpy as np
import pytest

import pipelines
from llconformal.errors import EllipticityError
from llconformal.grid import ComplexGridField, GridSpec
from llconformal.hodograph import coefficient_fd, factorize, padded_periodic


def annulus_field(n, fn, r0=0.5, r1=1.0):
    spec = GridSpec.square(-1.0, 1.0, n)
    r = np.abs(spec.mesh())
    return ComplexGridField.from_function(spec, fn, (r >= r0) & (r <= r1))


def manufactured(z):
    return (z + 0.2 * np.conj(z)) ** 2


def test_padded_grid_shares_nodes():
    spec = GridSpec.square(-1.0, 1.0, 33)
    big = padded_periodic(spec, 8)
    assert big.periodic and big.nx == 49
    assert np.allclose(big.x[8:41], spec.x, rtol=0, atol=1e-15)


def test_coefficient_fd_recovers_constant():
    F = annulus_field(65, manufactured)
    c = coefficient_fd(F)
    assert np.max(np.abs(c.valid() - 0.2)) <= 1e-12


def test_holomorphic_input_is_idempotent():
    spec = GridSpec.square(-1.0, 1.0, 48)
    F = ComplexGridField.from_function(spec, lambda z: z ** 2 + 2 * z)
    fa = factorize(F, lambda z: 0 * z)
    assert np.max(np.abs(fa.chi.values - spec.mesh())) <= 1e-10
    assert fa.holomorphy_residual <= 1e-12 and not fa.failed
    assert fa.composition_error <= 1e-10


@pytest.mark.parametrize("n", [64, 128])
def test_manufactured_composition(n):
    F = annulus_field(n, manufactured)
    fa = factorize(F, coefficient_fd(F))
    assert fa.holomorphy_residual <= 1e-2
    assert fa.linear_residual.rel_sup <= 1e-2
    assert fa.composition_error <= 1e-6
    assert not fa.failed


def test_wrong_coefficient_is_flagged():
    F = annulus_field(64, manufactured)
    fa = factorize(F, lambda z: 0 * z)
    assert fa.failed and fa.holomorphy_residual > 0.05


def test_coefficient_too_large():
    F = annulus_field(32, manufactured)
    with pytest.raises(EllipticityError):
        factorize(F, lambda z: 0.5 + 0 * z, k_max=0.4)


def test_coefficient_grid_must_match():
    F = annulus_field(32, manufactured)
    other = ComplexGridField(GridSpec.square(0, 1, 32), np.zeros((32, 32)))
    with pytest.raises(ValueError):
        factorize(F, other)


def test_scherk_conventions():
    p = pipelines.scherk(64)
    phi = p.phi()
    F = p.f.with_values(phi(p.f.values))

    def value_coeff(w):
        return -np.conj(p.eta(phi.inverse(w)))

    fa = factorize(F, lambda z: value_coeff(phi(p.solution.complex_gradient(z))), value_coeff=value_coeff)
    assert fa.holomorphy_residual <= 5e-2
    linear, conjugated = fa.conventions["linear"], fa.conventions["conjugated"]
    assert linear.rel_sup <= 1e-2
    assert conjugated.rel_sup > 10 * linear.rel_sup
    assert set(fa.manifest()) >= {"holomorphy_residual", "linear_residual", "failed", "chi"}
