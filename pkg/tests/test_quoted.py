import numpy as np
import pytest

import oracle_values as ov
from llconformal.conformal import eta_function, nu_values
from llconformal.fields import catalog, to_bold
from llconformal.quoted import (CONTROL_THRESHOLD, FLAG_THRESHOLD, discrepancy_report, orthotropic_axis_values,
                                quoted_orthotropic_eta, quoted_spacelike_bold_dzbar, quoted_spacelike_nu)

FLAGGED = {"maximal_spacelike.bold_A_zbar", "maximal_spacelike.nu_modulus", "p_orthotropic.eta"}


@pytest.fixture(scope="module")
def report():
    return {item.name: item for item in discrepancy_report()}


def test_every_item_reproduced(report):
    assert all(item.reproduced for item in report.values())


def test_flagged_items_are_large(report):
    assert FLAGGED <= set(report)
    for name in FLAGGED:
        assert report[name].kind == "flagged"
        assert report[name].deviation >= FLAG_THRESHOLD


def test_controls_are_tight(report):
    controls = [item for item in report.values() if item.kind == "control"]
    assert len(controls) >= 3
    assert all(item.deviation <= CONTROL_THRESHOLD for item in controls)


def test_items_serialise(report):
    d = report["p_orthotropic.eta"].to_dict()
    assert d["reproduced"] and d["kind"] == "flagged"


def test_spacelike_sign_and_factor():
    z = np.array([0.3 + 0.1j])
    b = to_bold(catalog("maximal_spacelike"))
    _, dzb = b.wirtinger(z)
    assert np.allclose(quoted_spacelike_bold_dzbar(z), -dzb, rtol=1e-12)
    nu, _ = nu_values(b, z)
    t2 = abs(z[0]) ** 2
    assert abs(quoted_spacelike_nu(z)[0]) == pytest.approx(2 * t2 / (1 - 2 * t2))
    assert abs(nu[0]) == pytest.approx(t2 / (1 - 2 * t2))


def test_orthotropic_quoted_eta_is_reciprocal():
    z = np.array([0.3 + 0.6j])
    eta = eta_function(to_bold(catalog("p_orthotropic", {"p": 4})))(z)
    assert eta[0] == pytest.approx(ov.ETA_ORTHOTROPIC4_AT_0P3_0P6I, abs=1e-15)
    assert quoted_orthotropic_eta(z, 4)[0] * eta[0] == pytest.approx(1.0, abs=1e-12)


def test_orthotropic_axis_limits():
    vals = orthotropic_axis_values()
    assert np.allclose(vals["near_imaginary_axis"], -1, atol=1e-6)
    assert np.allclose(vals["near_real_axis"], 1, atol=1e-6)
    assert np.all(np.abs(vals["diagonal"]) <= 1e-15)
