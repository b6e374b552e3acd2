import csv
import json

import numpy as np
import pytest

import oracle_values as ov
from llconformal.cli import EXIT_DEGENERATE, EXIT_OK, EXIT_USAGE, main, parse_region
from llconformal.grid import ComplexGridField, GridSpec, read_field_csv, write_field_csv


def run(tmp_path, *argv):
    code = main(["--out", str(tmp_path), *argv])
    return code


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


class TestAnalyze:
    def test_p_laplacian(self, tmp_path):
        assert run(tmp_path, "analyze", "--field", "p_laplacian", "--param", "p=4",
                   "--region", "annulus:0.5,1", "--n", "64") == EXIT_OK
        rep = load(tmp_path, "analyze.json")
        assert rep["monotonicity"]["delta_max"] == pytest.approx(ov.PLAPLACIAN4_DELTA_MAX, abs=1e-4)
        assert rep["ellipticity"]["uniformly_elliptic"]
        assert rep["config"]["field"] == "p_laplacian" and rep["config"]["param"] == ["p=4"]

    def test_p_orthotropic_axes(self, tmp_path):
        assert run(tmp_path, "analyze", "--field", "p_orthotropic", "--param", "p=4",
                   "--region", "square:-1,1", "--n", "32") == EXIT_OK
        mono = load(tmp_path, "analyze.json")["monotonicity"]
        assert mono["delta_max"] == 0 and mono["n_violations"] > 0
        pts = np.array(mono["violation_points"])
        assert np.all(np.min(np.abs(pts), axis=1) < 1e-12)

    def test_identity(self, tmp_path):
        assert run(tmp_path, "analyze", "--field", "identity", "--n", "16") == EXIT_OK
        rep = load(tmp_path, "analyze.json")
        assert rep["monotonicity"]["K"] == 1.0
        with open(tmp_path / "nu_eta.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows and all(float(r["re_nu"]) == 0 and float(r["im_nu"]) == 0 for r in rows)

    def test_degenerate_everywhere(self, tmp_path):
        # the bold spacelike field is undefined outside |z| < 1/2
        assert run(tmp_path, "analyze", "--field", "maximal_spacelike", "--region", "annulus:0.6,0.9",
                   "--n", "16") == EXIT_DEGENERATE


def test_eta_csv(tmp_path):
    assert run(tmp_path, "eta", "--field", "minimal_surface", "--region", "square:0,1", "--n", "8") == EXIT_OK
    with open(tmp_path / "eta.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["x", "y", "re_nu", "im_nu", "re_eta", "im_eta", "class"]
    at_one = next(r for r in rows if float(r["x"]) == 1 and float(r["y"]) == 0)
    assert float(at_one["re_eta"]) == pytest.approx(ov.ETA_MINIMAL_AT_1, abs=1e-15)
    assert at_one["class"] == "elliptic"


class TestSolvePhi:
    def test_radial_minimal_surface(self, tmp_path):
        assert run(tmp_path, "solve-phi", "--field", "minimal_surface", "--method", "radial",
                   "--t", "0.05,2", "--n", "32") == EXIT_OK
        rep = load(tmp_path, "solve_phi.json")
        assert rep["closed_form_max_abs_diff"] <= 1e-8
        assert rep["round_trip"] <= 1e-6
        assert rep["solution"]["method"] == "radial_ode"
        assert read_field_csv(tmp_path / "phi.csv").n_valid > 0

    def test_grid_constant(self, tmp_path):
        assert run(tmp_path, "solve-phi", "--eta", "const:0.3", "--method", "grid", "--n", "32") == EXIT_OK
        rep = load(tmp_path, "solve_phi.json")
        assert rep["affine_max_abs_diff"] <= 1e-8
        assert rep["solution"]["jacobian_sign"] == "positive"

    def test_grid_constant_too_large(self, tmp_path):
        assert run(tmp_path, "solve-phi", "--eta", "const:1.2", "--method", "grid", "--n", "16") == EXIT_DEGENERATE

    def test_grid_field_cutoff(self, tmp_path):
        assert run(tmp_path, "solve-phi", "--field", "minimal_surface", "--method", "grid",
                   "--region", "disk:0.8", "--extension", "cutoff", "--n", "32") == EXIT_OK

    def test_radial_needs_radial_eta(self, tmp_path):
        assert run(tmp_path, "solve-phi", "--field", "p_orthotropic", "--param", "p=4",
                   "--method", "radial", "--t", "0.1,0.4") == EXIT_USAGE


class TestVerify:
    def test_harmonic(self, tmp_path):
        assert run(tmp_path, "verify", "--field", "p_laplacian", "--param", "p=2", "--solution", "harmonic",
                   "--n", "32") == EXIT_OK
        reps = load(tmp_path, "verify.json")["reports"]
        assert reps and all(r["rel_sup"] <= 1e-10 for r in reps if r["identity_id"] != "hodograph_linear")

    def test_radial_selected_checks(self, tmp_path):
        assert run(tmp_path, "verify", "--field", "p_laplacian", "--param", "p=4", "--solution", "radial",
                   "--checks", "div_form,complex_gradient,chain_rule", "--n", "128") == EXIT_OK
        reps = {r["identity_id"]: r for r in load(tmp_path, "verify.json")["reports"]}
        assert set(reps) == {"div_form", "complex_gradient", "chain_rule", "reduction_condition"}
        assert all(r["rel_sup"] <= 5e-3 for r in reps.values())

    def test_skips_without_closed_form(self, tmp_path):
        assert run(tmp_path, "verify", "--field", "p_orthotropic", "--param", "p=4", "--solution", "linear",
                   "--a", "0.3+0.4j", "--n", "16") == EXIT_OK
        doc = load(tmp_path, "verify.json")
        assert set(doc["skipped"]) == {"chain_rule", "quasilinear", "hodograph"}

    @pytest.mark.parametrize("extra", [[], ["--solution", "scherk", "--checks", "bogus"],
                                       ["--solution", "radial"]])
    def test_usage_errors(self, tmp_path, extra):
        assert run(tmp_path, "verify", "--field", "minimal_surface", *extra) == EXIT_USAGE


class TestFactorize:
    def write_input(self, tmp_path, n=48):
        spec = GridSpec.square(-1.0, 1.0, n)
        r = np.abs(spec.mesh())
        F = ComplexGridField.from_function(spec, lambda z: (z + 0.2 * np.conj(z)) ** 2, (r >= 0.5) & (r <= 1))
        write_field_csv(tmp_path / "F.csv", F)
        return tmp_path / "F.csv"

    def test_manufactured(self, tmp_path):
        path = self.write_input(tmp_path)
        assert run(tmp_path, "factorize", "--input", str(path), "--k-max", "0.8") == EXIT_OK
        man = load(tmp_path, "factorize.json")["factorization"]
        assert man["holomorphy_residual"] <= 1e-2 and not man["failed"]
        for name in ("chi.csv", "g.csv", "h.csv"):
            assert (tmp_path / name).exists()

    def test_k_max_exceeded(self, tmp_path):
        path = self.write_input(tmp_path)
        assert run(tmp_path, "factorize", "--input", str(path), "--k-max", "0.1") == EXIT_DEGENERATE

    def test_missing_input(self, tmp_path):
        assert run(tmp_path, "factorize") == EXIT_USAGE
        assert run(tmp_path, "factorize", "--input", str(tmp_path / "nope.csv")) == EXIT_USAGE


class TestConfigAndDeterminism:
    def test_byte_identical_rerun(self, tmp_path):
        argv = ["analyze", "--field", "minimal_surface", "--region", "disk:1", "--n", "24"]
        assert run(tmp_path, *argv) == EXIT_OK
        first = [(tmp_path / name).read_bytes() for name in ("analyze.json", "nu_eta.csv")]
        assert run(tmp_path, *argv) == EXIT_OK
        assert first == [(tmp_path / name).read_bytes() for name in ("analyze.json", "nu_eta.csv")]

    def test_config_file_and_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nfield = p_laplacian\nparam = p=4\nn = 12\nregion = annulus:0.5,1\n",
                       encoding="utf-8")
        assert main(["--out", str(tmp_path), "analyze", "--config", str(cfg), "--n", "20"]) == EXIT_OK
        conf = load(tmp_path, "analyze.json")["config"]
        assert conf["n"] == 20 and conf["field"] == "p_laplacian" and conf["param"] == ["p=4"]

    def test_global_flags_before_subcommand(self, tmp_path):
        assert main(["--n", "10", "--out", str(tmp_path), "analyze", "--field", "identity"]) == EXIT_OK
        assert load(tmp_path, "analyze.json")["grid"]["nx"] == 11

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("field\n", encoding="utf-8")
        assert main(["--out", str(tmp_path), "analyze", "--config", str(cfg)]) == EXIT_USAGE

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["analyze", "--field", "nope"],
                                      ["analyze", "--field", "p_laplacian"],
                                      ["analyze", "--n", "3", "--field", "identity"],
                                      ["analyze", "--field", "identity", "--region", "blob:1"]])
    def test_usage(self, tmp_path, argv):
        assert exit_code(["--out", str(tmp_path), *argv]) == EXIT_USAGE


def exit_code(argv):
    """main's return value, or the code argparse exits with."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def test_parse_region():
    spec, mask = parse_region("annulus:0.5,1", 20)
    assert spec.nx == 21 and spec.x_min == -1 and mask.sum() > 0
    spec, _ = parse_region("square:-1,1", 16, periodic=True)
    assert spec.nx == 16 and spec.periodic
