"""Command-line front end.

Subcommands: analyze, eta, solve-phi, verify, factorize.  Every run writes
a JSON report (sorted keys, embedding the resolved configuration) and, where
relevant, CSV grid fields into ``--out``.

Exit codes: 0 success, 1 usage error or failed computation, 2 degeneracy
(empty elliptic set, or a coefficient reaching modulus 1).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .beltrami import closed_form_phi, smooth_cutoff, solve_phi_grid, solve_phi_radial
from .conformal import (CLASS_NAMES, PointClass, compute_conformal, eta_function, ellipticity_report,
                        nu_values)
from .errors import ConformalError, EllipticityError
from .fields import CATALOG_IDS, catalog, monotonicity_audit, parse_params, to_bold
from .grid import ComplexGridField, GridSpec, read_field_csv, write_field_csv
from .hodograph import coefficient_fd, factorize
from .solutions import reference
from . import verify as V

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def parse_region(text: str, n: int, periodic: bool = False):
    """``annulus:a,b | disk:R | square:lo,hi | rect:x0,x1,y0,y1`` -> (GridSpec, mask).

    ``n`` is the number of intervals per axis, so the grid has n+1 nodes
    (n on a periodic grid) and symmetric regions contain both axes.
    """
    kind, _, rest = text.partition(":")
    try:
        nums = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise UsageError(f"bad region {text!r}") from None
    pts = n if periodic else n + 1
    if kind == "annulus" and len(nums) == 2 and 0 <= nums[0] < nums[1]:
        a, b = nums
        spec = GridSpec(-b, b, -b, b, pts, pts, periodic)
        r = np.abs(spec.mesh())
        return spec, (r >= a) & (r <= b)
    if kind == "disk" and len(nums) == 1 and nums[0] > 0:
        R = nums[0]
        spec = GridSpec(-R, R, -R, R, pts, pts, periodic)
        return spec, np.abs(spec.mesh()) <= R
    if kind == "square" and len(nums) == 2 and nums[0] < nums[1]:
        spec = GridSpec(nums[0], nums[1], nums[0], nums[1], pts, pts, periodic)
        return spec, np.ones(spec.shape, dtype=bool)
    if kind == "rect" and len(nums) == 4 and nums[0] < nums[1] and nums[2] < nums[3]:
        spec = GridSpec(nums[0], nums[1], nums[2], nums[3], pts, pts, periodic)
        return spec, np.ones(spec.shape, dtype=bool)
    raise UsageError(f"bad region {text!r}; use annulus:a,b, disk:R, square:lo,hi or rect:x0,x1,y0,y1")


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected 'lo,hi', got {text!r}") from None
    return a, b


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _field(args):
    if args.field is None:
        raise UsageError("--field is required")
    try:
        return catalog(args.field, parse_params(args.param))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_eta_csv(path: Path, spec: GridSpec, nu: np.ndarray, eta: np.ndarray, cls: np.ndarray) -> None:
    X, Y = np.meshgrid(spec.x, spec.y)
    cols = [X.ravel(), Y.ravel(), nu.T.real.ravel(), nu.T.imag.ravel(), eta.T.real.ravel(), eta.T.imag.ravel()]
    names = [CLASS_NAMES[PointClass(int(c))] for c in cls.T.ravel()]
    lines = ["x,y,re_nu,im_nu,re_eta,im_eta,class"]
    for row, name in zip(np.column_stack(cols).tolist(), names):
        lines.append(",".join(f"{v:.17g}" for v in row) + f",{name}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def _analysis(args):
    A = _field(args)
    bold = to_bold(A)
    spec, region = parse_region(args.region, args.n)
    data = compute_conformal(bold, ComplexGridField(spec, np.zeros(spec.shape), region))
    return A, bold, spec, region, data


def cmd_analyze(args) -> int:
    A, bold, spec, region, data = _analysis(args)
    ell = ellipticity_report(data, region)
    mono = monotonicity_audit(bold, spec, delta=args.delta, mask=region)
    out = _out(args)
    write_eta_csv(out / "nu_eta.csv", spec, data.nu.values, np.where(data.eta.mask, data.eta.values, np.nan),
                  data.classification)
    write_json(out / "analyze.json", {"config": _config(args), "field": A.label, "domain_N": bold.domain_N.describe(),
                                      "grid": spec.to_dict(), "ellipticity": ell.to_dict(),
                                      "monotonicity": mono.to_dict(), "k_bound": data.k_bound})
    return EXIT_DEGENERATE if ell.fractions["elliptic"] == 0 else EXIT_OK


def cmd_eta(args) -> int:
    A, bold, spec, region, data = _analysis(args)
    out = _out(args)
    write_eta_csv(out / "eta.csv", spec, data.nu.values, np.where(data.eta.mask, data.eta.values, np.nan),
                  data.classification)
    ell = ellipticity_report(data, region)
    write_json(out / "eta.json", {"config": _config(args), "field": A.label, "grid": spec.to_dict(),
                                  "fractions": ell.fractions})
    return EXIT_DEGENERATE if ell.fractions["elliptic"] == 0 else EXIT_OK


def _parse_eta_spec(text: str):
    kind, _, val = text.partition(":")
    if kind != "const":
        raise UsageError(f"--eta supports const:<complex>, got {text!r}")
    try:
        return complex(val.replace(" ", ""))
    except ValueError:
        raise UsageError(f"bad constant in --eta {text!r}") from None


def cmd_solve_phi(args) -> int:
    out = _out(args)
    report = {"config": _config(args)}
    if args.method == "radial":
        A = _field(args)
        eta = eta_function(to_bold(A))
        t_lo, t_hi = _pair(args.t)
        closed = None
        try:
            closed = closed_form_phi(A.id, A.params, eta=eta)
        except ValueError:
            pass
        rho_hi = float(abs(closed(t_hi))) if closed is not None else None
        sol = solve_phi_radial(eta=eta, t_range=(t_lo, t_hi), rho_hi=rho_hi, tol=args.tol)
        spec = GridSpec(-t_hi, t_hi, -t_hi, t_hi, args.n + 1, args.n + 1)
        z = spec.mesh()
        ring = (np.abs(z) >= t_lo) & (np.abs(z) <= t_hi)
        grid = ComplexGridField(spec, np.where(ring, sol(np.where(ring, z, t_hi)), np.nan), ring)
        rng = np.random.default_rng(args.seed)
        zs = rng.uniform(t_lo, t_hi, 1000) * np.exp(1j * rng.uniform(-np.pi, np.pi, 1000))
        report["round_trip"] = float(np.max(np.abs(sol.inverse(sol(zs)) - zs)))
        if closed is not None:
            report["closed_form_max_abs_diff"] = float(np.max(np.abs(sol(zs) - closed(zs))))
    else:
        if args.eta is not None:
            k = _parse_eta_spec(args.eta)
            spec, _ = parse_region(args.region, args.n, periodic=True)
            field = ComplexGridField(spec, np.full(spec.shape, k))
            affine = lambda z: z + k * np.conj(z)  # noqa: E731
        else:
            A = _field(args)
            eta = eta_function(to_bold(A))
            spec, region = parse_region(args.region, args.n, periodic=True)
            z = spec.mesh()
            vals = eta(z)
            if args.extension == "cutoff":
                R = float(np.abs(z[region]).max())
                vals = np.where(np.isfinite(vals), vals, 0.0) * smooth_cutoff(np.abs(z), R, 2 * R)
                field = ComplexGridField(spec, vals)
            else:
                field = ComplexGridField(spec, vals, region)
            affine = None
        ext = "zero" if args.extension == "cutoff" else args.extension
        sol = solve_phi_grid(field, tol=args.tol, k_max=args.k_max, extension=ext)
        grid = sol.grid
        if affine is not None:
            report["affine_max_abs_diff"] = float(np.max(np.abs(grid.values - affine(spec.mesh()))))
    write_field_csv(out / "phi.csv", grid)
    report["solution"] = sol.manifest()
    report["grid"] = grid.spec.to_dict()
    write_json(out / "solve_phi.json", report)
    return EXIT_OK


def _verify_setup(args):
    A = _field(args)
    if args.solution is None:
        raise UsageError("--solution is required")
    params = dict(A.params)
    if args.a is not None:
        params["a"] = complex(args.a.replace(" ", ""))
    try:
        sol = reference(A.id, args.solution, **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.region is not None:
        spec, region = parse_region(args.region, args.n)
    else:
        x0, x1, y0, y1 = sol.default_box()
        spec = GridSpec(x0, x1, y0, y1, args.n + 1, args.n + 1)
        region = np.ones(spec.shape, dtype=bool)
        if sol.name == "radial":
            r = np.abs(spec.mesh())
            region = (r >= 0.5) & (r <= 1.0)
    return A, sol, spec, region


CHECKS = ("div_form", "complex_gradient", "chain_rule", "quasilinear", "hodograph")


def cmd_verify(args) -> int:
    A, sol, spec, region = _verify_setup(args)
    checks = CHECKS if args.checks == "all" else tuple(c.strip() for c in args.checks.split(","))
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise UsageError(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)}")
    bold = to_bold(A)
    u = ComplexGridField.from_function(spec, sol.u, region)
    f = ComplexGridField.from_function(spec, sol.complex_gradient, region)
    eta = eta_function(bold)
    reports, skipped = [], {}

    phi = None
    if {"chain_rule", "quasilinear", "hodograph"} & set(checks):
        try:
            phi = closed_form_phi(A.id, A.params, eta=eta)
        except ValueError:
            skipped.update({c: "no closed-form Phi for this field" for c in ("chain_rule", "quasilinear", "hodograph")
                            if c in checks})

    for check in checks:
        if check in skipped:
            continue
        if check == "div_form":
            reports.append(V.residual_divergence(A, u).to_dict())
        elif check == "complex_gradient":
            reports.append(V.residual_complex_gradient(bold, u).to_dict())
        elif check == "chain_rule":
            def nu_of(w):
                return nu_values(bold, w)[0]
            cr = V.residual_chain_rule(phi, f, nu_of, lambda w: np.conj(nu_of(w)), lambda w: -np.conj(eta(w)))
            for rep in (cr.chain, cr.reduction):
                d = rep.to_dict()
                d["details"].update({"nz_min": cr.nz_min, "coefficient_vs_gamma": cr.coefficient_vs_gamma,
                                     "f_source": "analytic"})
                reports.append(d)
        elif check == "quasilinear":
            F = f.with_values(phi(np.where(f.mask, f.values, 0.0)))
            rep = V.residual_quasilinear(F, phi, eta).to_dict()
            rep["details"]["f_source"] = "analytic"
            reports.append(rep)
        elif check == "hodograph":
            F = f.with_values(phi(np.where(f.mask, f.values, 0.0)))

            def value_coeff(w):
                return -np.conj(eta(phi.inverse(w)))

            fa = factorize(F, lambda z: value_coeff(phi(sol.complex_gradient(z))), value_coeff=value_coeff,
                           k_max=args.k_max)
            reports.append(fa.holomorphy.to_dict())
            reports.append(fa.linear_residual.to_dict())
            for rep in fa.conventions.values():
                reports.append(rep.to_dict())

    write_json(_out(args) / "verify.json", {"config": _config(args), "field": A.label, "solution": sol.name,
                                            "grid": spec.to_dict(), "reports": reports, "skipped": skipped})
    return EXIT_OK


def cmd_factorize(args) -> int:
    if args.input is None:
        raise UsageError("--input is required")
    F = read_field_csv(args.input)
    value_coeff = None
    if args.field is not None:
        A = _field(args)
        eta = eta_function(to_bold(A))
        phi = closed_form_phi(A.id, A.params, eta=eta)

        def value_coeff(w):
            return -np.conj(eta(phi.inverse(w)))

        coeff = F.with_values(value_coeff(np.where(F.mask, F.values, 0.0)))
        source = "field"
    else:
        coeff = coefficient_fd(F)
        source = "difference quotient of F"
    fa = factorize(F, coeff, value_coeff=value_coeff, k_max=args.k_max, tol=args.tol)
    out = _out(args)
    write_field_csv(out / "chi.csv", fa.chi)
    write_field_csv(out / "g.csv", fa.g_grid)
    write_field_csv(out / "h.csv", fa.h)
    manifest = fa.manifest()
    manifest["coefficient_source"] = source
    write_json(out / "factorize.json", {"config": _config(args), "factorization": manifest})
    if fa.failed:
        print(f"factorization failed: holomorphy residual {fa.holomorphy_residual:.3e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands repeat the flags without defaults so values given before the subcommand survive
        def d(value):
            return argparse.SUPPRESS if suppress else value

        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--out", default=d("."), help="output directory")
        g.add_argument("--n", type=int, default=d(128), help="grid intervals per axis")
        g.add_argument("--tol", type=float, default=d(1e-10))
        g.add_argument("--seed", type=int, default=d(0))
        g.add_argument("--config", default=d(None), help="file of key=value lines (command-line flags win)")
        return g

    top, common = global_flags(False), global_flags(True)

    def field_args(p):
        p.add_argument("--field", choices=CATALOG_IDS)
        p.add_argument("--param", action="append", default=[], help="key=value, repeatable")

    parser = _Parser(prog="llconformal", description=__doc__.splitlines()[0], parents=[top])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="ellipticity and monotonicity audit")
    field_args(p)
    p.add_argument("--region", default="square:-1,1")
    p.add_argument("--delta", type=float, help="test a given delta instead of searching delta_max")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eta", parents=[common], help="nu and eta on a grid as CSV")
    field_args(p)
    p.add_argument("--region", default="square:-1,1")
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("solve-phi", parents=[common], help="homeomorphic solution of Phi_zbar = eta Phi_z")
    field_args(p)
    p.add_argument("--method", choices=("radial", "grid"), default="radial")
    p.add_argument("--t", default="0.05,2", help="radius range lo,hi for the radial method")
    p.add_argument("--eta", help="const:<complex> coefficient for the grid method")
    p.add_argument("--region", default="square:-1,1", help="periodic cell (grid method)")
    p.add_argument("--k-max", type=float, dest="k_max")
    p.add_argument("--extension", choices=("zero", "harmonic", "cutoff"), default="zero")
    p.set_defaults(func=cmd_solve_phi)

    p = sub.add_parser("verify", parents=[common], help="residuals along the reduction chain")
    field_args(p)
    p.add_argument("--solution", help="linear, scherk, radial or harmonic")
    p.add_argument("--a", help="gradient of the linear solution, e.g. 0.3+0.4j")
    p.add_argument("--checks", default="all", help=f"all or a comma list of {', '.join(CHECKS)}")
    p.add_argument("--region")
    p.add_argument("--k-max", type=float, dest="k_max", default=0.95)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("factorize", parents=[common], help="F = h o chi factorization of a grid field")
    field_args(p)
    p.add_argument("--input", help="CSV grid field F")
    p.add_argument("--k-max", type=float, dest="k_max", default=0.95)
    p.set_defaults(func=cmd_factorize)
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"config line {raw!r} is not key=value")
        tokens += [f"--{key.strip().replace('_', '-')}", val.strip()]
    return tokens


def _insert_config(argv: list[str]) -> list[str]:
    """Splice config-file flags in right after the subcommand so explicit flags win."""
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            continue
        rest = argv[:i] + argv[i + (1 if "=" in tok else 2):]
        cmd = next((j for j, t in enumerate(rest) if t in ("analyze", "eta", "solve-phi", "verify", "factorize")),
                   None)
        if cmd is None:
            return argv
        return rest[:cmd + 1] + _config_tokens(path) + rest[cmd + 1:] + ["--config", path]
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_insert_config(argv))
        if args.n < 7:
            raise UsageError("--n must be at least 7")
        return args.func(args)
    except UsageError as exc:
        print(f"llconformal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EllipticityError as exc:
        print(f"llconformal: degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConformalError, OSError, ValueError) as exc:
        print(f"llconformal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
