"""Symbolic reference values for the test suite, computed without the package.

Differentiates the bold structure fields symbolically in (x, y), solves the
eta quadratic exactly and evaluates closed forms in exact arithmetic.  The
printed values are frozen into tests/oracle_values.py; rerun after any
change to the definitions and compare.

    python3 scripts/derive_oracles.py
"""

from __future__ import annotations

import json

import sympy as sp

x, y = sp.symbols("x y", real=True)
t = sp.symbols("t", positive=True)
z = x + sp.I * y


def wirtinger(expr):
    dx, dy = sp.diff(expr, x), sp.diff(expr, y)
    return (dx - sp.I * dy) / 2, (dx + sp.I * dy) / 2


def bold(field):
    """conj(A(2 conj z)) with A given as a function of (x, y)."""
    return sp.conjugate(field(2 * x, -2 * y))


def nu_at(expr, point):
    bz, bzb = wirtinger(expr)
    subs = {x: sp.re(point), y: sp.im(point)}
    bz, bzb = sp.nsimplify(sp.simplify(bz.subs(subs))), sp.nsimplify(sp.simplify(bzb.subs(subs)))
    return sp.simplify(-bzb / (2 * sp.re(bz)))


def small_root(nu):
    e = sp.symbols("e")
    roots = sp.solve(nu + e + sp.conjugate(nu) * e ** 2, e)
    return min(roots, key=lambda r: abs(complex(r)))


def minimal(a, b):
    r2 = a ** 2 + b ** 2
    return (a + sp.I * b) / sp.sqrt(1 + r2)


def spacelike(a, b):
    r2 = a ** 2 + b ** 2
    return (a + sp.I * b) / sp.sqrt(1 - r2)


def p_laplacian(p):
    def f(a, b):
        return (a ** 2 + b ** 2) ** ((p - 2) / 2) * (a + sp.I * b)
    return f


def p_orthotropic(p):
    def f(a, b):
        return sp.sign(a) * sp.Abs(a) ** (p - 1) + sp.I * sp.sign(b) * sp.Abs(b) ** (p - 1)
    return f


def main():
    out = {}
    ms = bold(minimal)
    out["bold_minimal_at_half"] = ms.subs({x: sp.Rational(1, 2), y: 0})
    out["minimal_at_3_4i"] = minimal(sp.Integer(3), sp.Integer(4))
    out["spacelike_at_0p6"] = spacelike(sp.Rational(3, 5), sp.Integer(0))
    out["bold_spacelike_at_quarter"] = bold(spacelike).subs({x: sp.Rational(1, 4), y: 0})

    nu_ms = nu_at(ms, sp.Integer(1))
    out["nu_minimal_at_1"] = nu_ms
    out["eta_minimal_at_1"] = small_root(nu_ms)
    out["gamma_denominator_at_third"] = sp.sqrt(1 - 4 * nu_ms ** 2)
    nu_p4 = nu_at(bold(p_laplacian(sp.Integer(4))), sp.Integer(1))
    out["nu_plaplacian4_at_1"] = nu_p4
    out["eta_plaplacian4_at_1"] = small_root(nu_p4)

    # maximal spacelike along the positive real axis, as a function of t
    sl = bold(spacelike)
    bz, bzb = wirtinger(sl)
    # every quantity is real for t < 1/2, so conjugation acts trivially
    nu_t = sp.simplify((-bzb / (2 * bz)).subs({x: t, y: 0}).replace(sp.conjugate, lambda a: a))
    out["nu_spacelike_profile"] = nu_t
    out["nu_spacelike_sup_on_0p45"] = sp.Abs(nu_t.subs(t, sp.Rational(9, 20)))
    out["spacelike_degenerate_radius"] = sp.solve(sp.Eq(sp.Abs(nu_t), sp.Rational(1, 2)), t)

    # radial p-Laplacian monotonicity: |A_zbar| / Re A_z is constant
    pl4 = p_laplacian(sp.Integer(4))(x, y)
    az, azb = wirtinger(pl4)
    ratio = sp.simplify((sp.Abs(azb) / sp.re(az)).subs({x: t, y: 0}))
    out["plaplacian4_delta_max"] = sp.sqrt(1 - ratio ** 2)

    # p-orthotropic at a first-quadrant point
    po = bold(p_orthotropic(sp.Integer(4)))
    point = sp.Rational(3, 10) + sp.I * sp.Rational(6, 10)
    nu_po = nu_at(po, point)
    out["nu_orthotropic4_at_0p3_0p6i"] = nu_po
    out["eta_orthotropic4_at_0p3_0p6i"] = small_root(nu_po)

    out["minimal_phi_at_1"] = 2 / (1 + sp.sqrt(5))
    out["plaplacian4_delta"] = sp.sqrt(3)
    out["plaplacian4_coefficient"] = (1 - sp.sqrt(3)) / (1 + sp.sqrt(3))

    printable = {}
    for k, v in out.items():
        if isinstance(v, list):
            printable[k] = [str(sp.nsimplify(e)) for e in v] + [float(e) for e in v]
        elif v.free_symbols:
            printable[k] = str(sp.simplify(v))
        else:
            c = complex(sp.N(v, 30))
            printable[k] = [str(sp.nsimplify(v)), repr(c.real), repr(c.imag)]
    print(json.dumps(printable, indent=1))


if __name__ == "__main__":
    main()
