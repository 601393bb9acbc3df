from fractions import Fraction

import mpmath as mp
import pytest

from zpscan.errors import DegenerateInput, Inconclusive, MissingAssignment
from zpscan.polyrel import (
    IdealI0,
    MultiPoly,
    build_R_degenerate,
    det_poly,
    evaluate,
    not_in_I0,
)


def test_multipoly_arithmetic():
    x = MultiPoly.variable(1, 1, 1)
    y = MultiPoly.variable(2, 1, 1)
    p = x * y + MultiPoly.constant(Fraction(2)) * x
    assert p.degree() == 2
    assert not p.is_homogeneous()
    q = x * y - x * y
    assert q.is_zero()
    r = (x + y) * (x - y)
    assert r.degree() == 2 and len(r.terms) == 2  # x^2 - y^2


def test_multipoly_evaluate_exact_and_numeric(ctx):
    x = MultiPoly.variable(1, 1, 1)
    y = MultiPoly.variable(2, 1, 1)
    p = x * y
    assert p.evaluate({(1, 1, 1): Fraction(2), (2, 1, 1): Fraction(3)}) == 6
    val = evaluate(p, {(1, 1, 1): mp.mpc(2), (2, 1, 1): mp.mpc(3)}, ctx)
    assert abs(val - 6) < ctx.tol
    with pytest.raises(MissingAssignment):
        p.evaluate({(1, 1, 1): 1})
    assert MultiPoly.zero().evaluate({}) == 0


def test_det_quadric_and_ideal():
    gen = det_poly(3) + MultiPoly.constant(-1)
    point = {(1, 1, 3): Fraction(2), (1, 2, 3): Fraction(5), (2, 1, 3): Fraction(1), (2, 2, 3): Fraction(3)}
    assert gen.evaluate(point) == 0
    ideal = IdealI0(smooth_coords=frozenset([3]))
    gens = ideal.generators()
    assert len(gens) == 1 and gens[0].degree() == 2


def test_degenerate_polynomial_identity_gauge():
    # identity gauges, a = c = 1, b = 0: the two monomials with opposite signs
    R = build_R_degenerate(1, 1, 0, 1, None, None, k_sing=1, k_cm=3)
    assert R.is_homogeneous() and R.degree() == 2
    monos = {m: c for m, c in R.terms.items()}
    key1 = ((((1, 1, 1), 1), ((2, 1, 3), 1)))
    key2 = ((((1, 1, 3), 1), ((2, 1, 1), 1)))
    assert set(monos) == {tuple(sorted(key1)), tuple(sorted(key2))}
    vals = sorted(monos.values())
    assert vals == [-1, 1]


def test_degenerate_polynomial_support():
    pi = [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(5)]]
    R = build_R_degenerate(1, Fraction(2), Fraction(1), Fraction(3), pi, pi, k_sing=1, k_cm=3)
    assert R.is_homogeneous() and R.degree() == 2
    for mono in R.terms:
        vars_ = [v for v, _ in mono]
        assert len(vars_) == 2
        assert any(v[2] == 1 and v[1] == 1 for v in vars_)
        assert any(v[2] == 3 and v[1] == 1 for v in vars_)
    with pytest.raises(DegenerateInput):
        build_R_degenerate(1, 0, 1, 1, pi, pi)
    with pytest.raises(DegenerateInput):
        build_R_degenerate(3, 1, 1, 1, pi, pi)


def test_not_in_I0_constant_and_generator(ctx):
    ideal = IdealI0(smooth_coords=frozenset([3]))
    one = MultiPoly.constant(Fraction(1))
    cert = not_in_I0(one, ideal, attempts=3, ctx=ctx, seed=0)
    assert cert.attempts_used == 1
    gen = det_poly(3) + MultiPoly.constant(-1)
    with pytest.raises(Inconclusive):
        not_in_I0(gen, ideal, attempts=8, ctx=ctx, seed=1)
    with pytest.raises(DegenerateInput):
        not_in_I0(MultiPoly.zero(), ideal, attempts=3, ctx=ctx)


def test_not_in_I0_degenerate_formula_certificate(ctx):
    # nonsingular random gauges: a witness point should appear almost at once
    pi_s = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    pi_c = [[Fraction(1), Fraction(1)], [Fraction(2), Fraction(3)]]
    R = build_R_degenerate(1, Fraction(3), Fraction(1), Fraction(2), pi_s, pi_c)
    ideal = IdealI0(smooth_coords=frozenset([3]))
    cert = not_in_I0(R, ideal, attempts=3, ctx=ctx, seed=7)
    assert cert.attempts_used <= 3
    assert cert.value != 0
    # the certificate point satisfies the det-1 constraint where it matters
    pt = cert.point
    full = {}
    for (i, j, k), v in pt.items():
        full[(i, j, k)] = v
    if all((i, j, 3) in full for i in (1, 2) for j in (1, 2)):
        det = full[(1, 1, 3)] * full[(2, 2, 3)] - full[(1, 2, 3)] * full[(2, 1, 3)]
        assert det == 1


def test_scaling_does_not_change_verdicts(ctx):
    pi_s = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    pi_c = [[Fraction(1), Fraction(1)], [Fraction(2), Fraction(3)]]
    R = build_R_degenerate(1, Fraction(3), Fraction(1), Fraction(2), pi_s, pi_c)
    R5 = R.scaled(Fraction(5))
    ideal = IdealI0(smooth_coords=frozenset([3]))
    c1 = not_in_I0(R, ideal, attempts=3, ctx=ctx, seed=3)
    c2 = not_in_I0(R5, ideal, attempts=3, ctx=ctx, seed=3)
    assert c1.attempts_used == c2.attempts_used
    assert c2.value == 5 * c1.value


def test_homogeneity_structural():
    x = MultiPoly.variable(1, 1, 1)
    y = MultiPoly.variable(2, 2, 2)
    assert (x * y).is_homogeneous()
    assert not (x * y + x).is_homogeneous()
    assert MultiPoly.zero().is_homogeneous()
    assert (x * y * x).degree() == 3
