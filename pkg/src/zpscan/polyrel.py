"""Sparse multivariate polynomials in the value-matrix variables X[i,j,k].

Variables are (i, j, k) triples: matrix position (i, j) in {1,2}^2 of the
value matrix of coordinate k.  Coefficients are exact (int / Fraction) where
the inputs are exact, and mpmath mpc otherwise; the two kinds mix by coercing
to mpc.

The relation polynomials built here:

* degenerate branch (degree 2): the bilinear form whose vanishing expresses
  the collapse of one H-entry.  Sign convention: the cofactor row
  (-T[2,1], T[1,1]) of the singular-coordinate matrix is pushed through the
  triangular isogeny matrix [[a, 0], [b, c]] and paired with a column of the
  smooth-coordinate matrix; this is the sign for which the form actually
  vanishes on consistent data (the alternative sign pattern, with both
  products taken positively, cuts a different hypersurface).
* paired product (degree 4): r2*s2*H1^(1)*H2^(1) - r1*s1*H1^(2)*H2^(2).
* double-CM product (degree 8): H1*H2*H3*H4 - p*q*r*s*det(X_k3)^2*det(X_k2)^2,
  homogenized by the squared determinant quadrics, which evaluate to 1 on the
  determinant-one locus.

Non-membership in the ideal generated by the smooth-coordinate determinant
quadrics is certified by a witness point: a random rational point of the
det = 1 locus where the polynomial does not vanish.  Exhausting the sampling
budget raises Inconclusive and never claims membership.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .analytic import PrecisionContext, to_complex
from .errors import DegenerateInput, Inconclusive, MissingAssignment

Var = tuple  # (i, j, k)


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def _to_mpc(c) -> mp.mpc:
    if isinstance(c, Fraction):
        return mp.mpc(c.numerator) / c.denominator
    return to_complex(c)


def _cadd(x, y):
    if _is_exact(x) and _is_exact(y):
        return x + y
    return _to_mpc(x) + _to_mpc(y)


def _cmul(x, y):
    if _is_exact(x) and _is_exact(y):
        return x * y
    return _to_mpc(x) * _to_mpc(y)


class MultiPoly:
    """Sparse polynomial: monomial (sorted ((i,j,k), exp) pairs) -> coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                self._accumulate(mono, c)

    def _accumulate(self, mono, c):
        cur = self.terms.get(mono)
        new = c if cur is None else _cadd(cur, c)
        if _is_exact(new):
            if new == 0:
                self.terms.pop(mono, None)
                return
        elif new == 0:
            self.terms.pop(mono, None)
            return
        self.terms[mono] = new

    @classmethod
    def zero(cls) -> "MultiPoly":
        return cls()

    @classmethod
    def constant(cls, c) -> "MultiPoly":
        p = cls()
        p._accumulate((), c)
        return p

    @classmethod
    def variable(cls, i: int, j: int, k: int, coeff=1) -> "MultiPoly":
        p = cls()
        p._accumulate((((i, j, k), 1),), coeff)
        return p

    @classmethod
    def linear(cls, pairs) -> "MultiPoly":
        """Linear form from (coeff, (i, j, k)) pairs."""
        p = cls()
        for coeff, var in pairs:
            p._accumulate(((tuple(var), 1),), coeff)
        return p

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = MultiPoly()
        out.terms = dict(self.terms)
        for mono, c in other.terms.items():
            out._accumulate(mono, c)
        return out

    def __neg__(self) -> "MultiPoly":
        out = MultiPoly()
        out.terms = {m: _cmul(c, -1) for m, c in self.terms.items()}
        return out

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scaled(other)
        out = MultiPoly()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                merged = dict(m1)
                for var, e in m2:
                    merged[var] = merged.get(var, 0) + e
                mono = tuple(sorted(merged.items()))
                out._accumulate(mono, _cmul(c1, c2))
        return out

    __rmul__ = __mul__

    def scaled(self, c) -> "MultiPoly":
        out = MultiPoly()
        if (c == 0) if _is_exact(c) else (_to_mpc(c) == 0):
            return out
        out.terms = {m: _cmul(cc, c) for m, cc in self.terms.items()}
        return out

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            for var, _ in mono:
                out.add(var)
        return out

    def monomial_degrees(self) -> set:
        return {sum(e for _, e in mono) for mono in self.terms}

    def degree(self) -> int:
        degs = self.monomial_degrees()
        return max(degs) if degs else -1

    def is_homogeneous(self) -> bool:
        return len(self.monomial_degrees()) <= 1

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def coeff_norm(self) -> mp.mpf:
        if not self.terms:
            return mp.mpf(0)
        return max(abs(_to_mpc(c)) for c in self.terms.values())

    def evaluate(self, assignment: dict, exact: bool = None):
        """Value at assignment {(i,j,k): value}; exact when inputs permit it."""
        needed = self.variables()
        missing = [v for v in needed if v not in assignment]
        if missing:
            raise MissingAssignment(f"unassigned variables: {sorted(missing)}")
        if exact is None:
            exact = self.is_exact() and all(
                _is_exact(assignment[v]) for v in needed
            )
        total = Fraction(0) if exact else mp.mpc(0)
        for mono, c in self.terms.items():
            term = c if exact else _to_mpc(c)
            for var, e in mono:
                val = assignment[var]
                term = term * (val ** e if exact else _to_mpc(val) ** e)
            total = total + term
        return total

    def __repr__(self):
        def vname(var):
            i, j, k = var
            return f"X{i}{j}_{k}"

        parts = []
        for mono, c in sorted(self.terms.items()):
            mono_s = "*".join(
                vname(v) + (f"^{e}" if e > 1 else "") for v, e in mono
            ) or "1"
            parts.append(f"({c})*{mono_s}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class IdealI0:
    """Ideal generated by det(X[.,.,k]) - 1 over the smooth coordinates k."""

    smooth_coords: frozenset

    def generators(self) -> list[MultiPoly]:
        return [det_poly(k) + MultiPoly.constant(-1) for k in sorted(self.smooth_coords)]


def det_poly(k: int) -> MultiPoly:
    """The determinant quadric X11*X22 - X12*X21 of coordinate k."""
    return MultiPoly.variable(1, 1, k) * MultiPoly.variable(2, 2, k) - MultiPoly.variable(
        1, 2, k
    ) * MultiPoly.variable(2, 1, k)


def matrix_polys(pi, k: int) -> list[list[MultiPoly]]:
    """Entries of Pi * X_k as linear forms; pi is a 2x2 of scalars (or None = identity)."""
    if pi is None:
        return [
            [MultiPoly.variable(i + 1, j + 1, k) for j in range(2)] for i in range(2)
        ]
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            row.append(
                MultiPoly.linear(
                    [(_entry(pi, i, 0), (1, j + 1, k)), (_entry(pi, i, 1), (2, j + 1, k))]
                )
            )
        rows.append(row)
    return rows


def column_polys(pi, k: int) -> tuple[MultiPoly, MultiPoly]:
    """First-column linear forms of Pi * X_k for a singular coordinate (j = 1 only)."""
    if pi is None:
        return MultiPoly.variable(1, 1, k), MultiPoly.variable(2, 1, k)
    t1 = MultiPoly.linear([(_entry(pi, 0, 0), (1, 1, k)), (_entry(pi, 0, 1), (2, 1, k))])
    t2 = MultiPoly.linear([(_entry(pi, 1, 0), (1, 1, k)), (_entry(pi, 1, 1), (2, 1, k))])
    return t1, t2


def _entry(pi, i, j):
    if isinstance(pi, mp.matrix):
        return pi[i, j]
    return pi[i][j]


def _g_polys(a, b, c, t1: MultiPoly, t2: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    """Cofactor row (-t2, t1) pushed through [[a, 0], [b, c]]."""
    g1 = t2.scaled(_neg(a)) + t1.scaled(b)
    g2 = t1.scaled(c)
    return g1, g2


def _g_polys_top(a, b, c, m12: MultiPoly, m22: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    """Cofactor row (m22, -m12) pushed through [[a, 0], [b, c]]."""
    g1 = m22.scaled(a) + m12.scaled(_neg(b))
    g2 = m12.scaled(_neg(c))
    return g1, g2


def _neg(c):
    return -c if _is_exact(c) else -_to_mpc(c)


def h_pair_polys(a, b, c, t1, t2, h_cols) -> tuple[MultiPoly, MultiPoly]:
    """(H1, H2) = (-t2, t1) * [[a,0],[b,c]] * h, paired with h's two columns."""
    g1, g2 = _g_polys(a, b, c, t1, t2)
    H1 = g1 * h_cols[0][0] + g2 * h_cols[1][0]
    H2 = g1 * h_cols[0][1] + g2 * h_cols[1][1]
    return H1, H2


def build_R_degenerate(
    vanishing: int,
    a,
    b,
    c,
    pi_sing,
    pi_cm,
    k_sing: int = 1,
    k_cm: int = 3,
) -> MultiPoly:
    """Degree-2 relation polynomial for a collapsed H-entry of a singular/CM pair.

    vanishing = 1 encodes H1 = 0 (the r = 0 branch, pairing with the first
    column of the smooth coordinate), vanishing = 2 encodes H2 = 0 (s = 0,
    second column).  Monomial support is contained in
    {X[i,1,k_sing] * X[m,col,k_cm]}.
    """
    if (a == 0 if _is_exact(a) else _to_mpc(a) == 0) or (
        c == 0 if _is_exact(c) else _to_mpc(c) == 0
    ):
        raise DegenerateInput("isogeny matrix must have a, c nonzero")
    if vanishing not in (1, 2):
        raise DegenerateInput("vanishing index must be 1 or 2")
    t1, t2 = column_polys(pi_sing, k_sing)
    h_cols = matrix_polys(pi_cm, k_cm)
    H1, H2 = h_pair_polys(a, b, c, t1, t2, h_cols)
    return H1 if vanishing == 1 else H2


@dataclass(frozen=True)
class PairConfig:
    """One singular/CM isogenous pair, as needed by the polynomial builders."""

    a: object
    b: object
    c: object
    pi_sing: object
    pi_cm: object
    k_sing: int
    k_cm: int
    r: int
    s: int


def build_R_pair_product(pair1: PairConfig, pair2: PairConfig) -> MultiPoly:
    """Degree-4 combined relation r2*s2*H1^(1)*H2^(1) - r1*s1*H1^(2)*H2^(2)."""
    if pair1.r * pair1.s == 0 or pair2.r * pair2.s == 0:
        raise DegenerateInput(
            "combined product requires nonzero homology integers; "
            "use build_R_degenerate for the collapsed branch"
        )
    hs = []
    for pair in (pair1, pair2):
        t1, t2 = column_polys(pair.pi_sing, pair.k_sing)
        h_cols = matrix_polys(pair.pi_cm, pair.k_cm)
        hs.append(h_pair_polys(pair.a, pair.b, pair.c, t1, t2, h_cols))
    (H1a, H2a), (H1b, H2b) = hs
    lhs = (H1a * H2a).scaled(pair2.r * pair2.s)
    rhs = (H1b * H2b).scaled(pair1.r * pair1.s)
    return lhs - rhs


@dataclass(frozen=True)
class SecondWayConfig:
    """Double-CM pair data for the degree-8 relation polynomial."""

    a: object
    b: object
    c: object
    pi_source: object  # gauge of the source CM coordinate (k2)
    pi_target: object  # gauge of the target CM coordinate (k3)
    k_source: int
    k_target: int
    p: int
    q: int
    r: int
    s: int


def second_way_h_polys(cfg: SecondWayConfig):
    """The four H polynomials (bilinear in the two coordinate matrices)."""
    h3 = matrix_polys(cfg.pi_target, cfg.k_target)
    h2 = matrix_polys(cfg.pi_source, cfg.k_source)
    gb1, gb2 = _g_polys(cfg.a, cfg.b, cfg.c, h3[0][0], h3[1][0])
    gt1, gt2 = _g_polys_top(cfg.a, cfg.b, cfg.c, h3[0][1], h3[1][1])
    H1 = gb1 * h2[0][0] + gb2 * h2[1][0]
    H2 = gb1 * h2[0][1] + gb2 * h2[1][1]
    H3 = gt1 * h2[0][0] + gt2 * h2[1][0]
    H4 = gt1 * h2[0][1] + gt2 * h2[1][1]
    return H1, H2, H3, H4


def build_R_second_way(cfg: SecondWayConfig) -> MultiPoly:
    """Degree-8 relation H1*H2*H3*H4 - p*q*r*s*det(X_target)^2*det(X_source)^2."""
    H1, H2, H3, H4 = second_way_h_polys(cfg)
    lhs = H1 * H2 * H3 * H4
    dt = det_poly(cfg.k_target)
    ds = det_poly(cfg.k_source)
    rhs = (dt * dt * ds * ds).scaled(cfg.p * cfg.q * cfg.r * cfg.s)
    return lhs - rhs


@dataclass(frozen=True)
class NonMembershipCertificate:
    """Witness point on the det = 1 locus where the polynomial does not vanish."""

    point: dict
    value: object
    attempts_used: int


def not_in_I0(
    R: MultiPoly,
    ideal: IdealI0,
    attempts: int = 5,
    ctx: PrecisionContext = None,
    seed: int = 0,
) -> NonMembershipCertificate:
    """Certify R not in the determinant ideal by a rational witness point.

    Samples points with det(X_k) = 1 for every smooth k (three free rational
    entries, the fourth solved) and unconstrained rational entries elsewhere.
    A point where |R| exceeds sqrt(tol) * max-coefficient certifies
    non-membership, since every element of the ideal vanishes there.  Raises
    Inconclusive when the budget is exhausted; that is not a membership claim.
    """
    ctx = ctx or PrecisionContext()
    if R.is_zero():
        raise DegenerateInput("the zero polynomial is in every ideal")
    rng = random.Random(seed)
    needed = R.variables()
    coords = sorted({k for (_, _, k) in needed})
    exact = R.is_exact()
    norm = R.coeff_norm()
    threshold = ctx.sqrt_tol * max(norm, mp.mpf(1))
    for attempt in range(1, attempts + 1):
        assignment = {}
        for k in coords:
            if k in ideal.smooth_coords:
                x11 = _nonzero_rational(rng)
                x12 = _rational(rng)
                x21 = _rational(rng)
                x22 = (1 + x12 * x21) / x11
                full = {(1, 1, k): x11, (1, 2, k): x12, (2, 1, k): x21, (2, 2, k): x22}
                for var in needed:
                    if var[2] == k:
                        assignment[var] = full[var]
            else:
                for var in needed:
                    if var[2] == k:
                        assignment[var] = _rational(rng)
        if exact:
            value = R.evaluate(assignment, exact=True)
            if value != 0:
                return NonMembershipCertificate(
                    point=assignment, value=value, attempts_used=attempt
                )
        else:
            with ctx.workprec():
                value = R.evaluate(assignment, exact=False)
                if abs(value) > threshold:
                    return NonMembershipCertificate(
                        point=assignment, value=+value, attempts_used=attempt
                    )
    raise Inconclusive(
        f"no witness point found in {attempts} attempts; membership NOT certified"
    )


def evaluate(R: MultiPoly, assignment: dict, ctx: PrecisionContext = None):
    """Module-level evaluation helper (workprec-managed for numeric inputs)."""
    ctx = ctx or PrecisionContext()
    if R.is_exact() and all(_is_exact(v) for v in assignment.values()):
        return R.evaluate(assignment, exact=True)
    with ctx.workprec():
        return +R.evaluate(assignment, exact=False)


def _rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def _nonzero_rational(rng: random.Random) -> Fraction:
    while True:
        f = _rational(rng)
        if f != 0:
            return f
