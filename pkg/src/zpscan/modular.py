"""Modular polynomials Phi_N: numeric evaluation, exact recovery, specialization.

Phi_N(X, Y) is the symmetric integer polynomial vanishing exactly on pairs of
j-invariants of N-cyclically-isogenous curves; its degree in X is psi(N) and
its roots over Y = j(tau) are the j-values of the psi(N) cyclic index-N
sublattices of Z + Z*tau.

Exact recovery interpolates: it samples psi(N)+1 points tau_m on the imaginary
axis, expands prod(X - j_sub) numerically at each, solves the Vandermonde
system in Y = j(tau_m) for every X-coefficient, rounds to integers, and
re-runs at doubled precision until the rounding is stable; the result is then
verified by symmetry and by numeric evaluation at random points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .analytic import PrecisionContext, j_invariant, to_complex
from .errors import DegenerateInput, DomainError, NonConvergence
from .exactpoly import IntPoly, RatFunc
from .isogeny import cyclic_sublattices, psi

MAX_EXACT_LEVEL = 5
_RECOVERY_BITS_CAP = 4096


@dataclass(frozen=True)
class ModularPolynomial:
    """Integer coefficient table of Phi_N; coeffs maps (i, j) -> c of X^i Y^j."""

    level: int
    coeffs: dict
    provenance: str = "recovered"

    @property
    def degree(self) -> int:
        return max((i for (i, _) in self.coeffs), default=0)

    def is_symmetric(self) -> bool:
        return all(self.coeffs.get((j, i), 0) == c for (i, j), c in self.coeffs.items())

    def eval_exact(self, x, y):
        """Evaluate over int/Fraction arguments exactly."""
        acc = 0 if isinstance(x, int) and isinstance(y, int) else Fraction(0)
        for (i, j), c in self.coeffs.items():
            acc += c * x ** i * y ** j
        return acc

    def eval_mp(self, x, y, ctx: PrecisionContext = None) -> mp.mpc:
        ctx = ctx or PrecisionContext()
        x = to_complex(x)
        y = to_complex(y)
        with ctx.workprec():
            acc = mp.mpc(0)
            for (i, j), c in self.coeffs.items():
                acc += c * x ** i * y ** j
            return +acc

    def as_x_poly_in(self, y):
        """Coefficients in X (ascending) with Y specialized to an exact value."""
        deg = self.degree
        out = [0] * (deg + 1)
        for (i, j), c in self.coeffs.items():
            out[i] += c * y ** j
        return out


def sublattice_j_values(N: int, tau, ctx: PrecisionContext = None) -> list[mp.mpc]:
    """j-invariants of the psi(N) cyclic index-N sublattices of Z + Z*tau."""
    ctx = ctx or PrecisionContext()
    tau = to_complex(tau)
    if not mp.im(tau) > 0:
        raise DomainError("sublattice j-values require Im(tau) > 0")
    from .periods import reduce_tau

    vals = []
    with ctx.workprec():
        for sub in cyclic_sublattices(N):
            # sublattice Z*(a + b*tau) + Z*(d*tau): tau' = d*tau/(a + b*tau),
            # reduced before evaluation (j is modular invariant; the series
            # conditioning is not)
            tp = sub.d * tau / (sub.a + sub.b * tau)
            tp, _ = reduce_tau(tp, ctx)
            vals.append(j_invariant(tp, ctx))
    return vals


def phi_eval_numeric(N: int, x, tau, ctx: PrecisionContext = None) -> mp.mpc:
    """prod over cyclic index-N sublattices of (x - j(sublattice)).

    Vanishes (within tol times the product scale) exactly when x is the
    j-invariant of a curve N-cyclically-isogenous to the one with invariant
    j(tau); in particular at x = j(N*tau).
    """
    ctx = ctx or PrecisionContext()
    x = to_complex(x)
    with ctx.workprec():
        acc = mp.mpc(1)
        for jv in sublattice_j_values(N, tau, ctx):
            acc *= x - jv
        return +acc


def _expand_monic(roots) -> list[mp.mpc]:
    coeffs = [mp.mpc(1)]
    for r in roots:
        nxt = [mp.mpc(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] -= c * r
            nxt[i + 1] += c
        coeffs = nxt
    return coeffs


def _recover_at(N: int, bits: int) -> dict:
    ctx = PrecisionContext(bits=bits)
    n = psi(N)
    with ctx.workprec():
        taus = [mp.mpc(0, 1 + mp.mpf(m) / 7) for m in range(n + 1)]
        ys = [j_invariant(t, ctx) for t in taus]
        rows = [_expand_monic(sublattice_j_values(N, t, ctx)) for t in taus]
        V = mp.matrix(n + 1, n + 1)
        for m in range(n + 1):
            acc = mp.mpc(1)
            for jj in range(n + 1):
                V[m, jj] = acc
                acc *= ys[m]
        table = {}
        max_err = mp.mpf(0)
        for k in range(n + 1):
            rhs = mp.matrix([rows[m][k] for m in range(n + 1)])
            sol = mp.lu_solve(V, rhs)
            for jj in range(n + 1):
                c = sol[jj]
                ci = int(mp.nint(mp.re(c)))
                err = abs(c - ci)
                max_err = max(max_err, err)
                if ci != 0:
                    table[(k, jj)] = ci
        return table, max_err


_EXACT_CACHE: dict[int, ModularPolynomial] = {}


def phi_recover_exact(N: int, ctx: PrecisionContext = None) -> ModularPolynomial:
    """Recover the exact integer table of Phi_N (N <= 5 by default policy).

    Doubles the working precision until two consecutive recoveries agree and
    the rounding error is far below 1/2, then validates symmetry and the
    vanishing Phi_N(j(tau), j(N*tau)) ~ 0 at sample points.
    """
    ctx = ctx or PrecisionContext()
    if N < 1:
        raise DomainError("level must be >= 1")
    if N > MAX_EXACT_LEVEL:
        raise DomainError(
            f"exact recovery is limited to level <= {MAX_EXACT_LEVEL}; "
            "use phi_eval_numeric for larger levels"
        )
    cached = _EXACT_CACHE.get(N)
    if cached is not None:
        return cached
    bits = max(ctx.bits, 192)
    prev = None
    while bits <= _RECOVERY_BITS_CAP:
        table, err = _recover_at(N, bits)
        if prev is not None and table == prev and err < mp.mpf(2) ** (-bits // 4):
            phi = ModularPolynomial(level=N, coeffs=table, provenance="recovered")
            _validate_recovery(phi, ctx)
            _EXACT_CACHE[N] = phi
            return phi
        prev = table
        bits *= 2
    raise NonConvergence(
        f"Phi_{N} coefficients did not stabilize below {_RECOVERY_BITS_CAP} bits"
    )


def _validate_recovery(phi: ModularPolynomial, ctx: PrecisionContext):
    if phi.level > 1 and not phi.is_symmetric():
        raise NonConvergence(f"recovered Phi_{phi.level} is not symmetric")
    check_ctx = PrecisionContext(bits=max(ctx.bits, 256))
    with check_ctx.workprec():
        for m in range(5):
            tau = mp.mpc(mp.mpf(1) / (m + 3), mp.mpf(11) / 10 + mp.mpf(m) / 9)
            jt = j_invariant(tau, check_ctx)
            jnt = j_invariant(phi.level * tau, check_ctx)
            val = phi.eval_mp(jt, jnt, check_ctx)
            scale = max(mp.mpf(1), abs(jt), abs(jnt)) ** (2 * phi.degree)
            if abs(val) > check_ctx.tol * scale:
                raise NonConvergence(
                    f"recovered Phi_{phi.level} fails the isogenous-pair vanishing check"
                )


def phi_specialize(phi: ModularPolynomial, f: RatFunc, g: RatFunc) -> IntPoly:
    """Numerator of Phi(f(t), g(t)) with denominators cleared, content-normalized.

    Raises DegenerateInput when the specialization is identically zero, which
    means the parametrized curve lies inside the modular-curve stratum.
    """
    dx = phi.degree
    dy = max((j for (_, j) in phi.coeffs), default=0)
    fn_pow = _powers(f.num, dx)
    fd_pow = _powers(f.den, dx)
    gn_pow = _powers(g.num, dy)
    gd_pow = _powers(g.den, dy)
    acc = IntPoly([])
    for (i, j), c in phi.coeffs.items():
        term = fn_pow[i] * fd_pow[dx - i] * gn_pow[j] * gd_pow[dy - j]
        acc = acc + term * c
    if acc.is_zero():
        raise DegenerateInput(
            "specialization of the modular polynomial vanishes identically: "
            "the curve lies in the special subvariety"
        )
    return acc.primitive()


def _powers(p: IntPoly, up_to: int) -> list[IntPoly]:
    out = [IntPoly([1])]
    for _ in range(up_to):
        out.append(out[-1] * p)
    return out


def phi_x_minus_y() -> ModularPolynomial:
    """The level-1 polynomial X - Y (j-equality stratum)."""
    return ModularPolynomial(level=1, coeffs={(1, 0): 1, (0, 1): -1}, provenance="supplied")
