"""Precision-managed complex kernels: AGM, Eisenstein q-series, j, root finding.

All operations take a PrecisionContext and do their arithmetic inside an
mpmath workprec block, so the global mpmath precision of the caller is never
disturbed.  Values in and out are mpmath mpf/mpc; inputs may be ints, floats,
decimal strings or (re, im) pairs and are coerced with to_complex().

Conventions
-----------
* One archimedean embedding: every quantity is a single complex number.
  Conjugate inputs give conjugate runs; there is no automatic loop over
  embeddings.
* Polynomial coefficient lists are ascending: coeffs[k] is the coefficient
  of x**k.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import mpmath as mp

from .errors import DegenerateInput, DomainError, NonConvergence

ComplexValue = mp.mpc

DEFAULT_BITS = 256

_GUARD_BITS = 32


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision, tolerance and series budget for the analytic kernels.

    tol defaults to 2**(-bits/2): half the mantissa is reserved as slack for
    accumulated rounding, so a residual below tol is meaningful evidence and a
    residual above sqrt(tol) is meaningful failure.
    """

    bits: int = DEFAULT_BITS
    tol: mp.mpf = None
    max_terms: int = 10 ** 6

    def __post_init__(self):
        if self.bits < 64:
            raise DomainError(f"precision must be at least 64 bits, got {self.bits}")
        if self.tol is None:
            object.__setattr__(self, "tol", mp.mpf(2) ** (-(self.bits // 2)))
        if self.tol <= 0:
            raise DomainError("tolerance must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be positive")

    def workprec(self):
        """mpmath context manager running at this precision plus guard bits."""
        return mp.workprec(self.bits + _GUARD_BITS)

    @property
    def two_pi_i(self) -> mp.mpc:
        """2*pi*i at context precision; computed once per (bits) and shared."""
        return _two_pi_i(self.bits)

    @property
    def sqrt_tol(self) -> mp.mpf:
        return mp.sqrt(self.tol)

    @classmethod
    def from_env(cls, default_bits: int = DEFAULT_BITS) -> "PrecisionContext":
        """Context honouring the ZP_PRECISION_BITS environment override."""
        bits = int(os.environ.get("ZP_PRECISION_BITS", default_bits))
        return cls(bits=bits)


_TWO_PI_I_CACHE: dict[int, mp.mpc] = {}


def _two_pi_i(bits: int) -> mp.mpc:
    val = _TWO_PI_I_CACHE.get(bits)
    if val is None:
        with mp.workprec(bits + _GUARD_BITS):
            val = 2j * +mp.pi
        _TWO_PI_I_CACHE[bits] = val
    return val


def to_complex(value) -> mp.mpc:
    """Coerce ints, floats, strings, (re, im) pairs and mpf/mpc to mpc."""
    if isinstance(value, mp.mpc):
        return value
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return mp.mpc(mp.mpmathify(value[0]), mp.mpmathify(value[1]))
    return mp.mpc(mp.mpmathify(value))


def agm(a, b, ctx: PrecisionContext = None) -> mp.mpc:
    """Arithmetic-geometric mean with the right-choice square-root branch.

    At each step the geometric mean g is chosen so that |a' - g| <= |a' + g|
    where a' is the arithmetic mean; ties break toward positive real part.
    Raises NonConvergence after 4*bits iterations (e.g. for an anti-parallel
    input pair, whose degenerate limit 0 never satisfies the relative test).
    """
    ctx = ctx or PrecisionContext()
    a = to_complex(a)
    b = to_complex(b)
    if a == 0 or b == 0:
        raise DomainError("agm requires nonzero arguments")
    with ctx.workprec():
        a, b = +a, +b
        for _ in range(4 * ctx.bits):
            if abs(a - b) <= ctx.tol * abs(a):
                return +a
            am = (a + b) / 2
            gm = mp.sqrt(a * b)
            d_minus = abs(am - gm)
            d_plus = abs(am + gm)
            if d_minus > d_plus or (d_minus == d_plus and mp.re(gm) < 0):
                gm = -gm
            a, b = am, gm
    raise NonConvergence("agm did not converge within 4*bits iterations")


# divisor-power sums sigma_k(n), cached and grown on demand
_SIGMA_CACHE: dict[int, list[int]] = {}


def _sigma(kpow: int, nmax: int) -> list[int]:
    cached = _SIGMA_CACHE.get(kpow)
    if cached is not None and len(cached) > nmax:
        return cached
    size = max(nmax, 64)
    if cached is not None:
        size = max(size, 2 * (len(cached) - 1))
    s = [0] * (size + 1)
    for d in range(1, size + 1):
        dk = d ** kpow
        for m in range(d, size + 1, d):
            s[m] += dk
    _SIGMA_CACHE[kpow] = s
    return s


_EISEN_COEF = {2: -24, 4: 240, 6: -504}


def eisenstein(k: int, tau, ctx: PrecisionContext = None) -> mp.mpc:
    """Weight-k Eisenstein series E_k(tau), k in {2, 4, 6}, by q-series.

    The series is truncated once the current term drops below tol * 2**-16;
    precision suffers for Im(tau) very small, so reduce tau first.  E_2 is
    quasi-modular (it picks up an affine term under inversion); that is a
    property of the function, not corrected here.
    """
    if k not in _EISEN_COEF:
        raise DomainError(f"eisenstein weight must be 2, 4 or 6, got {k}")
    ctx = ctx or PrecisionContext()
    tau = to_complex(tau)
    if not mp.im(tau) > 0:
        raise DomainError("eisenstein requires Im(tau) > 0")
    coef = _EISEN_COEF[k]
    with ctx.workprec():
        q = mp.exp(ctx.two_pi_i * tau)
        cutoff = ctx.tol * mp.mpf(2) ** (-16)
        total = mp.mpc(1)
        qn = mp.mpc(1)
        n = 0
        sig = _sigma(k - 1, 256)
        while True:
            n += 1
            if n > ctx.max_terms:
                raise NonConvergence(
                    f"E_{k} q-series needs more than max_terms={ctx.max_terms} terms "
                    f"at Im(tau)={mp.nstr(mp.im(tau), 8)}; reduce tau first"
                )
            if n >= len(sig):
                sig = _sigma(k - 1, 2 * n)
            qn *= q
            term = coef * sig[n] * qn
            total += term
            if abs(term) < cutoff:
                return +total


def j_invariant(tau, ctx: PrecisionContext = None) -> mp.mpc:
    """Modular j-invariant via j = 1728 E4^3 / (E4^3 - E6^2)."""
    ctx = ctx or PrecisionContext()
    tau = to_complex(tau)
    if not mp.im(tau) > 0:
        raise DomainError("j_invariant requires Im(tau) > 0")
    with ctx.workprec():
        e4 = eisenstein(4, tau, ctx)
        e6 = eisenstein(6, tau, ctx)
        num = 1728 * e4 ** 3
        den = e4 ** 3 - e6 ** 2
        return +(num / den)


def _polyval(coeffs, z):
    """Horner evaluation, ascending coefficients."""
    acc = mp.mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def polyroots(coeffs, ctx: PrecisionContext = None, max_sweeps: int = 1000) -> list[mp.mpc]:
    """All complex roots (with multiplicity) by simultaneous Aberth iteration.

    coeffs ascending, leading coefficient nonzero, degree >= 1.  Termination
    is residual-based: every root z must satisfy
    |p(z)| <= tol * |lead| * max(1, |z|)**deg.  A cluster of m equal roots
    then sits within about tol**(1/m) of the true location, so double roots
    land inside the sqrt(tol) cluster tolerance.
    """
    ctx = ctx or PrecisionContext()
    coeffs = [to_complex(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise DegenerateInput(
            "polyroots needs degree >= 1 with nonzero leading coefficient"
        )
    with ctx.workprec():
        lead = coeffs[-1]
        # exact zero roots split off first
        nzero = 0
        while coeffs[0] == 0:
            coeffs = coeffs[1:]
            nzero += 1
        deg = len(coeffs) - 1
        zeros = [mp.mpc(0)] * nzero
        if deg == 0:
            return zeros
        monic = [c / lead for c in coeffs]
        dcoeffs = [monic[i] * i for i in range(1, deg + 1)]
        radius = 1 + max(abs(c) for c in monic[:-1])
        z = [
            radius * mp.exp(mp.mpc(0, 2 * mp.pi * k / deg + mp.mpf(2) / 5))
            for k in range(deg)
        ]
        tiny = mp.mpf(2) ** (-(ctx.bits + _GUARD_BITS) * 2)
        for _ in range(max_sweeps):
            converged = True
            for k in range(deg):
                pk = _polyval(monic, z[k])
                if abs(pk) > ctx.tol * max(mp.mpf(1), abs(z[k])) ** deg:
                    converged = False
                dpk = _polyval(dcoeffs, z[k])
                if dpk == 0:
                    z[k] += mp.mpf(radius) * mp.mpf(2) ** (-ctx.bits // 3)
                    converged = False
                    continue
                newton = pk / dpk
                acc = mp.mpc(0)
                for m in range(deg):
                    if m == k:
                        continue
                    diff = z[k] - z[m]
                    if abs(diff) < tiny:
                        diff = tiny
                    acc += 1 / diff
                denom = 1 - newton * acc
                if denom == 0:
                    step = newton
                else:
                    step = newton / denom
                z[k] -= step
            if converged:
                roots = [+r for r in z] + zeros
                roots.sort(key=lambda r: (mp.re(r), mp.im(r)))
                return roots
    raise NonConvergence(f"polyroots: no convergence after {max_sweeps} sweeps")
