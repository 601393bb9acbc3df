"""Deterministic JSON encoding of the library's values.

Complex numbers become two-element [re, im] decimal-string arrays; high
precision reals become decimal strings.  Given identical inputs, precision
and seed, the emitted bytes are identical.
"""

from __future__ import annotations

import json
from fractions import Fraction

import mpmath as mp

#: significant digits carried into JSON output
JSON_DIGITS = 32


def fmt_real(x, digits: int = JSON_DIGITS) -> str:
    # never reconstruct an existing mpf: that would re-round it at the
    # ambient precision before printing
    if not isinstance(x, mp.mpf):
        if isinstance(x, mp.mpc):
            x = x.real
        else:
            with mp.workprec(8 * digits):
                x = mp.mpf(x)
    return mp.nstr(x, digits, strip_zeros=True)


def fmt_complex(z, digits: int = JSON_DIGITS) -> list:
    if isinstance(z, mp.mpc):
        re, im = z.real, z.imag
    elif isinstance(z, mp.mpf):
        re, im = z, mp.mpf(0)
    else:
        with mp.workprec(8 * digits):
            zz = mp.mpc(z)
        re, im = zz.real, zz.imag
    return [fmt_real(re, digits), fmt_real(im, digits)]


def fmt_value(v):
    """Best-effort canonical form: ints stay ints, Fractions become strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, mp.mpf):
        return fmt_real(v)
    if isinstance(v, (mp.mpc, complex)):
        return fmt_complex(v)
    if isinstance(v, (list, tuple)):
        return [fmt_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): fmt_value(x) for k, x in v.items()}
    return str(v)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def meta_block(ctx, seed=None) -> dict:
    return {
        "precision_bits": ctx.bits,
        "tolerance": fmt_real(ctx.tol, 8),
        "seed": seed,
    }


def parse_complex(spec, bits: int = 512) -> mp.mpc:
    """Accept "re,im" strings or [re, im] pairs; parsed at >= bits precision."""
    with mp.workprec(max(bits, mp.mp.prec)):
        if isinstance(spec, str):
            parts = spec.split(",")
            if len(parts) == 1:
                parts = [parts[0], "0"]
            if len(parts) != 2:
                raise ValueError(f"expected RE,IM - got {spec!r}")
            return mp.mpc(mp.mpf(parts[0].strip()), mp.mpf(parts[1].strip()))
        if isinstance(spec, (list, tuple)) and len(spec) == 2:
            return mp.mpc(mp.mpf(str(spec[0])), mp.mpf(str(spec[1])))
        raise ValueError(f"cannot parse complex value from {spec!r}")
