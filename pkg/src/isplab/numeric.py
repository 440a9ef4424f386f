"""Scalar fields used throughout the package.

Two modes are supported:

``rational``
    Exact arithmetic on :class:`fractions.Fraction`.  Comparisons are exact.

``binary64``
    53-bit significand floating point (``gmpy2.mpfr``) with the exponent range
    widened to the maximum MPFR allows.  The construction produces scalars far
    outside the IEEE double range (``2**(10**7)`` is routine by stage 3), so a
    plain ``float`` would overflow.  Comparisons carry a relative tolerance of
    ``1e-9``.
"""

from __future__ import annotations

import math
import re
import sys
from contextlib import contextmanager
from fractions import Fraction

import gmpy2

from .errors import ExponentRangeError

_ctx = gmpy2.get_context()
_ctx.precision = 53

# MPFR keeps exponents in its default range of about ±2^30 whatever the
# context says, so 2^k is finite only for |k| <= EXP_LIMIT
EXP_LIMIT = (1 << 30) - 2

REL_TOL = 1e-9

_HEX_RE = re.compile(r"^(-?)0x([0-9a-f]+)p([+-]?\d+)$")


@contextmanager
def _unlimited_int_str():
    """Lift CPython's guard on decimal conversion of huge integers."""
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        yield
        return
    old = getter()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


class Field:
    """Arithmetic policy for one scalar mode."""

    name: str = ""
    exact: bool = False

    def coerce(self, x):
        raise NotImplementedError

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def pow2(self, k: int):
        raise NotImplementedError

    def sqrt(self, x):
        raise NotImplementedError

    def to_str(self, x) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    # -- comparisons -----------------------------------------------------
    def is_zero(self, x) -> bool:
        return x == 0

    def geq(self, lhs, rhs) -> bool:
        """``lhs >= rhs`` under the mode's tolerance policy."""
        if self.exact:
            return lhs >= rhs
        return lhs >= rhs - REL_TOL * abs(rhs)

    def gt(self, lhs, rhs) -> bool:
        if rhs == 0 or self.exact:
            return lhs > rhs
        return self.geq(lhs, rhs)

    def close(self, a, b) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= REL_TOL * max(abs(a), abs(b))

    # -- helpers ---------------------------------------------------------
    def log2(self, x) -> float:
        """log2 of ``|x|`` as a Python float; ``-inf`` for zero."""
        raise NotImplementedError

    def pow2_ceil(self, x):
        """Smallest power of two ``>= x`` (``x > 0``)."""
        k = self._exp_bound(x)
        while self.pow2(k) < x:
            k += 1
        while self.pow2(k - 1) >= x:
            k -= 1
        return self.pow2(k)

    def pow2_floor(self, x):
        """Largest power of two ``<= x`` (``x > 0``)."""
        k = self._exp_bound(x)
        while self.pow2(k) > x:
            k -= 1
        while self.pow2(k + 1) <= x:
            k += 1
        return self.pow2(k)

    def _exp_bound(self, x) -> int:
        raise NotImplementedError

    def __repr__(self):
        return f"<Field {self.name}>"


class RationalField(Field):
    name = "rational"
    exact = True

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, float):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, gmpy2.mpfr(0).__class__):
            m, e = x.as_mantissa_exp()
            return Fraction(int(m)) * (Fraction(2) ** int(e))
        return Fraction(x)

    def pow2(self, k: int):
        if k >= 0:
            return Fraction(1 << k)
        return Fraction(1, 1 << -k)

    def sqrt(self, x):
        x = Fraction(x)
        n, d = x.numerator, x.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        raise ArithmeticError(f"sqrt({x}) is irrational; use binary64 mode for l2-type seminorms")

    def to_str(self, x) -> str:
        x = Fraction(x)
        with _unlimited_int_str():
            if x.denominator == 1:
                return str(x.numerator)
            return f"{x.numerator}/{x.denominator}"

    def parse(self, s: str):
        with _unlimited_int_str():
            return Fraction(s.strip())

    def log2(self, x) -> float:
        x = abs(Fraction(x))
        if x == 0:
            return -math.inf
        n, d = x.numerator, x.denominator
        shift = n.bit_length() - d.bit_length()
        if shift > 0:
            d <<= shift
        else:
            n <<= -shift
        return shift + math.log2(n / d)

    def _exp_bound(self, x) -> int:
        x = Fraction(x)
        return x.numerator.bit_length() - x.denominator.bit_length()


class Binary64Field(Field):
    name = "binary64"
    exact = False

    def coerce(self, x):
        if isinstance(x, Fraction):
            return gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
        if isinstance(x, str):
            return self.parse(x)
        return gmpy2.mpfr(x)

    def pow2(self, k: int):
        if abs(k) > EXP_LIMIT:
            raise ExponentRangeError(f"2^{k} is outside the binary64-mode exponent range (|k| <= {EXP_LIMIT})")
        return gmpy2.mul_2exp(gmpy2.mpfr(1), k)

    def sqrt(self, x):
        return gmpy2.sqrt(x)

    def to_str(self, x) -> str:
        """Exact hex-float text, e.g. ``0x3p-2`` for 0.75."""
        x = gmpy2.mpfr(x)
        if x == 0:
            return "0x0p+0"
        m, e = x.as_mantissa_exp()
        m, e = int(m), int(e)
        sign = "-" if m < 0 else ""
        m = abs(m)
        tz = (m & -m).bit_length() - 1
        m >>= tz
        e += tz
        return f"{sign}0x{m:x}p{e:+d}"

    def parse(self, s: str):
        s = s.strip().lower()
        match = _HEX_RE.match(s)
        if match is None:
            return gmpy2.mpfr(s)
        sign, mant, exp = match.groups()
        value = gmpy2.mul_2exp(gmpy2.mpfr(int(mant, 16)), int(exp))
        return -value if sign else value

    def log2(self, x) -> float:
        if x == 0:
            return -math.inf
        return float(gmpy2.log2(abs(gmpy2.mpfr(x))))

    def _exp_bound(self, x) -> int:
        x = gmpy2.mpfr(x)
        if not gmpy2.is_finite(x):
            raise ExponentRangeError(f"value {x} left the binary64-mode exponent range")
        return int(gmpy2.get_exp(x))


RATIONAL = RationalField()
BINARY64 = Binary64Field()

_FIELDS = {"rational": RATIONAL, "binary64": BINARY64}


def get_field(mode: str) -> Field:
    try:
        return _FIELDS[mode]
    except KeyError:
        raise ValueError(f"unknown scalar mode {mode!r}; expected one of {sorted(_FIELDS)}") from None
