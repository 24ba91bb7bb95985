"""Exact rationals for x-axis quantities and overflow-free signed magnitudes.

Every abscissa in the construction (anchors, interval lengths, breakpoints)
is a rational whose denominator divides ``6**n``; those are kept as
:class:`fractions.Fraction`.  Slopes grow like ``(6*lam + 1)**n`` and overflow
float64 after a few hundred generations, so they live in :class:`SignedLog`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = ["Rational", "rational", "as_rational", "SignedLog", "slog_add_scaled"]

Rational = Fraction

_LN2 = math.log(2.0)


def rational(num: int, den: int = 1) -> Fraction:
    """Reduced fraction ``num/den`` with a positive denominator.

    >>> rational(2, 4), rational(-1, -3), rational(0, 7)
    (Fraction(1, 2), Fraction(1, 3), Fraction(0, 1))
    """
    if den == 0:
        raise ValueError("rational: zero denominator")
    return Fraction(int(num), int(den))


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are rejected: a float abscissa would silently carry binary
    rounding into exact computations.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational from {value!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class SignedLog:
    """Signed real ``sign * mant * 2**exp`` with an unbounded binary exponent.

    ``mant`` is kept in ``[0.5, 1)`` so that conversion back to float is exact
    whenever the value is representable, and ``log_magnitude`` is available
    for the log-domain formulas.  The zero value has ``sign == 0``.
    """

    sign: int
    mant: float = 0.0
    exp: int = 0

    @classmethod
    def zero(cls) -> "SignedLog":
        return cls(0)

    @classmethod
    def _normalized(cls, sign: int, mant: float, exp: int) -> "SignedLog":
        if sign == 0 or mant == 0.0:
            return cls(0)
        m, e = math.frexp(mant)
        if m < 0:
            m, sign = -m, -sign
        return cls(1 if sign > 0 else -1, m, exp + e)

    @classmethod
    def from_float(cls, value: float) -> "SignedLog":
        if not math.isfinite(value):
            raise ValueError(f"SignedLog requires a finite value, got {value}")
        if value == 0.0:
            return cls(0)
        m, e = math.frexp(abs(value))
        return cls(1 if value > 0 else -1, m, e)

    @classmethod
    def from_log(cls, sign: int, log_magnitude: float) -> "SignedLog":
        if sign == 0:
            return cls(0)
        e = math.floor(log_magnitude / _LN2)
        return cls._normalized(sign, math.exp(log_magnitude - e * _LN2), e)

    @classmethod
    def from_rational(cls, value: Fraction) -> "SignedLog":
        """Correctly rounded conversion, also for values far below 1e-308."""
        num, den = value.numerator, value.denominator
        if num == 0:
            return cls(0)
        sign = 1 if num > 0 else -1
        num = abs(num)
        shift = num.bit_length() - den.bit_length()
        if shift >= 0:
            scaled = Fraction(num, den << shift)
        else:
            scaled = Fraction(num << -shift, den)
        return cls._normalized(sign, float(scaled), shift)

    @property
    def log_magnitude(self) -> float:
        """Natural log of ``|value|``; ``-inf`` for zero."""
        if self.sign == 0:
            return -math.inf
        return math.log(self.mant) + self.exp * _LN2

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.ldexp(self.mant, self.exp)
        except OverflowError:
            return self.sign * math.inf

    def __bool__(self) -> bool:
        return self.sign != 0

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.mant, self.exp)

    def __abs__(self) -> "SignedLog":
        return SignedLog(abs(self.sign), self.mant, self.exp)

    def __mul__(self, other) -> "SignedLog":
        if not isinstance(other, SignedLog):
            other = SignedLog.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0)
        return SignedLog._normalized(
            self.sign * other.sign, self.mant * other.mant, self.exp + other.exp
        )

    __rmul__ = __mul__

    def __add__(self, other: "SignedLog") -> "SignedLog":
        return slog_add_scaled(self, 1.0, other)

    def __sub__(self, other: "SignedLog") -> "SignedLog":
        return slog_add_scaled(self, -1.0, other)

    def hypot1(self) -> "SignedLog":
        """``sqrt(1 + v**2)``, computed without forming ``v**2``."""
        if self.sign == 0 or self.exp < -500:
            return SignedLog(1, 0.5, 1)
        # sqrt(1 + v^2) = 2**exp * hypot(2**-exp, mant); 2**-exp may underflow to 0.
        return SignedLog._normalized(
            1, math.hypot(math.ldexp(1.0, -self.exp), self.mant), self.exp
        )

    def __repr__(self) -> str:
        if self.sign == 0:
            return "SignedLog(0)"
        return f"SignedLog({'+' if self.sign > 0 else '-'}exp({self.log_magnitude!r}))"


def slog_add_scaled(m: SignedLog, c: float, t: SignedLog) -> SignedLog:
    """Return ``m + c*t`` to full float64 relative precision.

    Both operands are aligned on the larger binary exponent before the
    mantissas are added, so an exact cancellation yields an exact zero.
    """
    ct = t * c
    if ct.sign == 0:
        return m
    if m.sign == 0:
        return ct
    if m.exp >= ct.exp:
        big, small = m, ct
    else:
        big, small = ct, m
    gap = small.exp - big.exp
    small_mant = math.ldexp(small.mant, gap) if gap > -1100 else 0.0
    total = big.sign * big.mant + small.sign * small_mant
    if total == 0.0:
        return SignedLog(0)
    return SignedLog._normalized(1, total, big.exp)
