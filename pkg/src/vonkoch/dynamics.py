"""The four-branch piecewise affine map ``T`` on ``[0, 1]`` and its digits.

Branches (half-open, right end closed on the last one)::

    [0, 1/3)    x -> 3x        digit 0, contraction 1/3
    [1/3, 1/2)  x -> 6x - 2    digit 1, contraction 1/6
    [1/2, 2/3)  x -> 4 - 6x    digit 2, contraction 1/6, orientation flip
    [2/3, 1]    x -> 3x - 2    digit 3, contraction 1/3

The first ``n`` digits of ``x`` name the generation-``n`` interval
``(a_n, a_n + eps_n * ell_n)`` on which the ``n``-th approximant is affine.
:func:`advance` walks down that nesting one digit at a time, carrying the
exact interval together with the approximant's slope and anchor value.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, ParameterError, UndeterminedError
from .exactnum import SignedLog, as_rational, slog_add_scaled

__all__ = [
    "DIGITS",
    "LAMBDA_MIN",
    "LAMBDA_MAX",
    "check_lambda",
    "step_T",
    "digit_of",
    "orbit_digits",
    "SymbolicPoint",
    "OrbitState",
    "initial_state",
    "advance",
    "interval_of",
    "value_of_digits",
    "PointTag",
    "PointClass",
    "classify",
    "symbolic_point_of",
    "next_slope",
    "next_ideal_slope",
]

DIGITS = (0, 1, 2, 3)
LAMBDA_MIN = 1.0 / 6.0
LAMBDA_MAX = 5.0 / 6.0

_THIRD = Fraction(1, 3)
_HALF = Fraction(1, 2)
_TWO_THIRDS = Fraction(2, 3)

# Offset of the child anchor inside the parent interval, in units of eps*ell.
_ANCHOR_OFFSET = (Fraction(0), _THIRD, _TWO_THIRDS, _TWO_THIRDS)
_CONTRACTION = (_THIRD, Fraction(1, 6), Fraction(1, 6), _THIRD)
_LOG_INV_RATIO = (math.log(3.0), math.log(6.0), math.log(6.0), math.log(3.0))


def check_lambda(lam: float, *, allow_divergent: bool = False) -> float:
    """Validate ``lam`` against the open range ``(1/6, 5/6)``.

    With ``allow_divergent`` any ``lam > 1/6`` is accepted: the slope
    recursion stays well defined there even though the limit function
    blows up.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam <= LAMBDA_MIN:
        raise ParameterError(f"lambda must be in (1/6, 5/6), got {lam!r}")
    if not allow_divergent and lam >= LAMBDA_MAX:
        raise ParameterError(f"lambda must be in (1/6, 5/6), got {lam!r}")
    return lam


def _check_unit(x: Fraction) -> Fraction:
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    return x


def digit_of(x) -> int:
    x = _check_unit(x)
    if x < _THIRD:
        return 0
    if x < _HALF:
        return 1
    if x < _TWO_THIRDS:
        return 2
    return 3


def step_T(x) -> Fraction:
    """Exact image of ``x`` under ``T``."""
    x = _check_unit(x)
    d = digit_of(x)
    if d == 0:
        return 3 * x
    if d == 1:
        return 6 * x - 2
    if d == 2:
        return 4 - 6 * x
    return 3 * x - 2


def orbit_digits(x, n: int) -> list[int]:
    """Digits ``u_0, ..., u_{n-1}`` of ``x`` by exact iteration of ``T``."""
    x = _check_unit(x)
    out = []
    for _ in range(n):
        out.append(digit_of(x))
        x = step_T(x)
    return out


def _check_digits(digits: Iterable[int]) -> tuple[int, ...]:
    word = tuple(int(d) for d in digits)
    for d in word:
        if d not in DIGITS:
            raise DomainError(f"digits must be in {{0,1,2,3}}, got {d}")
    return word


def _primitive_root(word: tuple[int, ...]) -> tuple[int, ...]:
    n = len(word)
    for k in range(1, n + 1):
        if n % k == 0 and word[:k] * (n // k) == word:
            return word[:k]
    return word


@dataclass(frozen=True)
class SymbolicPoint:
    """An eventually periodic digit word ``preperiod (period)^inf``.

    An empty period describes the point only up to ``len(preperiod)``
    digits; operations that need the full point reject it.
    """

    preperiod: tuple[int, ...] = ()
    period: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "preperiod", _check_digits(self.preperiod))
        object.__setattr__(self, "period", _primitive_root(_check_digits(self.period)))

    @classmethod
    def parse(cls, text: str) -> "SymbolicPoint":
        """Parse ``"pre:<digits>,per:<digits>"`` (either part may be empty)."""
        parts = {}
        for chunk in text.split(","):
            key, sep, val = chunk.strip().partition(":")
            if not sep or key.strip() not in ("pre", "per"):
                raise ValueError(f"malformed point {text!r}; expected 'pre:<d>,per:<d>'")
            val = val.strip()
            if any(c not in "0123" for c in val):
                raise ValueError(f"digits must be in 0123, got {val!r}")
            parts[key.strip()] = tuple(int(c) for c in val)
        return cls(parts.get("pre", ()), parts.get("per", ()))

    def __str__(self) -> str:
        pre = "".join(map(str, self.preperiod))
        per = "".join(map(str, self.period))
        return f"pre:{pre},per:{per}"

    def require_period(self) -> None:
        if not self.period:
            raise ValueError("symbolic point has an empty period")

    def digits(self, n: int) -> list[int]:
        """First ``n`` digits of the infinite word."""
        self.require_period()
        out = list(self.preperiod[:n])
        k = 0
        while len(out) < n:
            out.append(self.period[k % len(self.period)])
            k += 1
        return out

    def frequencies(self) -> tuple[float, float, float, float]:
        """Limit digit frequencies (those of the period)."""
        self.require_period()
        counts = Counter(self.period)
        return tuple(counts[d] / len(self.period) for d in DIGITS)


@dataclass(frozen=True)
class OrbitState:
    """Generation-``n`` bookkeeping along one digit word.

    ``anchor`` is the endpoint of the generation interval mapped to 0 by
    ``T**n``; the interval is ``(anchor, anchor + eps*ell)``.  ``slope`` is the
    slope of the ``n``-th approximant there and ``anchor_value`` its value at
    the anchor.  ``ideal_slope`` is the magnitude of the product-form slope
    obtained by dropping the ``sqrt(1 + m^2)`` corrections.
    """

    n: int
    beta: tuple[int, int, int, int]
    eps: int
    ell: Fraction
    anchor: Fraction
    slope: SignedLog
    ideal_slope: SignedLog
    anchor_value: float
    seg_len: float

    @property
    def other_end(self) -> Fraction:
        return self.anchor + self.eps * self.ell

    @property
    def closed_interval(self) -> tuple[Fraction, Fraction]:
        return tuple(sorted((self.anchor, self.other_end)))

    @property
    def log_ell(self) -> float:
        """``log(ell)`` from the digit counts, finite at any depth."""
        return -sum(b * c for b, c in zip(self.beta, _LOG_INV_RATIO))

    @property
    def log_seg_len(self) -> float:
        return self.log_ell + self.slope.hypot1().log_magnitude

    def value_at(self, x: Fraction) -> float:
        """Value of the ``n``-th approximant at ``x`` (assumed in this interval)."""
        dx = SignedLog.from_rational(as_rational(x) - self.anchor)
        return self.anchor_value + float(self.slope * dx)


def initial_state() -> OrbitState:
    return OrbitState(
        n=0,
        beta=(0, 0, 0, 0),
        eps=1,
        ell=Fraction(1),
        anchor=Fraction(0),
        slope=SignedLog.zero(),
        ideal_slope=SignedLog.zero(),
        anchor_value=0.0,
        seg_len=1.0,
    )


def next_slope(m: SignedLog, d: int, lam: float) -> SignedLog:
    """Slope on the child interval with digit ``d`` given parent slope ``m``."""
    if d == 0 or d == 3:
        return m
    if m.sign == 0:
        return SignedLog.from_float(6.0 * lam if d == 1 else -6.0 * lam)
    scale = 6.0 * lam if d == 1 else -6.0 * lam
    magnitude = slog_add_scaled(abs(m), scale, m.hypot1())
    return magnitude if m.sign > 0 else -magnitude


def next_ideal_slope(t: SignedLog, d: int, lam: float) -> SignedLog:
    if d == 0 or d == 3:
        return t
    if t.sign == 0:
        return SignedLog.from_float(6.0 * lam)
    return t * (6.0 * lam + 1.0 if d == 1 else 6.0 * lam - 1.0)


def advance(
    state: OrbitState, d: int, lam: float, *, allow_divergent: bool = False
) -> OrbitState:
    """Descend from a generation-``n`` interval into its child with digit ``d``."""
    lam = check_lambda(lam, allow_divergent=allow_divergent)
    if d not in DIGITS:
        raise DomainError(f"digit must be in {{0,1,2,3}}, got {d!r}")
    step = _ANCHOR_OFFSET[d] * state.eps * state.ell
    anchor = state.anchor + step
    # The new anchor is A, C or E of the parent segment, so it lies on it.
    anchor_value = state.anchor_value
    if step and state.slope:
        anchor_value += float(state.slope * SignedLog.from_rational(step))
    beta = list(state.beta)
    beta[d] += 1
    slope = next_slope(state.slope, d, lam)
    new = OrbitState(
        n=state.n + 1,
        beta=tuple(beta),
        eps=-state.eps if d == 2 else state.eps,
        ell=state.ell * _CONTRACTION[d],
        anchor=anchor,
        slope=slope,
        ideal_slope=next_ideal_slope(state.ideal_slope, d, lam),
        anchor_value=anchor_value,
        seg_len=0.0,
    )
    return replace(new, seg_len=math.exp(new.log_seg_len))


def interval_of(x_or_digits, n: int, lam: float, *, allow_divergent: bool = False) -> OrbitState:
    """State after folding the first ``n`` digits of a point through :func:`advance`.

    ``x_or_digits`` is either an exact rational in ``[0, 1]`` or a digit
    sequence of length at least ``n``.
    """
    if isinstance(x_or_digits, (Fraction, int, str)):
        digits = orbit_digits(x_or_digits, n)
    else:
        digits = _check_digits(x_or_digits)[:n]
        if len(digits) < n:
            raise ValueError(f"need {n} digits, got {len(digits)}")
    state = initial_state()
    for d in digits:
        state = advance(state, d, lam, allow_divergent=allow_divergent)
    return state


def _affine_walk(word: Sequence[int], eps: int, ell: Fraction):
    """Sum of anchor offsets along ``word`` starting from ``(eps, ell)``."""
    offset = Fraction(0)
    for d in word:
        offset += _ANCHOR_OFFSET[d] * eps * ell
        if d == 2:
            eps = -eps
        ell *= _CONTRACTION[d]
    return offset, eps, ell


def value_of_digits(p: SymbolicPoint) -> Fraction:
    """Exact value of an eventually periodic digit word.

    After one period ``eps*ell`` has been multiplied by a fixed rational
    ``f`` with ``|f| < 1``, so the periodic tail is a geometric series.
    """
    p.require_period()
    head, eps, ell = _affine_walk(p.preperiod, 1, Fraction(1))
    block, eps_after, ell_after = _affine_walk(p.period, eps, ell)
    ratio = Fraction(eps_after, eps) * (ell_after / ell)
    return head + block / (1 - ratio)


class PointTag(enum.Enum):
    IN_E = "IN_E"
    IN_ETILDE_ONLY = "IN_ETILDE_ONLY"
    IN_V = "IN_V"
    GENERIC = "GENERIC"


@dataclass(frozen=True)
class PointClass:
    tag: PointTag
    sign_of_infinite_derivative: int | None = None


def classify(p: SymbolicPoint) -> PointClass:
    """Breakpoints (E), finitely many 1s and 2s (E~), infinite derivative (V)."""
    p.require_period()
    period = set(p.period)
    if p.period in ((0,), (3,)):
        return PointClass(PointTag.IN_E)
    if period <= {0, 3}:
        return PointClass(PointTag.IN_ETILDE_ONLY)
    if 1 in period and 2 not in period:
        twos = p.preperiod.count(2)
        return PointClass(PointTag.IN_V, -1 if twos % 2 else 1)
    return PointClass(PointTag.GENERIC)


def symbolic_point_of(x, max_depth: int = 10_000) -> SymbolicPoint:
    """Eventually periodic digit word of a rational by orbit cycle detection."""
    x = _check_unit(x)
    seen: dict[Fraction, int] = {}
    digits: list[int] = []
    for k in range(max_depth + 1):
        if x in seen:
            start = seen[x]
            return SymbolicPoint(tuple(digits[:start]), tuple(digits[start:]))
        seen[x] = k
        digits.append(digit_of(x))
        x = step_T(x)
    raise UndeterminedError(f"no cycle found within {max_depth} steps")
