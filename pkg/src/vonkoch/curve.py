"""Approximants ``F_n`` of the generalized von Koch function and their limit.

``F_{n+1}`` is obtained from ``F_n`` by replacing every segment ``AB`` with
``ACDEB``: ``C`` and ``E`` are the thirds of ``AB`` and the apex ``D`` sits
above the midpoint at height ``lam * |AB|``.  Pointwise evaluation walks the
digit nesting instead of materializing ``4**n`` segments, and stops once the
geometric tail of segment lengths certifies the requested tolerance.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .dynamics import (
    SymbolicPoint,
    advance,
    check_lambda,
    classify,
    digit_of,
    initial_state,
    next_ideal_slope,
    next_slope,
    PointTag,
    step_T,
)
from .errors import ConvergenceError, DomainError, ParameterError, ResourceError
from .exactnum import SignedLog, as_rational

__all__ = [
    "Segment",
    "apply_omega",
    "Polyline",
    "build_polyline",
    "iter_polyline_pieces",
    "max_generation",
    "contraction_rate",
    "increment_bound",
    "EvalResult",
    "evaluate",
    "anchor_values",
    "slope_sequence",
    "ideal_slope_sequence",
    "holder_slope_estimate",
    "Validity",
    "holder_from_frequencies",
    "holder_frequency",
]

DEFAULT_MAX_GEN = 13
# x numerators are int64 over 6**n; 6**24 < 2**63 < 6**25.
_INT64_GEN_LIMIT = 24

_LOG3 = math.log(3.0)
_LOG6 = math.log(6.0)


@dataclass(frozen=True)
class Segment:
    x0: Fraction
    x1: Fraction
    y0: float
    y1: float

    def __post_init__(self):
        object.__setattr__(self, "x0", as_rational(self.x0))
        object.__setattr__(self, "x1", as_rational(self.x1))
        if not self.x1 > self.x0:
            raise DomainError("segment needs x1 > x0")

    @property
    def slope(self) -> float:
        return (self.y1 - self.y0) / float(self.x1 - self.x0)


def apply_omega(s: Segment, lam: float) -> tuple[Segment, Segment, Segment, Segment]:
    """Replace ``AB`` by the four segments ``AC, CD, DE, EB``."""
    lam = float(lam)
    if not lam >= 1.0 / 6.0:
        raise ParameterError(f"Omega needs lambda >= 1/6, got {lam!r}")
    ell = s.x1 - s.x0
    dy = s.y1 - s.y0
    xc, xd, xe = s.x0 + ell / 3, s.x0 + ell / 2, s.x0 + 2 * ell / 3
    yc = s.y0 + dy / 3.0
    ye = s.y0 + 2.0 * dy / 3.0
    yd = s.y0 + dy / 2.0 + lam * math.hypot(float(ell), dy)
    return (
        Segment(s.x0, xc, s.y0, yc),
        Segment(xc, xd, yc, yd),
        Segment(xd, xe, yd, ye),
        Segment(xe, s.x1, ye, s.y1),
    )


@dataclass(frozen=True, eq=False)
class Polyline:
    """Breakpoints of ``F_n``: exact abscissae ``x_num / den`` and float ordinates.

    ``den`` is ``6**generation`` (the common denominator of all
    generation-``n`` interval endpoints), so ``x_num`` is an integer array.
    """

    x_num: np.ndarray
    den: int
    y: np.ndarray
    generation: int

    @property
    def n_segments(self) -> int:
        return len(self.y) - 1

    @property
    def x(self) -> np.ndarray:
        return self.x_num / float(self.den)

    @property
    def xs(self) -> list[Fraction]:
        return [Fraction(int(k), self.den) for k in self.x_num]

    def breakpoints(self) -> Iterator[tuple[Fraction, float]]:
        for k, y in zip(self.x_num, self.y):
            yield Fraction(int(k), self.den), float(y)

    def __len__(self) -> int:
        return len(self.y)


def max_generation() -> int:
    """Generation cap, overridable through ``KOCH_MAX_GEN``."""
    raw = os.environ.get("KOCH_MAX_GEN")
    if raw is None:
        return DEFAULT_MAX_GEN
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ParameterError(f"KOCH_MAX_GEN must be an integer, got {raw!r}") from exc
    return min(cap, _INT64_GEN_LIMIT)


def _refine(x_num: np.ndarray, y: np.ndarray, gen: int, lam: float):
    """One application of Omega to every segment of a (piece of a) polyline."""
    w = np.diff(x_num)
    x0 = 6 * x_num[:-1]
    y0, y1 = y[:-1], y[1:]
    dy = y1 - y0
    ell = w / float(6**gen)
    out_x = np.empty(4 * len(w) + 1, dtype=np.int64)
    out_y = np.empty(4 * len(w) + 1, dtype=np.float64)
    out_x[0:-1:4] = x0
    out_x[1::4] = x0 + 2 * w
    out_x[2::4] = x0 + 3 * w
    out_x[3::4] = x0 + 4 * w
    out_x[-1] = 6 * x_num[-1]
    out_y[0:-1:4] = y0
    out_y[1::4] = y0 + dy / 3.0
    out_y[2::4] = y0 + dy / 2.0 + lam * np.hypot(ell, dy)
    out_y[3::4] = y0 + 2.0 * dy / 3.0
    out_y[-1] = y[-1]
    return out_x, out_y


def _check_gen(n: int, cap: int | None) -> None:
    cap = max_generation() if cap is None else cap
    if n < 0:
        raise ParameterError(f"generation must be >= 0, got {n}")
    if n > min(cap, _INT64_GEN_LIMIT):
        raise ResourceError(f"generation {n} exceeds cap {min(cap, _INT64_GEN_LIMIT)}")


def build_polyline(lam: float, n: int, *, cap: int | None = None) -> Polyline:
    """All ``4**n + 1`` breakpoints of ``F_n``."""
    lam = check_lambda(lam)
    _check_gen(n, cap)
    x_num = np.array([0, 1], dtype=np.int64)
    y = np.zeros(2)
    for gen in range(n):
        x_num, y = _refine(x_num, y, gen, lam)
    return Polyline(x_num, 6**n, y, n)


def iter_polyline_pieces(
    lam: float, n: int, *, split: int, cap: int | None = None
) -> Iterator[Polyline]:
    """``F_n`` in contiguous pieces, one per segment of ``F_split``.

    Consecutive pieces share their boundary breakpoint.  Memory stays at
    ``O(4**(n - split))`` per piece.
    """
    lam = check_lambda(lam)
    _check_gen(n, cap)
    split = min(split, n)
    coarse = build_polyline(lam, split, cap=_INT64_GEN_LIMIT)
    for i in range(coarse.n_segments):
        x_num = coarse.x_num[i : i + 2].copy()
        y = coarse.y[i : i + 2].copy()
        for gen in range(split, n):
            x_num, y = _refine(x_num, y, gen, lam)
        yield Polyline(x_num, 6**n, y, n)


def contraction_rate(lam: float) -> float:
    """Per-generation bound on the growth of segment lengths."""
    lam = float(lam)
    return 1.0 / 3.0 + 2.0 * lam if lam < 1.0 / 3.0 else 1.0 / 6.0 + lam


def increment_bound(lam: float, n: int) -> float:
    """Upper bound on ``sup |F_{n+1} - F_n|``."""
    return lam * contraction_rate(lam) ** n


@dataclass(frozen=True)
class EvalResult:
    value: float
    error_bound: float
    depth_used: int


def evaluate(lam: float, x, tol: float = 1e-9, *, max_depth: int = 10_000) -> EvalResult:
    """``F(x)`` with a rigorous bound on the truncation error.

    The walk stops at the first depth ``n`` where
    ``lam * L_n(x) / (1 - rho) <= tol``; the returned value is ``F_n(x)``
    and the true value lies in ``[value, value + error_bound]`` (the
    approximants increase with ``n``).  Breakpoints are reached exactly and
    reported with a zero bound.
    """
    lam = check_lambda(lam)
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    rho = contraction_rate(lam)
    log_factor = math.log(lam) - math.log1p(-rho)
    log_tol = math.log(tol)
    state = initial_state()
    orbit = x
    while True:
        if x == state.anchor:
            return EvalResult(state.anchor_value, 0.0, state.n)
        if x == state.other_end:
            return EvalResult(state.value_at(x), 0.0, state.n)
        log_bound = log_factor + state.log_seg_len
        if log_bound <= log_tol:
            return EvalResult(state.value_at(x), math.exp(log_bound), state.n)
        if state.n >= max_depth:
            raise ConvergenceError(
                f"tolerance {tol} not reached within {max_depth} generations"
            )
        d = digit_of(orbit)
        orbit = step_T(orbit)
        state = advance(state, d, lam)


def anchor_values(
    lam: float, digits: Sequence[int], *, allow_divergent: bool = False
) -> list[float]:
    """``F_n(a_n)`` for ``n = 0..len(digits)`` along a digit word.

    With ``allow_divergent`` the walk also runs for ``lam >= 5/6``, where
    these values grow without bound along some words.
    """
    state = initial_state()
    out = [state.anchor_value]
    for d in digits:
        state = advance(state, d, lam, allow_divergent=allow_divergent)
        out.append(state.anchor_value)
    return out


def slope_sequence(
    lam: float, digits: Sequence[int], *, allow_divergent: bool = False
) -> list[SignedLog]:
    """Slopes ``m_0, ..., m_N`` of the approximants along a digit word."""
    lam = check_lambda(lam, allow_divergent=allow_divergent)
    m = SignedLog.zero()
    out = [m]
    for d in digits:
        m = next_slope(m, d, lam)
        out.append(m)
    return out


def ideal_slope_sequence(lam: float, digits: Sequence[int]) -> list[SignedLog]:
    """Product-form slope magnitudes: ``6*lam`` at activation, then factors
    ``6*lam + 1`` per digit 1 and ``6*lam - 1`` per digit 2."""
    lam = check_lambda(lam)
    t = SignedLog.zero()
    out = [t]
    for d in digits:
        t = next_ideal_slope(t, d, lam)
        out.append(t)
    return out


def holder_slope_estimate(lam: float, digits: Sequence[int], window: float = 0.5) -> float:
    """Finite-depth surrogate of ``1 - limsup log|m_n| / |log ell_n|``.

    The limsup is replaced by a max over the last ``window`` fraction of
    the depths; the result is clamped to ``[0, 1]``.
    """
    digits = list(digits)
    N = len(digits)
    if N < 10:
        raise ValueError(f"need at least 10 digits, got {N}")
    slopes = slope_sequence(lam, digits)
    start = max(1, N - int(window * N))
    log_ell = 0.0
    worst = -math.inf
    for n, d in enumerate(digits, start=1):
        log_ell -= _LOG3 if d in (0, 3) else _LOG6
        if n >= start:
            worst = max(worst, slopes[n].log_magnitude / -log_ell)
    return min(1.0, max(0.0, 1.0 - worst))


class Validity(enum.Enum):
    EXACT = "EXACT"
    UPPER_BOUND = "UPPER_BOUND"


def _frequency_ratio(lam: float, freqs) -> tuple[float, float]:
    b0, b1, b2, b3 = freqs
    num = 0.0
    if b1:
        num += b1 * math.log(6.0 * lam + 1.0)
    if b2:
        num += b2 * math.log(6.0 * lam - 1.0)
    den = (b0 + b3) * _LOG3 + (b1 + b2) * _LOG6
    return num, den


def holder_from_frequencies(
    lam: float, freqs, *, regular: bool = True, in_etilde: bool = False
) -> tuple[float, Validity]:
    """Exponent ``1 - max(0, ratio)`` for digit frequencies ``freqs``.

    The value is exact when the slopes provably blow up (``lam > 1/3``
    off E~, or a positive ratio) and for regular points with a nonpositive
    ratio, where the exponent is 1.  Otherwise, e.g. for limsup
    frequencies of a non-regular point with ``lam <= 1/3``, it is only an
    upper bound.
    """
    lam = check_lambda(lam)
    num, den = _frequency_ratio(lam, freqs)
    h = 1.0 - max(0.0, num / den)
    exact = in_etilde or lam > 1.0 / 3.0 or num > 0.0 or regular
    return h, Validity.EXACT if exact else Validity.UPPER_BOUND


def holder_frequency(lam: float, p: SymbolicPoint) -> tuple[float, Validity]:
    """Pointwise exponent of an eventually periodic point from its period frequencies."""
    p.require_period()
    tag = classify(p).tag
    return holder_from_frequencies(
        lam,
        p.frequencies(),
        regular=True,
        in_etilde=tag in (PointTag.IN_E, PointTag.IN_ETILDE_ONLY),
    )
