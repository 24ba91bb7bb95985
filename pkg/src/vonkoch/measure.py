"""The self-similar measure ``mu_lambda`` and its multifractal spectrum.

``mu_lambda`` gives each generation interval with digit word ``w`` the mass
``prod p[w_k]``, with weights

    p = (3**-g, (6*lam + 1) / 6**g, (6*lam - 1) / 6**g, 3**-g)

normalized by the exponent ``g = gamma(lam) >= 1``.  Its L^q spectrum
``tau(q)`` solves ``sum p_i**q * r_i**-tau = 1`` for the contraction ratios
``r = (1/3, 1/6, 1/6, 1/3)``; the spectrum of ``F^lambda`` is the Legendre
transform ``tau*`` shifted by ``1 - gamma``.

All masses are handled as logs.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .curve import _frequency_ratio
from .dynamics import OrbitState, SymbolicPoint, check_lambda
from .errors import DomainError, ParameterError, RangeError
from .exactnum import as_rational

__all__ = [
    "RATIOS",
    "ModelParams",
    "gamma_residual",
    "solve_params",
    "mass_of_state",
    "partition_masses",
    "mass_of_interval",
    "tau",
    "tau_prime",
    "alpha_tilde_min",
    "alpha_tilde_max",
    "alpha_tilde_lebesgue",
    "legendre",
    "tau_star",
    "beta_of_alpha",
    "dim_frequency_set",
    "local_dim_frequency",
    "dim_s",
    "alpha_min",
    "alpha_lebesgue",
    "spectrum_validity",
    "spectrum_F",
    "spectrum_graph",
    "hausdorff_distance",
    "doubling_constant",
]

RATIOS = (1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0)
_LOG_R = np.log(np.array(RATIOS))
_LOG3 = math.log(3.0)
_LOG6 = math.log(6.0)
Q_CAP = 1000.0
# Local dimensions closer than this are treated as tied (lambda = 1/3).
_TIE_TOL = 1e-12
_ENDPOINT_TOL = 1e-12


def _bisect_newton(
    f: Callable[[float], float],
    df: Callable[[float], float] | None,
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-15,
    ftol: float = 0.0,
) -> float:
    """Root of a function with ``f(lo) < 0 < f(hi)`` (or the reverse).

    Plain bisection until the bracket is tight, then Newton steps that are
    accepted only while they stay inside the bracket.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ArithmeticError(f"root not bracketed in [{lo}, {hi}]")
    increasing = fhi > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-6 * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == increasing:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(60):
        fx = f(x)
        if abs(fx) <= ftol or fx == 0.0:
            return x
        if (fx > 0) == increasing:
            hi = x
        else:
            lo = x
        step = None
        if df is not None:
            slope = df(x)
            if slope != 0.0 and math.isfinite(slope):
                step = x - fx / slope
        if step is None or not lo < step < hi:
            step = 0.5 * (lo + hi)
        if abs(step - x) <= xtol * max(1.0, abs(x)):
            return step
        x = step
    return x


def gamma_residual(lam: float, gamma: float) -> float:
    """``2*3**-g + 12*lam*6**-g - 1``; zero at the normalizing exponent."""
    return 2.0 * 3.0**-gamma + 12.0 * lam * 6.0**-gamma - 1.0


@dataclass(frozen=True)
class ModelParams:
    lam: float
    gamma: float
    weights: tuple[float, float, float, float]
    ratios: tuple[float, float, float, float] = RATIOS

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(np.array(self.weights))

    @property
    def local_dims(self) -> np.ndarray:
        """``log p_i / log r_i``, the local dimension along constant words."""
        return self.log_weights / _LOG_R


def solve_params(lam: float) -> ModelParams:
    """Normalizing exponent and weights for ``lam`` in ``(1/6, 5/6)``."""
    lam = check_lambda(lam)
    gamma = _bisect_newton(
        lambda g: -gamma_residual(lam, g),
        lambda g: 2.0 * _LOG3 * 3.0**-g + 12.0 * lam * _LOG6 * 6.0**-g,
        1.0,
        3.0,
        ftol=1e-16,
    )
    w0 = 3.0**-gamma
    weights = (w0, (6.0 * lam + 1.0) * 6.0**-gamma, (6.0 * lam - 1.0) * 6.0**-gamma, w0)
    return ModelParams(lam, gamma, weights)


def mass_of_state(params: ModelParams, state: OrbitState) -> float:
    """Log of the mass of the state's generation interval."""
    return float(sum(b * lp for b, lp in zip(state.beta, params.log_weights) if b))


def partition_masses(
    params: ModelParams, breakpoints: Sequence, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Masses of the cells between consecutive sorted rational breakpoints.

    Generation intervals are subdivided depth first.  An interval with no
    breakpoint strictly inside contributes its whole mass to one cell;
    an interval still straddling a breakpoint once its mass is at most
    ``tol / 2`` is split between the cells it meets in proportion to
    overlap length, and its mass is charged to those cells' error.  Each
    cell is straddled by at most two such intervals, so every reported
    error is at most ``tol``.

    Returns ``(masses, errors)``, one entry per cell.
    """
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    pts = [as_rational(b) for b in breakpoints]
    if len(pts) < 2:
        raise ValueError("need at least two breakpoints")
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    if pts[0] < 0 or pts[-1] > 1:
        raise DomainError("breakpoints must lie in [0, 1]")
    Q = math.lcm(*(p.denominator for p in pts))
    G = [p.numerator * (Q // p.denominator) for p in pts]
    n_cells = len(G) - 1
    masses = np.zeros(n_cells)
    errors = np.zeros(n_cells)
    log_p = [float(v) for v in params.log_weights]
    log_cut = math.log(tol / 2.0)

    # Interval (L/D, H/D) with D = 6**depth; eps orients the digit order.
    stack = [(0, 1, 1, 1, 0.0)]
    while stack:
        L, H, D, eps, logm = stack.pop()
        # Breakpoint indices strictly inside (L/D, H/D).
        i = bisect_right(G, (L * Q) // D)
        j = bisect_left(G, -((-H * Q) // D))
        if i >= j:
            cell = i - 1
            if 0 <= cell < n_cells:
                masses[cell] += math.exp(logm)
            continue
        if logm <= log_cut:
            mass = math.exp(logm)
            width = Fraction(H - L, D)
            edges = [Fraction(L, D)] + [Fraction(g, Q) for g in G[i:j]] + [Fraction(H, D)]
            for k, cell in enumerate(range(i - 1, j)):
                if 0 <= cell < n_cells:
                    share = float((edges[k + 1] - edges[k]) / width)
                    masses[cell] += mass * share
                    errors[cell] += mass
            continue
        W = H - L
        L6, D6 = 6 * L, 6 * D
        # Children in increasing x; digit order is reversed when eps < 0.
        bounds = (L6, L6 + 2 * W, L6 + 3 * W, L6 + 4 * W, L6 + 6 * W)
        order = (0, 1, 2, 3) if eps > 0 else (3, 2, 1, 0)
        for k, d in enumerate(order):
            child_eps = -eps if d == 2 else eps
            stack.append((bounds[k], bounds[k + 1], D6, child_eps, logm + log_p[d]))
    return masses, errors


def mass_of_interval(params: ModelParams, a, b, tol: float = 1e-12) -> tuple[float, float]:
    """``(mass, err)`` of ``[a, b]`` with ``|mass - mu([a, b])| <= err <= tol``."""
    a, b = as_rational(a), as_rational(b)
    if not 0 <= a < b <= 1:
        raise DomainError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    masses, errors = partition_masses(params, [a, b], tol)
    return float(masses[0]), float(errors[0])


def _tau_terms(params: ModelParams, q: float, t: float) -> np.ndarray:
    return q * params.log_weights - t * _LOG_R


def _log_moment(params: ModelParams, q: float, t: float) -> float:
    z = _tau_terms(params, q, t)
    zmax = z.max()
    return float(zmax + math.log(np.exp(z - zmax).sum()))


def _tilted(params: ModelParams, q: float, t: float) -> np.ndarray:
    """Probability vector ``p_i**q * r_i**-t``, normalized."""
    z = _tau_terms(params, q, t)
    w = np.exp(z - z.max())
    return w / w.sum()


def tau(params: ModelParams, q: float) -> float:
    """L^q spectrum: the root in ``t`` of ``log sum p_i**q r_i**-t = 0``."""
    q = float(q)
    # The log-moment increases in t with slope in [log 3, log 6].
    f = lambda t: _log_moment(params, q, t)
    df = lambda t: float(-(_tilted(params, q, t) * _LOG_R).sum())
    lo, hi = -10.0, 10.0 * abs(q) + 10.0
    while f(lo) > 0:
        lo = 2.0 * lo - 10.0
    while f(hi) < 0:
        hi = 2.0 * hi + 10.0
    return _bisect_newton(f, df, lo, hi, ftol=1e-15)


def tau_prime(params: ModelParams, q: float) -> float:
    w = _tilted(params, q, tau(params, q))
    return float((w * params.log_weights).sum() / (w * _LOG_R).sum())


def alpha_tilde_min(params: ModelParams) -> float:
    return float(params.local_dims.min())


def alpha_tilde_max(params: ModelParams) -> float:
    return float(params.local_dims.max())


def alpha_tilde_lebesgue(params: ModelParams) -> float:
    lam = params.lam
    return params.gamma - math.log(36.0 * lam * lam - 1.0) / (4.0 * _LOG3 + 2.0 * _LOG6)


def _endpoint_dimension(params: ModelParams, which: str) -> float:
    """``tau*`` at an end of its support: the similarity dimension of the
    digits attaining the extreme local dimension."""
    dims = params.local_dims
    target = dims.min() if which == "min" else dims.max()
    idx = [i for i in range(4) if abs(dims[i] - target) <= _TIE_TOL * max(1.0, abs(target))]
    if len(idx) == 1:
        return 0.0
    g = lambda t: sum(RATIOS[i] ** t for i in idx) - 1.0
    return _bisect_newton(
        lambda t: -g(t), lambda t: -sum(RATIOS[i] ** t * math.log(RATIOS[i]) for i in idx), 0.0, 1.0
    )


def legendre(params: ModelParams, alpha: float) -> tuple[float, float]:
    """``(tau*(alpha), q_alpha)`` for ``alpha`` strictly inside the support.

    ``q_alpha`` solves ``tau'(q) = alpha`` (``tau'`` decreases in ``q``); it is
    searched in ``[-1000, 1000]`` and clamped there, in which case the
    returned value is ``alpha*q - tau(q)`` at the clamp, an upper bound
    converging to the endpoint value.
    """
    lo_a, hi_a = alpha_tilde_min(params), alpha_tilde_max(params)
    if not lo_a < alpha < hi_a:
        raise RangeError(f"alpha={alpha!r} outside the open support ({lo_a}, {hi_a})")
    f = lambda q: alpha - tau_prime(params, q)  # increasing in q
    if f(-Q_CAP) >= 0:
        q = -Q_CAP
    elif f(Q_CAP) <= 0:
        q = Q_CAP
    else:
        q = _bisect_newton(f, None, -Q_CAP, Q_CAP, xtol=1e-15)
    return alpha * q - tau(params, q), q


def tau_star(params: ModelParams, alpha: float) -> float:
    """Legendre transform on the closed support, ``-inf`` outside it."""
    lo_a, hi_a = alpha_tilde_min(params), alpha_tilde_max(params)
    if abs(alpha - lo_a) <= _ENDPOINT_TOL:
        return _endpoint_dimension(params, "min")
    if abs(alpha - hi_a) <= _ENDPOINT_TOL:
        return _endpoint_dimension(params, "max")
    if not lo_a < alpha < hi_a:
        return -math.inf
    return legendre(params, alpha)[0]


def beta_of_alpha(params: ModelParams, alpha: float) -> tuple[float, float, float, float]:
    """Digit frequencies whose frequency set realizes ``tau*(alpha)``."""
    _, q = legendre(params, alpha)
    return tuple(float(b) for b in _tilted(params, q, tau(params, q)))


def dim_frequency_set(params: ModelParams, beta: Sequence[float]) -> float:
    """Hausdorff dimension of the points with digit frequencies ``beta``."""
    beta = [float(b) for b in beta]
    if any(b < 0 for b in beta) or abs(sum(beta) - 1.0) > 1e-12:
        raise ValueError(f"beta must be a probability vector, got {beta}")
    num = sum(b * math.log(b) for b in beta if b > 0)
    den = sum(b * math.log(r) for b, r in zip(beta, params.ratios) if b > 0)
    return num / den


def local_dim_frequency(params: ModelParams, p: SymbolicPoint) -> float:
    """Local dimension of the measure at an eventually periodic point."""
    p.require_period()
    num, den = _frequency_ratio(params.lam, p.frequencies())
    return params.gamma - num / den


def dim_s() -> float:
    """Root of ``2*3**-s + 6**-s = 1``."""
    return _bisect_newton(
        lambda s: 1.0 - 2.0 * 3.0**-s - 6.0**-s,
        lambda s: 2.0 * _LOG3 * 3.0**-s + _LOG6 * 6.0**-s,
        0.0,
        1.0,
        ftol=1e-16,
    )


def alpha_min(lam: float) -> float:
    """Smallest pointwise exponent of ``F^lambda``."""
    return 1.0 - math.log(6.0 * lam + 1.0) / _LOG6


def alpha_lebesgue(lam: float) -> float:
    """Exponent of ``F^lambda`` at Lebesgue-almost every point."""
    return 1.0 - math.log(36.0 * lam * lam - 1.0) / (4.0 * _LOG3 + 2.0 * _LOG6)


def spectrum_validity(lam: float) -> str:
    """``EXACT`` above ``sqrt(2)/6``; ``LOWER_BOUND`` in ``(1/6, sqrt(2)/6]``."""
    lam = check_lambda(lam)
    return "EXACT" if lam > math.sqrt(2.0) / 6.0 else "LOWER_BOUND"


def spectrum_F(lam: float, alpha: float, params: ModelParams | None = None) -> float:
    """Multifractal spectrum of ``F^lambda``: ``tau*(alpha + gamma - 1)`` on
    ``[alpha_min, 1]`` and ``-inf`` elsewhere.

    Only a lower bound when ``lam <= sqrt(2)/6``, see :func:`spectrum_validity`.
    """
    lam = check_lambda(lam)
    params = params or solve_params(lam)
    a_min = alpha_min(lam)
    if alpha < a_min - _ENDPOINT_TOL or alpha > 1.0 + _ENDPOINT_TOL:
        return -math.inf
    shifted = alpha + params.gamma - 1.0
    if abs(alpha - a_min) <= _ENDPOINT_TOL:
        shifted = alpha_tilde_min(params)
    return tau_star(params, shifted)


def spectrum_graph(lam: float, n_q: int = 400) -> np.ndarray:
    """Points ``(alpha, d_F(alpha))`` sampled along the graph, endpoints included.

    The interior is parametrized by ``q`` on a grid that is dense near 0
    and reaches ``|q| = Q_CAP``; points with ``alpha > 1`` are cut.
    """
    lam = check_lambda(lam)
    params = solve_params(lam)
    shift = 1.0 - params.gamma
    u = np.linspace(-1.0, 1.0, n_q)
    qs = np.sinh(u * math.asinh(Q_CAP))
    pts = []
    for q in qs:
        t = tau(params, q)
        w = _tilted(params, q, t)
        a = float((w * params.log_weights).sum() / (w * _LOG_R).sum())
        if a + shift <= 1.0:
            pts.append((a + shift, a * q - t))
    pts.append((alpha_min(lam), 0.0))
    pts.append((1.0, spectrum_F(lam, 1.0, params)))
    pts.sort()
    return np.array(pts)


def hausdorff_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Hausdorff distance between two polylines given by sorted vertices."""

    def directed(P, S):
        a, b = S[:-1], S[1:]
        ab = b - a
        len2 = np.maximum((ab**2).sum(axis=1), 1e-300)
        worst = 0.0
        for p in P:
            t = np.clip(((p - a) * ab).sum(axis=1) / len2, 0.0, 1.0)
            d = np.sqrt((((a + t[:, None] * ab) - p) ** 2).sum(axis=1)).min()
            worst = max(worst, float(d))
        return worst

    return max(directed(A, B), directed(B, A))


def doubling_constant(
    params: ModelParams, samples: int = 200, seed: int = 0, tol: float = 1e-14
) -> float:
    """Largest observed ``mu(B(x, 2r)) / mu(B(x, r))`` over random balls.

    Centers are uniform rationals with denominator ``10**6``; radii are
    ``3**-k * u`` for ``k`` in ``1..8`` and ``u`` in ``[1/2, 1)``.  Balls are
    clipped to ``[0, 1]``.
    """
    rng = np.random.default_rng(seed)
    worst = 1.0
    for _ in range(samples):
        x = Fraction(int(rng.integers(0, 10**6 + 1)), 10**6)
        k = int(rng.integers(1, 9))
        r = Fraction(int(rng.integers(500, 1000)), 1000) / 3**k

        def ball(rad):
            lo, hi = max(Fraction(0), x - rad), min(Fraction(1), x + rad)
            return mass_of_interval(params, lo, hi, tol)[0]

        worst = max(worst, ball(2 * r) / ball(r))
    return worst
