"""Empirical counterparts of the analytic spectrum: moment sums over triadic
grids, coarse-grained spectrum histograms and Monte-Carlo digit statistics."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ParameterError, ResourceError
from .measure import ModelParams, partition_masses

__all__ = [
    "MAX_LEVEL",
    "LEBESGUE_DIGIT_LAW",
    "grid_masses",
    "tau_empirical",
    "HistogramSpectrum",
    "spectrum_histogram",
    "McReport",
    "monte_carlo_typical",
]

MAX_LEVEL = 12
LEBESGUE_DIGIT_LAW = (1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0)
_LOG3 = math.log(3.0)
_LOG6 = math.log(6.0)
_MC_CHUNK = 1000


def _check_level(j: int) -> int:
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
        raise ParameterError(f"level must be an integer, got {j!r}")
    if j < 1:
        raise ParameterError(f"level must be >= 1, got {j}")
    if j > MAX_LEVEL:
        raise ResourceError(f"level {j} exceeds the cap {MAX_LEVEL}")
    return int(j)


@lru_cache(maxsize=16)
def _grid_masses_cached(params: ModelParams, j: int) -> np.ndarray:
    n = 3**j
    # Triadic rationals are generation endpoints, so the subdivision
    # resolves every cell exactly; tol only guards the recursion.
    masses, _ = partition_masses(params, [Fraction(k, n) for k in range(n + 1)], 9.0**-j * 1e-16)
    masses.setflags(write=False)
    return masses


def grid_masses(params: ModelParams, j: int) -> np.ndarray:
    """Masses of the ``3**j`` cells ``[k 3**-j, (k+1) 3**-j]`` (read-only)."""
    return _grid_masses_cached(params, _check_level(j))


def tau_empirical(params: ModelParams, q: float, j: int) -> float:
    """``-log(sum mu(cell)**q) / log(3**j)`` over the nonempty level-``j`` cells."""
    m = grid_masses(params, j)
    m = m[m > 0]
    z = q * np.log(m)
    zmax = z.max()
    log_sum = zmax + math.log(math.fsum(np.exp(z - zmax)))
    return float(-log_sum / (j * _LOG3))


@dataclass(frozen=True)
class HistogramSpectrum:
    level: int
    bin_width: float
    alpha_centers: np.ndarray
    counts: np.ndarray
    f_values: np.ndarray

    @property
    def bins(self) -> list[tuple[float, float]]:
        return list(zip(self.alpha_centers.tolist(), self.f_values.tolist()))

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def peak_alpha(self) -> float:
        return float(self.alpha_centers[int(np.argmax(self.counts))])


def spectrum_histogram(params: ModelParams, j: int, bin_width: float = 0.02) -> HistogramSpectrum:
    """Coarse-grained spectrum of the measure at level ``j``.

    Each nonempty cell gets ``alpha = log mu(cell) / log 3**-j``; cells are
    binned on a grid of multiples of ``bin_width`` and each nonempty bin
    reports ``f = log(count) / (j log 3)``.
    """
    if not bin_width > 0:
        raise ParameterError(f"bin_width must be positive, got {bin_width!r}")
    m = grid_masses(params, j)
    m = m[m > 0]
    alpha = np.log(m) / (-j * _LOG3)
    idx = np.floor(alpha / bin_width).astype(np.int64)
    keys, counts = np.unique(idx, return_counts=True)
    centers = (keys + 0.5) * bin_width
    f = np.log(counts) / (j * _LOG3)
    return HistogramSpectrum(j, float(bin_width), centers, counts, f)


@dataclass(frozen=True)
class McReport:
    sample_count: int
    depth: int
    seed: int
    lam: float
    # Frequencies in the order (beta_03, beta_12, beta_1, beta_2) / depth.
    freq_mean: tuple[float, float, float, float]
    freq_std: tuple[float, float, float, float]
    exponent_mean: float
    exponent_std: float

    FREQ_NAMES = ("beta03", "beta12", "beta1", "beta2")

    def as_dict(self) -> dict:
        out = {
            "sample_count": self.sample_count,
            "depth": self.depth,
            "seed": self.seed,
            "lambda": self.lam,
            "exponent_mean": self.exponent_mean,
            "exponent_std": self.exponent_std,
        }
        for name, mu, sd in zip(self.FREQ_NAMES, self.freq_mean, self.freq_std):
            out[f"{name}_mean"] = mu
            out[f"{name}_std"] = sd
        return out


def _log_slopes_final(lam: float, digits: np.ndarray) -> np.ndarray:
    """``log|m_N|`` for each row of a digit matrix, ``-inf`` if never active."""
    c = 6.0 * lam
    logm = np.full(digits.shape[0], -np.inf)
    for col in digits.T:
        active = np.isfinite(logm)
        up = col == 1
        down = col == 2
        # |m'| = |m| (1 + c sqrt(1 + m**-2)) for digit 1, |m| (c sqrt(1 + m**-2) - 1) for 2
        with np.errstate(over="ignore"):
            root = c * np.sqrt(1.0 + np.exp(-2.0 * np.where(active, logm, 0.0)))
        logm = np.where(active & up, logm + np.log1p(root), logm)
        logm = np.where(active & down, logm + np.log(root - 1.0), logm)
        logm = np.where(~active & (up | down), math.log(c), logm)
    return logm


def _mc_chunk(lam: float, n: int, depth: int, seq: np.random.SeedSequence) -> np.ndarray:
    """Per-sample (beta03, beta12, beta1, beta2, exponent) for one stream."""
    rng = np.random.default_rng(seq)
    digits = rng.choice(4, size=(n, depth), p=LEBESGUE_DIGIT_LAW).astype(np.int8)
    counts = np.stack([(digits == d).sum(axis=1) for d in range(4)], axis=1)
    b03 = counts[:, 0] + counts[:, 3]
    b12 = counts[:, 1] + counts[:, 2]
    log_inv_ell = b03 * _LOG3 + b12 * _LOG6
    logm = _log_slopes_final(lam, digits)
    exponent = np.clip(1.0 - np.where(np.isfinite(logm), logm, 0.0) / log_inv_ell, 0.0, 1.0)
    out = np.empty((n, 5))
    out[:, 0] = b03 / depth
    out[:, 1] = b12 / depth
    out[:, 2] = counts[:, 1] / depth
    out[:, 3] = counts[:, 2] / depth
    out[:, 4] = exponent
    return out


def monte_carlo_typical(
    params: ModelParams, samples: int, depth: int, seed: int = 42, *, workers: int = 1
) -> McReport:
    """Digit frequencies and slope exponents of Lebesgue-typical points.

    Digit words are drawn i.i.d. from the Lebesgue-invariant law
    ``(1/3, 1/6, 1/6, 1/3)``.  The exponent of a sample is
    ``1 - log|m_N| / |log ell_N|`` at the final depth ``N``.  Samples are
    split into fixed chunks with their own spawned seed, so the report
    does not depend on ``workers``.
    """
    if samples < 1 or depth < 1:
        raise ParameterError("samples and depth must be >= 1")
    sizes = [_MC_CHUNK] * (samples // _MC_CHUNK)
    if samples % _MC_CHUNK:
        sizes.append(samples % _MC_CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(params.lam, n, depth, s) for n, s in zip(sizes, seqs)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _mc_chunk(*a), jobs))
    else:
        parts = [_mc_chunk(*a) for a in jobs]
    data = np.concatenate(parts)
    means, stds = [], []
    for col in data.T:
        mu = math.fsum(col) / samples
        var = math.fsum((col - mu) ** 2) / max(samples - 1, 1)
        means.append(mu)
        stds.append(math.sqrt(var))
    return McReport(
        samples, depth, int(seed), params.lam,
        tuple(means[:4]), tuple(stds[:4]), means[4], stds[4],
    )
