"""Rayleigh MIMO Monte Carlo: ML decoding, union bounds, and the Gaussian PEP.

Model: Y = sqrt(rho/n) * H * X + W with H (m x n) and W (m x n) having
i.i.d. circularly symmetric unit-variance complex Gaussian entries, and X
drawn uniformly from a finite codebook.  Decoding is exhaustive maximum
likelihood with ties broken toward the lowest codeword index.

Reproducibility contract: one master seed; the random stream of trial t at
SNR index q is a fixed window of a counter-based generator (Philox keyed
by the seed, counter block (t * blocks_per_trial, 0, q, tag)).  Batching
trials therefore cannot change results, and identical (config, seed) give
bit-identical output.  Within a trial the draw layout is: 2mn uniforms for
H, one uniform for the sent index, 2mn uniforms for W; normals come from
the Box-Muller transform so each trial consumes a fixed number of draws.

Union bounds are computed with exact constants, exp(-rho/(8n)*||H D||^2)
summed over the nonzero scaled difference lattice, so dominance over the
Monte Carlo error frequency is a true inequality rather than an asymptotic
statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra, codebook as codebook_mod
from .errors import CapExceededError, UsageError

WILSON_Z = 1.959963984540054  # two-sided 95%

_STREAM_TAG = 0x1F2E3D4C
_DECODER_CAP = 10 ** 5


def q_function(x: float) -> float:
    """Gaussian tail probability via erfc (far below 1e-7 error)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; valid at low counts."""
    if trials <= 0:
        raise UsageError("trials must be positive")
    phat = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)) / denom
    # clamp against rounding so the interval always contains the estimate
    return min(max(center - half, 0.0), phat), max(min(center + half, 1.0), phat)


def sample_channel(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m x n matrix of i.i.d. CN(0, 1) entries (real/imag variance 1/2 each)."""
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)


def pairwise_chernoff(H: np.ndarray, delta, rho: float, n: int) -> float:
    """Chernoff bound exp(-rho/(8n) * ||H delta||^2) on the pairwise error."""
    d = delta.entries if isinstance(delta, algebra.CodeMatrix) else np.asarray(delta)
    hd = np.asarray(H) @ d
    return float(np.exp(-(rho / (8.0 * n)) * np.sum(np.abs(hd) ** 2)))


def pep_average_closed(X, c: float, m: int) -> float:
    """Exact Gaussian average of exp(-c ||H X||^2): det(I + c X X*)^-m."""
    x = X.entries if isinstance(X, algebra.CodeMatrix) else np.asarray(X)
    gram = np.eye(x.shape[0]) + c * (x @ x.conj().T)
    return float(np.real(np.linalg.det(gram)) ** (-m))


def pep_mc_estimate(X, c: float, m: int, draws: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of E[exp(-c ||H X||^2)] with its standard error."""
    x = X.entries if isinstance(X, algebra.CodeMatrix) else np.asarray(X)
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    H = (rng.standard_normal((draws, m, n)) + 1j * rng.standard_normal((draws, m, n))) / math.sqrt(2.0)
    vals = np.exp(-c * np.sum(np.abs(H @ x) ** 2, axis=(1, 2)))
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(draws))
    return mean, stderr


def difference_matrices(book: codebook_mod.Codebook, *, cap: int = codebook_mod.ENUMERATION_CAP) -> np.ndarray:
    """Nonzero scaled difference matrices M^-1 psi(Lambda(2M)), shape (K, n, n).

    Code linearity makes every codeword difference land in the doubled
    ball, so summing pairwise bounds over this set covers every pair.
    """
    elements = codebook_mod.enumerate_ball(book.preset_id, 2.0 * book.M, cap=cap)
    n = algebra.get_preset(book.preset_id).degree_n
    if not elements:
        return np.zeros((0, n, n), dtype=np.complex128)
    basis = algebra.get_basis(book.preset_id)
    coords = np.array([e.coords for e in elements], dtype=np.int64)
    return algebra.embed_batch(coords, basis) / book.M


def union_bound_conditional(book: codebook_mod.Codebook, H: np.ndarray, rho: float,
                            diffs: np.ndarray | None = None) -> float:
    """Conditional union bound: sum of Chernoff terms over the difference set.

    Not capped at 1; callers that average over channels cap per channel.
    """
    if diffs is None:
        diffs = difference_matrices(book)
    if len(diffs) == 0:
        return 0.0
    n = algebra.get_preset(book.preset_id).degree_n
    hd = np.einsum("ij,kjl->kil", np.asarray(H), diffs)
    norms = np.sum(np.abs(hd) ** 2, axis=(1, 2))
    return float(np.sum(np.exp(-(rho / (8.0 * n)) * norms)))


def transmit_and_decode(book: codebook_mod.Codebook, H: np.ndarray, rho: float,
                        rng: np.random.Generator, *, sent_index: int | None = None,
                        noise: np.ndarray | None = None,
                        decoder_cap: int = _DECODER_CAP) -> tuple[int, int]:
    """One channel use: uniform codeword, Gaussian noise, exhaustive ML decode."""
    K = len(book)
    if K == 0:
        raise UsageError("codebook is empty")
    if K > decoder_cap:
        raise CapExceededError(f"codebook size {K} above decoder cap {decoder_cap}")
    n = algebra.get_preset(book.preset_id).degree_n
    m = np.asarray(H).shape[0]
    if sent_index is None:
        sent_index = int(rng.integers(K))
    if noise is None:
        noise = sample_channel(m, n, rng) * math.sqrt(2.0)  # unit-variance complex entries
    a = math.sqrt(rho / n)
    X = np.stack([cm.entries for cm in book.matrices])
    y = a * (H @ X[sent_index]) + noise
    metrics = np.sum(np.abs(y[None, :, :] - a * np.einsum("ij,kjl->kil", H, X)) ** 2, axis=(1, 2))
    return sent_index, int(np.argmin(metrics))


# ---------------------------------------------------------------------------
# batched estimator

@dataclass(frozen=True)
class SimConfig:
    """Inputs of one error-probability estimation run."""

    preset: str
    n: int
    m: int
    rho_list: tuple[float, ...]
    trials: int
    seed: int
    r: float | None = None
    frobenius_radius: float | None = None
    compute_union_bound: bool = True
    decoder_cap: int = _DECODER_CAP

    def __post_init__(self):
        preset = algebra.get_preset(self.preset)
        if self.n != preset.degree_n:
            raise UsageError(
                f"preset {self.preset} transmits over n={preset.degree_n} antennas, got n={self.n}"
            )
        if self.m < 1:
            raise UsageError("receive antenna count must be positive")
        if self.trials < 100:
            raise UsageError(f"need at least 100 trials, got {self.trials}")
        rho = self.rho_list
        if not rho or any(b <= a for a, b in zip(rho, rho[1:])) or rho[0] <= 0:
            raise UsageError("rho_list must be ascending and positive")
        if (self.r is None) == (self.frobenius_radius is None):
            raise UsageError("exactly one of r and frobenius_radius must be set")


@dataclass(frozen=True)
class SimPoint:
    rho: float
    rho_db: float
    trials: int
    errors: int
    pe_hat: float
    ci_low: float
    ci_high: float
    union_bound_mean: float | None


@dataclass(frozen=True)
class SimResult:
    points: tuple[SimPoint, ...]
    slope: float | None
    slope_se: float | None
    slope_rhos: tuple[float, ...]
    excluded_rhos: tuple[float, ...]


def _trial_uniforms(seed: int, stream: int, trial_start: int, n_trials: int,
                    doubles_per_trial: int) -> np.ndarray:
    """Uniform draws for trials [trial_start, trial_start + n_trials).

    Each trial owns a fixed block range of the Philox counter, so any
    batch partition yields bit-identical values.
    """
    blocks = -(-doubles_per_trial // 4)
    bitgen = np.random.Philox(
        key=np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        counter=[trial_start * blocks, 0, stream, _STREAM_TAG],
    )
    vals = np.random.Generator(bitgen).random(n_trials * blocks * 4)
    return vals.reshape(n_trials, blocks * 4)[:, :doubles_per_trial]


def _box_muller(u: np.ndarray) -> np.ndarray:
    u1 = np.maximum(u[..., 0::2], 1e-300)
    u2 = u[..., 1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    out = np.empty_like(u)
    out[..., 0::2] = radius * np.cos(2.0 * np.pi * u2)
    out[..., 1::2] = radius * np.sin(2.0 * np.pi * u2)
    return out


def _complex_from_normals(z: np.ndarray, rows: int, cols: int) -> np.ndarray:
    re = z[:, 0::2]
    im = z[:, 1::2]
    return ((re + 1j * im) / math.sqrt(2.0)).reshape(-1, rows, cols)


def _build_codebook(config: SimConfig, rho: float) -> codebook_mod.Codebook:
    if config.frobenius_radius is not None:
        return codebook_mod.build_code_fixed_radius(config.preset, config.frobenius_radius, rho)
    return codebook_mod.build_code(config.preset, rho, config.r)


def fit_loglog_slope(rhos, pes, variances=None) -> tuple[float, float]:
    """Least-squares slope of log10(pe) on log10(rho) with its standard error.

    The slope is the ordinary unweighted estimator; when per-point
    variances of log10(pe) are supplied the standard error propagates
    them through the estimator, otherwise it comes from residuals.
    """
    x = np.log10(np.asarray(rhos, dtype=np.float64))
    y = np.log10(np.asarray(pes, dtype=np.float64))
    xbar = float(x.mean())
    sxx = float(np.sum((x - xbar) ** 2))
    coeffs = (x - xbar) / sxx
    slope = float(np.sum(coeffs * y))
    if variances is not None:
        se = math.sqrt(float(np.sum(coeffs ** 2 * np.asarray(variances, dtype=np.float64))))
    else:
        resid = y - (y.mean() + slope * (x - xbar))
        dof = max(len(x) - 2, 1)
        se = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    return slope, se


def estimate_pe(config: SimConfig, *, batch_size: int = 4096,
                slope_min_errors: int = 20) -> SimResult:
    """Per-SNR error frequency with Wilson 95% intervals and union-bound means.

    The slope is a weighted log-log fit over the top SNR decade, using only
    points with at least `slope_min_errors` observed errors; anything else
    is reported in excluded_rhos.
    """
    preset = algebra.get_preset(config.preset)
    n = preset.degree_n
    m = config.m
    budget = 4 * m * n + 1
    points: list[SimPoint] = []
    for stream, rho in enumerate(config.rho_list):
        book = _build_codebook(config, rho)
        K = len(book)
        if K > config.decoder_cap:
            raise CapExceededError(f"codebook size {K} above decoder cap {config.decoder_cap}")
        X = np.stack([cm.entries for cm in book.matrices])
        diffs = None
        if config.compute_union_bound:
            diffs = difference_matrices(book)
        a = math.sqrt(rho / n)
        errors = 0
        ub_vals = np.zeros(config.trials) if config.compute_union_bound else None
        done = 0
        while done < config.trials:
            bsize = min(batch_size, config.trials - done)
            u = _trial_uniforms(config.seed, stream, done, bsize, budget)
            H = _complex_from_normals(_box_muller(u[:, : 2 * m * n]), m, n)
            sent = np.minimum((u[:, 2 * m * n] * K).astype(np.int64), K - 1)
            W = _complex_from_normals(_box_muller(u[:, 2 * m * n + 1:]), m, n) * math.sqrt(2.0)
            hx = np.einsum("tij,kjl->tkil", H, X)
            y = a * hx[np.arange(bsize), sent] + W
            metrics = np.sum(np.abs(y[:, None, :, :] - a * hx) ** 2, axis=(2, 3))
            decoded = np.argmin(metrics, axis=1)
            errors += int(np.sum(decoded != sent))
            if diffs is not None and len(diffs):
                hd = np.einsum("tij,kjl->tkil", H, diffs)
                terms = np.exp(-(rho / (8.0 * n)) * np.sum(np.abs(hd) ** 2, axis=(2, 3)))
                ub_vals[done:done + bsize] = np.minimum(terms.sum(axis=1), 1.0)
            done += bsize
        pe_hat = errors / config.trials
        lo, hi = wilson_interval(errors, config.trials)
        ub_mean = None
        if config.compute_union_bound:
            # single full-array reduction keeps the mean independent of batching
            ub_mean = float(np.sum(ub_vals)) / config.trials
        points.append(SimPoint(
            rho=rho, rho_db=10.0 * math.log10(rho), trials=config.trials,
            errors=errors, pe_hat=pe_hat, ci_low=lo, ci_high=hi,
            union_bound_mean=ub_mean,
        ))
    rho_floor = max(config.rho_list) / 10.0 * (1.0 - 1e-9)
    usable = [pt for pt in points if pt.errors >= slope_min_errors and pt.rho >= rho_floor]
    excluded = tuple(pt.rho for pt in points if pt not in usable)
    slope = slope_se = None
    if len(usable) >= 2:
        variances = [
            max((1.0 - pt.pe_hat) / (pt.errors * math.log(10.0) ** 2), 1e-12)
            for pt in usable
        ]
        slope, slope_se = fit_loglog_slope(
            [pt.rho for pt in usable], [pt.pe_hat for pt in usable], variances
        )
    return SimResult(
        points=tuple(points), slope=slope, slope_se=slope_se,
        slope_rhos=tuple(pt.rho for pt in usable), excluded_rhos=excluded,
    )
