"""Monte Carlo machinery: channel statistics, bounds, and reproducibility."""

import math

import numpy as np
import pytest

from dmtcodes import algebra, codebook as cb, sim
from dmtcodes.errors import CapExceededError, UsageError
from dmtcodes.sim import SimConfig

LIP = "LIPSCHITZ_RAMIFIED"


def small_book(M=math.sqrt(2), rho=100.0):
    return cb.build_code_fixed_radius(LIP, M, rho)


# --- channel sampling -------------------------------------------------------

def test_channel_second_moment():
    draws = 100_000
    rng = np.random.default_rng(3)
    sq = np.empty(draws)
    for i in range(0, draws, 10_000):
        block = np.stack([sim.sample_channel(2, 2, rng) for _ in range(10_000)])
        sq[i:i + 10_000] = np.sum(np.abs(block) ** 2, axis=(1, 2))
    sigma = sq.std(ddof=1) / math.sqrt(draws)
    assert abs(sq.mean() - 4.0) <= 3.0 * sigma


def test_channel_mean_centered():
    rng = np.random.default_rng(4)
    block = np.stack([sim.sample_channel(2, 2, rng) for _ in range(20_000)])
    entries = block.reshape(-1)
    se = entries.std(ddof=1) / math.sqrt(entries.size)
    assert abs(entries.mean()) <= 3.0 * abs(se)


def test_channel_seed_determinism():
    a = sim.sample_channel(3, 2, np.random.default_rng(99))
    b = sim.sample_channel(3, 2, np.random.default_rng(99))
    assert np.array_equal(a, b)


# --- Q function and Chernoff -------------------------------------------------

def test_q_function_reference_values():
    # frozen from the standard normal table (erfc is far tighter than 1e-7)
    assert sim.q_function(0.0) == pytest.approx(0.5, abs=1e-12)
    assert sim.q_function(1.0) == pytest.approx(0.15865525393145707, abs=1e-9)
    assert sim.q_function(3.0) == pytest.approx(0.0013498980316300933, abs=1e-9)


def test_chernoff_trivials():
    assert sim.pairwise_chernoff(np.eye(2), np.zeros((2, 2)), 100.0, 2) == 1.0
    assert sim.pairwise_chernoff(np.zeros((2, 2)), np.eye(2), 100.0, 2) == 1.0
    # rho = 8n and ||H delta||^2 = 1 gives e^-1
    H = np.array([[1.0, 0.0], [0.0, 0.0]])
    delta = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert sim.pairwise_chernoff(H, delta, 16.0, 2) == pytest.approx(math.exp(-1.0))


def test_chernoff_dominates_exact_pairwise():
    rng = np.random.default_rng(6)
    n = 2
    for _ in range(1000):
        H = sim.sample_channel(2, n, rng)
        delta = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        rho = float(rng.uniform(0.1, 1000.0))
        arg = math.sqrt(rho / (2 * n)) * np.linalg.norm(H @ delta)
        exact = sim.q_function(arg)
        assert exact <= sim.pairwise_chernoff(H, delta, rho, n) + 1e-15


# --- decoding ----------------------------------------------------------------

def test_noiseless_decode_recovers_sent():
    book = small_book()
    H = np.eye(2, dtype=complex)
    rng = np.random.default_rng(0)
    for sent in range(len(book)):
        got_sent, decoded = sim.transmit_and_decode(
            book, H, 100.0, rng, sent_index=sent, noise=np.zeros((2, 2)))
        assert (got_sent, decoded) == (sent, sent)


def test_decoder_cap():
    book = small_book()
    with pytest.raises(CapExceededError):
        sim.transmit_and_decode(book, np.eye(2), 10.0, np.random.default_rng(0),
                                decoder_cap=3)


def test_single_codeword_never_errs():
    config = SimConfig(preset=LIP, n=2, m=2, rho_list=(5.0, 10.0), trials=300,
                       seed=1, frobenius_radius=0.5)
    res = sim.estimate_pe(config)
    for pt in res.points:
        assert pt.errors == 0
        assert pt.union_bound_mean == 0.0


# --- union bound -------------------------------------------------------------

def test_union_bound_zero_channel_counts_points():
    book = small_book()
    diffs = sim.difference_matrices(book)
    val = sim.union_bound_conditional(book, np.zeros((2, 2)), 100.0, diffs)
    assert val == pytest.approx(len(diffs))
    assert len(diffs) == cb.ball_count(LIP, 2 * book.M)


def test_union_bound_dominates_conditional_frequency():
    book = small_book()
    diffs = sim.difference_matrices(book)
    rho = 10 ** (12 / 10)
    n, m = 2, 2
    a = math.sqrt(rho / n)
    X = np.stack([cm.entries for cm in book.matrices])
    rng = np.random.default_rng(1234)
    draws = 1000
    for _ in range(20):
        H = sim.sample_channel(m, n, rng)
        bound = sim.union_bound_conditional(book, H, rho, diffs)
        sent = rng.integers(len(book), size=draws)
        W = (rng.standard_normal((draws, m, n)) + 1j * rng.standard_normal((draws, m, n))) / math.sqrt(2) * math.sqrt(2)
        hx = np.einsum("ij,kjl->kil", H, X)
        y = a * hx[sent] + W
        metrics = np.sum(np.abs(y[:, None] - a * hx[None, :]) ** 2, axis=(2, 3))
        freq = float(np.mean(np.argmin(metrics, axis=1) != sent))
        se = math.sqrt(max(freq * (1 - freq), 1e-9) / draws)
        assert freq <= min(bound, 1.0) + 2.0 * se


# --- Gaussian determinant identity --------------------------------------------

def test_pep_closed_trivials():
    assert sim.pep_average_closed(np.zeros((2, 2)), 1.0, 2) == 1.0
    assert sim.pep_average_closed(np.eye(2), 1.0, 2) == pytest.approx(1.0 / 16.0)


def test_pep_closed_matches_monte_carlo():
    rng = np.random.default_rng(7)
    for case in range(5):
        x = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / 2.0
        for c, m in ((1.0, 1), (1.0, 2), (5.0, 2)):
            closed = sim.pep_average_closed(x, c, m)
            mc, se = sim.pep_mc_estimate(x, c, m, 100_000, seed=100 + case)
            assert abs(mc - closed) <= 3.0 * se, (case, c, m)


# --- estimator ----------------------------------------------------------------

def test_estimate_pe_reproducible_and_partition_invariant():
    config = SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0, 100.0), trials=500,
                       seed=21, frobenius_radius=math.sqrt(2))
    res = sim.estimate_pe(config)
    assert res == sim.estimate_pe(config)
    assert res == sim.estimate_pe(config, batch_size=77)


def test_per_trial_streams_are_counter_addressed():
    # a batch equals the concatenation of single-trial draws
    batch = sim._trial_uniforms(seed=5, stream=2, trial_start=10, n_trials=6,
                                doubles_per_trial=17)
    singles = np.vstack([
        sim._trial_uniforms(seed=5, stream=2, trial_start=10 + t, n_trials=1,
                            doubles_per_trial=17)
        for t in range(6)
    ])
    assert np.array_equal(batch, singles)


def test_estimate_pe_interval_shape_and_bound():
    config = SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0, 31.6), trials=2000,
                       seed=3, frobenius_radius=math.sqrt(2))
    res = sim.estimate_pe(config)
    for pt in res.points:
        assert 0.0 <= pt.ci_low <= pt.pe_hat <= pt.ci_high <= 1.0
        ci = pt.ci_high - pt.pe_hat
        assert pt.pe_hat <= pt.union_bound_mean + ci


def test_estimate_pe_low_snr_limit():
    config = SimConfig(preset=LIP, n=2, m=2, rho_list=(1e-9,), trials=4000,
                       seed=5, frobenius_radius=math.sqrt(2),
                       compute_union_bound=False)
    pt = sim.estimate_pe(config).points[0]
    expected = 1.0 - 1.0 / 9.0  # decoder independent of the sent word
    se = math.sqrt(expected * (1 - expected) / pt.trials)
    assert abs(pt.pe_hat - expected) <= 4.0 * se


def test_ci_width_scales_with_trials():
    base = SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0,), trials=2000,
                     seed=8, frobenius_radius=math.sqrt(2), compute_union_bound=False)
    double = SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0,), trials=4000,
                       seed=8, frobenius_radius=math.sqrt(2), compute_union_bound=False)
    w1 = (lambda p: p.ci_high - p.ci_low)(sim.estimate_pe(base).points[0])
    w2 = (lambda p: p.ci_high - p.ci_low)(sim.estimate_pe(double).points[0])
    ratio = w2 / w1
    assert abs(ratio - 1.0 / math.sqrt(2.0)) <= 0.2 / math.sqrt(2.0)


def test_wilson_interval_edges():
    lo, hi = sim.wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.1
    lo1, hi1 = sim.wilson_interval(100, 100)
    assert hi1 == 1.0 and 0.9 < lo1 < 1.0


def test_slope_fit():
    # exact power law: slope recovered exactly, se ~ 0
    rhos = [10.0, 100.0, 1000.0]
    pes = [1e-1, 1e-3, 1e-5]
    slope, se = sim.fit_loglog_slope(rhos, pes)
    assert slope == pytest.approx(-2.0, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-9)


def test_config_validation():
    with pytest.raises(UsageError):
        SimConfig(preset=LIP, n=3, m=2, rho_list=(10.0,), trials=500, seed=0, r=0.5)
    with pytest.raises(UsageError):
        SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0,), trials=50, seed=0, r=0.5)
    with pytest.raises(UsageError):
        SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0, 5.0), trials=500, seed=0, r=0.5)
    with pytest.raises(UsageError):
        SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0,), trials=500, seed=0)
    with pytest.raises(UsageError):
        SimConfig(preset=LIP, n=2, m=2, rho_list=(10.0,), trials=500, seed=0,
                  r=0.5, frobenius_radius=1.0)


def test_estimate_pe_rate_mode_builds_per_rho():
    config = SimConfig(preset=LIP, n=2, m=2, rho_list=(4.0, 16.0), trials=200,
                       seed=2, r=1.0, compute_union_bound=False)
    res = sim.estimate_pe(config)
    assert len(res.points) == 2
