import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from jumpvol import (
    ConfigurationError,
    DegenerateDataError,
    DegenerateInferenceError,
    DiffusionSpec,
    GibbsPosterior,
    InverseGammaParams,
    JumpSpec,
    NormalApprox,
    QvEstimate,
    SamplePath,
    ThresholdRule,
    bvm_normal,
    compute_kappa,
    compute_mle,
    credible_interval,
    derive_seed,
    estimate_jump_qv,
    gibbs_update,
    modify_posterior,
    simulate_path,
    tempered_update,
)

DIFF = DiffusionSpec(beta=1.0, theta_star=10.0, horizon=1.0)
JUMPS = JumpSpec.two_point(5.0, 3.0)
PRIOR = InverseGammaParams(1.0, 1.0)


def _qv(jump_qv_hat, eta=1.0, flagged=()):
    return QvEstimate(eta=eta, jump_qv_hat=jump_qv_hat, flagged=flagged)


def _path(increments, horizon=1.0):
    d = np.asarray(increments, dtype=float)
    return SamplePath(n=d.size, delta=horizon / d.size, increments=d)


# ---------------------------------------------------------------------------
# MLE
# ---------------------------------------------------------------------------

def test_mle_direct_formula():
    assert compute_mle(_path([1.0, 1.0, 1.0, 1.0])) == pytest.approx(4.0)
    assert compute_mle(_path([0.0, 0.0, 0.0])) == 0.0


def test_mle_chi_square_moment():
    # beta=0, no jumps: theta_hat is theta* times a chi^2_n / n, so its mean
    # is exactly theta*
    diff = DiffusionSpec(beta=0.0, theta_star=10.0, horizon=1.0)
    nojumps = JumpSpec.two_point(0.0, 1.0)
    reps = 2000
    estimates = np.empty(reps)
    for rep in range(reps):
        path = simulate_path(diff, nojumps, n=5000, seed=derive_seed(31, 0, rep))
        estimates[rep] = compute_mle(path)
    stderr = estimates.std(ddof=1) / math.sqrt(reps)
    assert abs(estimates.mean() - 10.0) < 3.0 * stderr


# ---------------------------------------------------------------------------
# Temperature
# ---------------------------------------------------------------------------

def test_kappa_no_detected_jumps_is_one():
    assert compute_kappa(10.0, _qv(0.0), horizon=1.0) == 1.0


def test_kappa_direct_arithmetic():
    assert compute_kappa(10.0, _qv(5.0), horizon=1.0) == pytest.approx(0.25)


def test_kappa_degenerate_cases():
    with pytest.raises(DegenerateDataError):
        compute_kappa(0.0, _qv(0.0), horizon=1.0)
    with pytest.raises(DegenerateInferenceError):
        compute_kappa(10.0, _qv(10.0 * (1.0 - 1e-4)), horizon=1.0)


def test_kappa_tracks_conditional_limit():
    # mean kappa over seeds matches mean (theta*/theta_dagger)^2 from truth,
    # each mean taken at its own Monte Carlo resolution
    rule = ThresholdRule.iqr()
    reps = 1000
    kappas = np.empty(reps)
    limits = np.empty(reps)
    for rep in range(reps):
        path = simulate_path(DIFF, JUMPS, n=5000, seed=derive_seed(33, 0, rep))
        qv = estimate_jump_qv(path.increments, rule.resolve(path.increments))
        kappas[rep] = compute_kappa(compute_mle(path), qv, path.horizon)
        dagger = DIFF.theta_star + path.truth.jump_qv / path.horizon
        limits[rep] = (DIFF.theta_star / dagger) ** 2
    assert np.all(kappas > 0.0) and np.all(kappas <= 1.0)
    stderr = max(kappas.std(ddof=1), limits.std(ddof=1)) / math.sqrt(reps)
    assert abs(kappas.mean() - limits.mean()) < 2.0 * stderr


def test_shifted_center_is_consistent():
    # over 1000 seeds the shifted center sits on theta* and its RMSE matches
    # the efficiency-benchmark scale sqrt(2 theta*^2 / n) within 50%
    rule = ThresholdRule.iqr()
    reps, n = 1000, 5000
    centers = np.empty(reps)
    for rep in range(reps):
        path = simulate_path(DIFF, JUMPS, n=n, seed=derive_seed(34, 0, rep))
        qv = estimate_jump_qv(path.increments, rule.resolve(path.increments))
        centers[rep] = compute_mle(path) - qv.jump_qv_hat / path.horizon
    assert 9.8 <= centers.mean() <= 10.2
    rmse = math.sqrt(np.mean((centers - DIFF.theta_star) ** 2))
    target = math.sqrt(2.0 * DIFF.theta_star**2 / n)
    assert abs(rmse - target) <= 0.5 * target


# ---------------------------------------------------------------------------
# Conjugate update
# ---------------------------------------------------------------------------

def test_update_conjugate_algebra():
    post = gibbs_update(PRIOR, _path([1.0, 1.0]), kappa=1.0)
    assert post.theta_hat == pytest.approx(2.0)
    assert post.ig.shape == pytest.approx(2.0)
    assert post.ig.rate == pytest.approx(3.0)


def test_update_tempering_limit_returns_prior():
    post = tempered_update(PRIOR, n=100, theta_hat=5.0, kappa=1e12)
    assert post.ig.shape == pytest.approx(PRIOR.shape, rel=1e-9)
    assert post.ig.rate == pytest.approx(PRIOR.rate, rel=1e-9)


def test_update_rejects_bad_temperature():
    with pytest.raises(DegenerateInferenceError):
        tempered_update(PRIOR, n=10, theta_hat=1.0, kappa=1e-7)
    with pytest.raises(DegenerateInferenceError):
        tempered_update(PRIOR, n=10, theta_hat=1.0, kappa=math.inf)


def _quadrature_moments(a, b, n, theta_hat, kappa):
    """Independent oracle: moments of L^(1/kappa) * prior by quadrature."""

    def logkern(t):
        like = (-n / (2.0 * kappa)) * math.log(t) - n * theta_hat / (2.0 * kappa * t)
        prior = (-a - 1.0) * math.log(t) - b / t
        return like + prior

    mode = (n * theta_hat / (2.0 * kappa) + b) / (n / (2.0 * kappa) + a + 1.0)
    scale = logkern(mode)

    def kern(t, k=0):
        return (t**k) * math.exp(logkern(t) - scale)

    lo = hi = mode
    while kern(hi) > 1e-18:
        hi *= 2.0
    while kern(lo) > 1e-18:
        lo *= 0.5
    z0 = quad(kern, lo, hi, limit=300, epsabs=1e-13, epsrel=1e-13)[0]
    z1 = quad(lambda t: kern(t, 1), lo, hi, limit=300, epsabs=1e-13, epsrel=1e-13)[0]
    z2 = quad(lambda t: kern(t, 2), lo, hi, limit=300, epsabs=1e-13, epsrel=1e-13)[0]
    mean = z1 / z0
    return mean, z2 / z0 - mean * mean


def test_update_matches_quadrature():
    rng = np.random.default_rng(101)
    for _ in range(25):
        a = rng.uniform(0.5, 5.0)
        b = rng.uniform(0.5, 5.0)
        kappa = rng.uniform(0.1, 1.5)
        n = int(rng.integers(5, 40))
        horizon = rng.uniform(0.5, 2.0)
        d = rng.normal(0.0, math.sqrt(rng.uniform(0.5, 4.0)), n)
        path = _path(d, horizon=horizon)
        post = gibbs_update(InverseGammaParams(a, b), path, kappa)
        mean_q, var_q = _quadrature_moments(a, b, n, compute_mle(path), kappa)
        assert post.mean == pytest.approx(mean_q, rel=1e-6)
        assert post.variance == pytest.approx(var_q, rel=1e-6)


def test_tempering_shrinks_posterior_variance():
    path = _path(np.full(40, 0.7))
    previous = math.inf
    for kappa in (1.0, 0.5, 0.25, 0.1):
        post = gibbs_update(PRIOR, path, kappa)
        assert post.variance < previous
        previous = post.variance


# ---------------------------------------------------------------------------
# Quantiles against an independent implementation
# ---------------------------------------------------------------------------

def test_quantiles_match_scipy():
    rng = np.random.default_rng(55)
    for _ in range(30):
        shape = 10 ** rng.uniform(-0.3, 5.0)
        rate = 10 ** rng.uniform(-1.0, 6.0)
        post = GibbsPosterior(ig=InverseGammaParams(shape, rate), kappa=1.0, n=1, theta_hat=1.0)
        frozen = stats.invgamma(shape, scale=rate)
        for q in (1e-6, 0.025, 0.5, 0.975, 1.0 - 1e-6):
            assert post.ppf(q) == pytest.approx(frozen.ppf(q), rel=1e-7)


def test_cdf_matches_scipy():
    post = tempered_update(PRIOR, n=20, theta_hat=2.5, kappa=0.8)
    frozen = stats.invgamma(post.ig.shape, scale=post.ig.rate)
    grid = np.linspace(0.5, 9.0, 40)
    np.testing.assert_allclose(post.cdf(grid), frozen.cdf(grid), rtol=1e-10)
    np.testing.assert_allclose(post.pdf(grid), frozen.pdf(grid), rtol=1e-10)


# ---------------------------------------------------------------------------
# Shifted posterior
# ---------------------------------------------------------------------------

def test_zero_shift_is_identity():
    post = tempered_update(PRIOR, n=50, theta_hat=3.0, kappa=0.5)
    modified = modify_posterior(post, _qv(0.0), horizon=1.0)
    assert modified.shift == 0.0
    grid = np.linspace(0.5, 8.0, 50)
    np.testing.assert_array_equal(modified.pdf(grid), post.pdf(grid))
    assert modified.ppf(0.3) == post.ppf(0.3)


def test_shift_moves_density_exactly():
    post = tempered_update(PRIOR, n=50, theta_hat=13.0, kappa=0.3)
    modified = modify_posterior(post, _qv(4.0), horizon=1.0)
    rng = np.random.default_rng(9)
    for theta in rng.uniform(-3.5, 30.0, 100):
        assert modified.pdf(theta) == post.pdf(theta + 4.0)


def test_interval_width_independent_of_shift():
    post = tempered_update(PRIOR, n=200, theta_hat=12.0, kappa=0.4)
    widths = []
    for shift in (0.0, 1.0, 5.0):
        modified = modify_posterior(post, _qv(shift), horizon=1.0)
        widths.append(credible_interval(modified, 0.9).width)
    assert widths[0] == pytest.approx(widths[1], rel=1e-12)
    assert widths[0] == pytest.approx(widths[2], rel=1e-12)


def test_truncated_positive_renormalizes():
    post = tempered_update(PRIOR, n=6, theta_hat=1.0, kappa=1.0)
    modified = modify_posterior(post, _qv(1.5), horizon=1.0)
    assert modified.mass_below_zero() > 0.01
    truncated = modified.truncated_positive()
    mass = quad(lambda x: truncated.pdf(x), 0.0, 100.0, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert truncated.cdf(0.0) == 0.0
    q = truncated.ppf(0.25)
    assert truncated.cdf(q) == pytest.approx(0.25, abs=1e-9)
    assert q > 0.0


# ---------------------------------------------------------------------------
# Credible intervals
# ---------------------------------------------------------------------------

def test_interval_levels_and_degeneracy():
    post = tempered_update(PRIOR, n=100, theta_hat=4.0, kappa=1.0)
    modified = modify_posterior(post, _qv(1.0), horizon=1.0)
    tiny = credible_interval(modified, 1e-9)
    median = modified.ppf(0.5)
    assert tiny.lo == pytest.approx(median, rel=1e-6)
    assert tiny.hi == pytest.approx(median, rel=1e-6)
    with pytest.raises(ConfigurationError):
        credible_interval(modified, 0.0)
    with pytest.raises(ConfigurationError):
        credible_interval(modified, 1.0)


def test_interval_quantiles_match_oracle():
    post = GibbsPosterior(ig=InverseGammaParams(3.0, 2.0), kappa=1.0, n=4, theta_hat=1.0)
    modified = modify_posterior(post, _qv(0.0), horizon=1.0)
    interval = credible_interval(modified, 0.5)
    frozen = stats.invgamma(3.0, scale=2.0)
    assert interval.lo == pytest.approx(frozen.ppf(0.25), rel=1e-8)
    assert interval.hi == pytest.approx(frozen.ppf(0.75), rel=1e-8)


def test_interval_mass_at_solver_tolerance():
    post = tempered_update(PRIOR, n=5000, theta_hat=55.0, kappa=0.03)
    modified = modify_posterior(post, _qv(45.0), horizon=1.0)
    interval = credible_interval(modified, 0.95)
    mass = modified.cdf(interval.hi) - modified.cdf(interval.lo)
    assert abs(mass - 0.95) < 2e-9


def test_interval_matches_normal_limit_without_jumps():
    nojumps = JumpSpec.two_point(0.0, 1.0)
    path = simulate_path(DIFF, nojumps, n=5000, seed=77)
    qv = estimate_jump_qv(path.increments, ThresholdRule.iqr().resolve(path.increments))
    theta_hat = compute_mle(path)
    post = gibbs_update(PRIOR, path, compute_kappa(theta_hat, qv, path.horizon))
    interval = credible_interval(modify_posterior(post, qv, path.horizon), 0.95)
    half = 1.96 * math.sqrt(2.0 * theta_hat**2 / path.n)
    assert interval.lo == pytest.approx(theta_hat - half, rel=0.02)
    assert interval.hi == pytest.approx(theta_hat + half, rel=0.02)


# ---------------------------------------------------------------------------
# Normal approximation
# ---------------------------------------------------------------------------

def test_bvm_normal_plug_in():
    approx = bvm_normal(10.0, _qv(0.0), horizon=1.0, n=5000)
    assert approx.mean == 10.0
    assert approx.variance == pytest.approx(0.04)
    approx = bvm_normal(12.0, _qv(2.0), horizon=1.0, n=5000)
    assert approx.mean == pytest.approx(10.0)
    assert approx.variance == pytest.approx(0.04)


def test_bvm_normal_rejects_nonpositive_center():
    with pytest.raises(DegenerateInferenceError):
        bvm_normal(2.0, _qv(2.0), horizon=1.0, n=100)


def test_normal_approx_quantiles():
    approx = NormalApprox(mean=3.0, variance=4.0)
    assert approx.ppf(0.5) == pytest.approx(3.0)
    assert approx.cdf(3.0) == pytest.approx(0.5)
    assert approx.ppf(0.975) == pytest.approx(3.0 + 2.0 * stats.norm.ppf(0.975), rel=1e-12)


# ---------------------------------------------------------------------------
# One-path illustration at the default experiment configuration
# ---------------------------------------------------------------------------

def test_single_path_inference_brackets_truth():
    path = simulate_path(DIFF, JUMPS, n=5000, seed=42)
    qv = estimate_jump_qv(path.increments, ThresholdRule.iqr().resolve(path.increments))
    theta_hat = compute_mle(path)
    kappa = compute_kappa(theta_hat, qv, path.horizon)
    post = gibbs_update(PRIOR, path, kappa)
    modified = modify_posterior(post, qv, path.horizon)
    interval = credible_interval(modified, 0.95)
    assert interval.contains(DIFF.theta_star)
    assert abs(modified.mean - DIFF.theta_star) < 0.5
