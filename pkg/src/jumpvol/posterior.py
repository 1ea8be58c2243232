"""Volatility inference from increments that deliberately ignore the jumps.

Treating the increments as iid ``N(0, theta * delta)`` gives a closed-form
likelihood whose maximizer is ``theta_hat = T^{-1} sum D_i^2``.  The working
posterior raises that likelihood to the power ``1/kappa`` (a temperature) and
stays conjugate to an inverse-gamma prior:

    shape' = a + n / (2 * kappa),    rate' = b + n * theta_hat / (2 * kappa).

Two corrections repair the damage the ignored jumps do to this posterior:
the temperature ``kappa = (1 - jump_qv_hat / (T * theta_hat))^2`` restores
the efficient spread, and subtracting ``jump_qv_hat / T`` from the location
re-centers it on the diffusion volatility.  For large n the corrected
posterior is close to ``N(theta_hat - jump_qv_hat / T, 2 * center^2 / n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DegenerateInferenceError,
    NumericError,
)
from .simulate import SamplePath
from .threshold import QvEstimate

#: Temperatures below this floor mean essentially all variation was flagged
#: as jumps; inference is refused rather than numerically exploded.
KAPPA_FLOOR = 1e-6

#: Absolute tolerance on posterior mass for quantile bisection.
QUANTILE_TOL = 1e-9


@dataclass(frozen=True)
class InverseGammaParams:
    """Shape/rate parameters of an inverse-gamma law
    (density proportional to ``x^{-shape-1} exp(-rate/x)`` on ``x > 0``)."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ConfigurationError(f"shape must be positive and finite, got {self.shape}")
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ConfigurationError(f"rate must be positive and finite, got {self.rate}")


def _invgamma_lognorm(shape: float, rate: float) -> float:
    return shape * math.log(rate) - float(sc.gammaln(shape))


def _invgamma_pdf(x, shape: float, rate: float):
    if np.isscalar(x) or np.ndim(x) == 0:
        x = float(x)
        if x <= 0.0:
            return 0.0
        arg = _invgamma_lognorm(shape, rate) - (shape + 1.0) * math.log(x) - rate / x
        return math.exp(arg) if arg > -745.0 else 0.0
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(
            _invgamma_lognorm(shape, rate) - (shape + 1.0) * np.log(x[pos]) - rate / x[pos]
        )
    return out


def _invgamma_cdf(x, shape: float, rate: float):
    if np.isscalar(x) or np.ndim(x) == 0:
        x = float(x)
        return float(sc.gammaincc(shape, rate / x)) if x > 0.0 else 0.0
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = sc.gammaincc(shape, rate / x[pos])
    return out


def _invgamma_ppf(q: float, shape: float, rate: float, tol: float = QUANTILE_TOL) -> float:
    """Inverse-gamma quantile by bisection on the regularized incomplete gamma."""
    if not 0.0 < q < 1.0:
        raise ConfigurationError(f"quantile level must lie in (0, 1), got {q}")

    def cdf(x: float) -> float:
        return float(sc.gammaincc(shape, rate / x))

    mode = rate / (shape + 1.0)
    lo = hi = mode
    for _ in range(2000):
        if cdf(lo) <= q:
            break
        lo *= 0.5
    else:
        raise NumericError(f"quantile bracket failed below (shape={shape}, rate={rate}, q={q})")
    for _ in range(2000):
        if cdf(hi) >= q:
            break
        hi *= 2.0
    else:
        raise NumericError(f"quantile bracket failed above (shape={shape}, rate={rate}, q={q})")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    residual = abs(cdf(x) - q)
    if residual > tol:
        raise NumericError(
            f"quantile solver did not converge: shape={shape}, rate={rate}, "
            f"q={q}, x={x}, mass residual={residual:.3e}"
        )
    return x


@dataclass(frozen=True)
class GibbsPosterior:
    """Tempered conjugate posterior: an inverse-gamma law plus its context."""

    ig: InverseGammaParams
    kappa: float
    n: int
    theta_hat: float

    def pdf(self, x):
        return _invgamma_pdf(x, self.ig.shape, self.ig.rate)

    def cdf(self, x):
        return _invgamma_cdf(x, self.ig.shape, self.ig.rate)

    def ppf(self, q: float) -> float:
        return _invgamma_ppf(q, self.ig.shape, self.ig.rate)

    @property
    def mean(self) -> float:
        if self.ig.shape <= 1:
            raise ValueError(f"mean undefined for shape {self.ig.shape} <= 1")
        return self.ig.rate / (self.ig.shape - 1.0)

    @property
    def variance(self) -> float:
        a, b = self.ig.shape, self.ig.rate
        if a <= 2:
            raise ValueError(f"variance undefined for shape {a} <= 2")
        return b * b / ((a - 1.0) ** 2 * (a - 2.0))


@dataclass(frozen=True)
class ModifiedPosterior:
    """The tempered posterior shifted left by ``shift = jump_qv_hat / T``.

    The density at ``x`` equals the base density at ``x + shift``; support is
    ``(-shift, inf)``.  No renormalization to the positive axis is applied;
    :meth:`truncated_positive` returns the clipped, renormalized variant.
    """

    base: GibbsPosterior
    shift: float

    def __post_init__(self):
        if not (np.isfinite(self.shift) and self.shift >= 0):
            raise ConfigurationError(f"shift must be nonnegative, got {self.shift}")

    def pdf(self, x):
        if np.isscalar(x) or np.ndim(x) == 0:
            return self.base.pdf(float(x) + self.shift)
        return self.base.pdf(np.asarray(x, dtype=float) + self.shift)

    def cdf(self, x):
        if np.isscalar(x) or np.ndim(x) == 0:
            return self.base.cdf(float(x) + self.shift)
        return self.base.cdf(np.asarray(x, dtype=float) + self.shift)

    def ppf(self, q: float) -> float:
        return self.base.ppf(q) - self.shift

    @property
    def mean(self) -> float:
        return self.base.mean - self.shift

    @property
    def variance(self) -> float:
        return self.base.variance

    def mass_below_zero(self) -> float:
        """Posterior mass the shift pushed onto ``(-shift, 0]``."""
        return float(self.base.cdf(self.shift))

    def truncated_positive(self) -> "TruncatedPosterior":
        return TruncatedPosterior(self)


@dataclass(frozen=True)
class TruncatedPosterior:
    """A shifted posterior clipped to ``(0, inf)`` and renormalized."""

    source: ModifiedPosterior

    @property
    def _tail(self) -> float:
        return 1.0 - self.source.mass_below_zero()

    def pdf(self, x):
        if np.isscalar(x) or np.ndim(x) == 0:
            x = float(x)
            return self.source.pdf(x) / self._tail if x > 0.0 else 0.0
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, self.source.pdf(x) / self._tail, 0.0)

    def cdf(self, x):
        f0 = self.source.mass_below_zero()
        if np.isscalar(x) or np.ndim(x) == 0:
            x = float(x)
            if x <= 0.0:
                return 0.0
            return min(max((self.source.cdf(x) - f0) / self._tail, 0.0), 1.0)
        x = np.asarray(x, dtype=float)
        out = np.clip((self.source.cdf(x) - f0) / self._tail, 0.0, 1.0)
        return np.where(x > 0, out, 0.0)

    def ppf(self, q: float) -> float:
        f0 = self.source.mass_below_zero()
        return self.source.ppf(f0 + q * (1.0 - f0))


@dataclass(frozen=True)
class NormalApprox:
    """A normal law used as the large-sample stand-in for a posterior."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ConfigurationError(f"variance must be positive, got {self.variance}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        if np.isscalar(x) or np.ndim(x) == 0:
            z = (float(x) - self.mean) / self.sd
            arg = -0.5 * z * z
            if arg <= -745.0:
                return 0.0
            return math.exp(arg) / (self.sd * math.sqrt(2.0 * math.pi))
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))

    def cdf(self, x):
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(sc.ndtr((float(x) - self.mean) / self.sd))
        return sc.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def ppf(self, q: float) -> float:
        return self.mean + self.sd * float(sc.ndtri(q))


@dataclass(frozen=True)
class CredibleInterval:
    """Equal-tailed interval with the given posterior mass."""

    level: float
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ConfigurationError(f"level must lie in (0, 1), got {self.level}")
        if not self.lo <= self.hi:
            raise ConfigurationError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def mle_from_increments(increments, horizon: float) -> float:
    """``theta_hat = horizon^{-1} * sum D_i^2`` (drift ignored by design)."""
    d = np.asarray(increments, dtype=float)
    if d.size < 1:
        raise ConfigurationError("need at least one increment")
    if not (np.isfinite(horizon) and horizon > 0):
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    return float(np.sum(d * d)) / horizon


def compute_mle(path: SamplePath) -> float:
    """Maximum-likelihood volatility under the jump-blind normal model."""
    return mle_from_increments(path.increments, path.horizon)


def compute_kappa(theta_hat: float, qv: QvEstimate, horizon: float) -> float:
    """Temperature ``kappa = (1 - jump_qv_hat / (horizon * theta_hat))^2``.

    Because the flagged sum can never exceed the total sum of squares, kappa
    lies in [0, 1]; values below :data:`KAPPA_FLOOR` mean essentially all
    variation was attributed to jumps and raise a degenerate-inference error.
    """
    if not (np.isfinite(theta_hat) and theta_hat > 0):
        raise DegenerateDataError(f"theta_hat must be positive, got {theta_hat}")
    if not (np.isfinite(horizon) and horizon > 0):
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    kappa = (1.0 - qv.jump_qv_hat / (horizon * theta_hat)) ** 2
    if not kappa > KAPPA_FLOOR:
        raise DegenerateInferenceError(
            f"temperature {kappa:.3e} below floor {KAPPA_FLOOR:.0e}: "
            "essentially all variation was flagged as jumps"
        )
    return float(kappa)


def tempered_update(prior: InverseGammaParams, n: int, theta_hat: float, kappa: float) -> GibbsPosterior:
    """Conjugate update of an inverse-gamma prior by the tempered likelihood.

    ``shape' = a + n/(2 kappa)`` and ``rate' = b + n theta_hat/(2 kappa)``,
    which is exactly the normalization of ``L_n(theta)^{1/kappa} pi(theta)``.
    Any finite ``kappa`` above the floor is accepted (large values wash the
    likelihood out and return the prior in the limit).
    """
    if n < 1:
        raise ConfigurationError(f"need at least one observation, got n={n}")
    if not (np.isfinite(theta_hat) and theta_hat >= 0):
        raise ConfigurationError(f"theta_hat must be nonnegative, got {theta_hat}")
    if not np.isfinite(kappa) or kappa <= KAPPA_FLOOR:
        raise DegenerateInferenceError(
            f"temperature {kappa} out of range (must be finite and > {KAPPA_FLOOR:.0e})"
        )
    half = n / (2.0 * kappa)
    ig = InverseGammaParams(shape=prior.shape + half, rate=prior.rate + half * theta_hat)
    return GibbsPosterior(ig=ig, kappa=float(kappa), n=int(n), theta_hat=float(theta_hat))


def gibbs_update(prior: InverseGammaParams, path: SamplePath, kappa: float) -> GibbsPosterior:
    """Tempered conjugate update driven by a sample path."""
    return tempered_update(prior, n=path.n, theta_hat=compute_mle(path), kappa=kappa)


def modify_posterior(post: GibbsPosterior, qv: QvEstimate, horizon: float) -> ModifiedPosterior:
    """Shift the tempered posterior left by ``jump_qv_hat / horizon``."""
    if not (np.isfinite(horizon) and horizon > 0):
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    return ModifiedPosterior(base=post, shift=qv.jump_qv_hat / horizon)


def credible_interval(mod, level: float) -> CredibleInterval:
    """Equal-tailed credible interval from any object exposing ``ppf``."""
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"level must lie in (0, 1), got {level}")
    alpha = 1.0 - level
    return CredibleInterval(level=level, lo=mod.ppf(alpha / 2.0), hi=mod.ppf(1.0 - alpha / 2.0))


def bvm_normal(theta_hat: float, qv: QvEstimate, horizon: float, n: int) -> NormalApprox:
    """Plug-in normal approximation ``N(center, 2 * center^2 / n)`` with
    ``center = theta_hat - jump_qv_hat / horizon``.

    The limiting variance involves the unknown true volatility; the shifted
    center is its consistent estimate and is plugged in.
    """
    if n < 1:
        raise ConfigurationError(f"need at least one observation, got n={n}")
    center = theta_hat - qv.jump_qv_hat / horizon
    if not (np.isfinite(center) and center > 0):
        raise DegenerateInferenceError(f"nonpositive shifted center {center}")
    return NormalApprox(mean=center, variance=2.0 * center * center / n)
