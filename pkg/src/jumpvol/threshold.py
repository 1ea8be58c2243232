"""Jump detection by magnitude thresholding.

Windows whose absolute increment exceeds a threshold ``eta`` are attributed
to jumps; the squared flagged increments estimate the jump part's quadratic
variation.  The default rule sets ``eta`` to a multiple (5 by default) of the
interquartile range of the absolute increments, a simple outlier cutoff that
works because almost all increments come from the diffusion part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .seeds import derive_seed
from .simulate import DiffusionSpec, JumpSpec, simulate_path

DEFAULT_IQR_MULTIPLIER = 5.0


def interquartile_threshold(increments, multiplier: float = DEFAULT_IQR_MULTIPLIER) -> float:
    """Threshold ``eta = multiplier * IQR(|D_1|, ..., |D_n|)``.

    Quartiles use linear interpolation on the order statistics at positions
    ``1 + (n - 1) * p`` (numpy's default convention).  A zero IQR means the
    magnitudes carry no spread to threshold on; the sentinel ``+inf`` is
    returned and nothing gets flagged.
    """
    d = np.asarray(increments, dtype=float)
    if d.size < 4:
        raise InsufficientDataError(f"need at least 4 increments for the IQR rule, got {d.size}")
    if not (np.isfinite(multiplier) and multiplier > 0):
        raise ConfigurationError(f"IQR multiplier must be positive, got {multiplier}")
    q1, q3 = np.quantile(np.abs(d), [0.25, 0.75])
    spread = float(q3 - q1)
    if spread == 0.0:
        return math.inf
    return multiplier * spread


@dataclass(frozen=True)
class ThresholdRule:
    """Either a fixed threshold or the IQR rule with a given multiplier."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "fixed":
            if math.isnan(self.value) or self.value <= 0:
                raise ConfigurationError(f"fixed threshold must be positive, got {self.value}")
        elif self.kind == "iqr":
            if not (np.isfinite(self.value) and self.value > 0):
                raise ConfigurationError(f"IQR multiplier must be positive, got {self.value}")
        else:
            raise ConfigurationError(f"unknown threshold kind {self.kind!r}")

    @classmethod
    def fixed(cls, eta: float) -> "ThresholdRule":
        return cls(kind="fixed", value=float(eta))

    @classmethod
    def iqr(cls, multiplier: float = DEFAULT_IQR_MULTIPLIER) -> "ThresholdRule":
        return cls(kind="iqr", value=float(multiplier))

    @classmethod
    def parse(cls, text: str) -> "ThresholdRule":
        """Parse CLI syntax: ``iqr``, ``iqr:5``, ``fixed:0.5``, ``fixed:inf``."""
        kind, sep, raw = text.partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "iqr":
                value = float(raw) if sep else DEFAULT_IQR_MULTIPLIER
            elif kind == "fixed":
                if not sep:
                    raise ConfigurationError("fixed threshold needs a value, e.g. fixed:0.5")
                value = float(raw)
            else:
                raise ConfigurationError(f"unknown threshold rule {text!r}")
        except ValueError as err:
            raise ConfigurationError(f"cannot parse threshold value in {text!r}") from err
        return cls(kind=kind, value=value)

    def resolve(self, increments) -> float:
        """Realized threshold for these increments."""
        if self.kind == "fixed":
            return self.value
        return interquartile_threshold(increments, self.value)


@dataclass(frozen=True)
class QvEstimate:
    """Thresholded estimate of the jump quadratic variation.

    ``flagged`` lists the 1-based indices with ``|D_i| > eta`` (strict), and
    ``jump_qv_hat`` is the sum of their squared increments.
    """

    eta: float
    jump_qv_hat: float
    flagged: tuple[int, ...]

    def as_dict(self) -> dict:
        return {"eta": self.eta, "jump_qv_hat": self.jump_qv_hat, "flagged": list(self.flagged)}


def estimate_jump_qv(increments, eta: float) -> QvEstimate:
    """Sum of squared increments over the windows with ``|D_i| > eta``."""
    d = np.asarray(increments, dtype=float)
    if math.isnan(eta) or eta <= 0:
        raise ConfigurationError(f"threshold must be positive (or +inf), got {eta}")
    mask = np.abs(d) > eta
    flagged = tuple(int(i) for i in np.flatnonzero(mask) + 1)
    hat = float(np.sum(d[mask] ** 2))
    return QvEstimate(eta=float(eta), jump_qv_hat=hat, flagged=flagged)


@dataclass(frozen=True)
class QvRateResult:
    """Mean absolute estimation error by sample size, with the fitted slope
    of log MAE against log n."""

    n_grid: tuple[int, ...]
    mae: tuple[float, ...]
    mae_stderr: tuple[float, ...]
    slope: float


def qv_error_rate(
    diff: DiffusionSpec,
    jumps: JumpSpec,
    n_grid,
    reps: int,
    seed: int,
    threshold: ThresholdRule | None = None,
) -> QvRateResult:
    """Monte Carlo error-rate regression for the thresholded estimator.

    For each sample size the mean absolute error ``E|hat - true|`` against
    the simulator's truth is estimated over ``reps`` replications, and the
    least-squares slope of log MAE on log n is returned.  If any MAE is zero
    (e.g. no jumps at all) the slope is NaN.
    """
    grid = sorted({int(n) for n in n_grid})
    if len(grid) < 3:
        raise ConfigurationError("n_grid needs at least 3 distinct sample sizes")
    if grid[-1] < 10 * grid[0]:
        raise ConfigurationError("n_grid must span at least one decade")
    if reps < 200:
        raise ConfigurationError(f"need at least 200 replications, got {reps}")
    rule = threshold if threshold is not None else ThresholdRule.iqr()
    mae = []
    stderr = []
    for cell, n in enumerate(grid):
        errors = np.empty(reps)
        for rep in range(reps):
            path = simulate_path(diff, jumps, n, seed=derive_seed(seed, cell, rep))
            eta = rule.resolve(path.increments)
            estimate = estimate_jump_qv(path.increments, eta)
            errors[rep] = abs(estimate.jump_qv_hat - path.truth.jump_qv)
        mae.append(float(errors.mean()))
        stderr.append(float(errors.std(ddof=1) / math.sqrt(reps)))
    if min(mae) <= 0.0:
        slope = math.nan
    else:
        slope = float(np.polyfit(np.log(grid), np.log(mae), 1)[0])
    return QvRateResult(
        n_grid=tuple(grid), mae=tuple(mae), mae_stderr=tuple(stderr), slope=slope
    )
