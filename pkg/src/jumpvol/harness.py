"""Coverage experiment over a (jump rate, jump size, sample size) grid.

Each grid cell runs many independent replications of the full pipeline
(simulate, threshold, temper, shift, interval) and records how often the
interval covers the true volatility.  Replication seeds are derived from
``(base_seed, cell, rep)``, so results are bitwise reproducible and do not
depend on worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError, DegenerateInferenceError
from .posterior import (
    CredibleInterval,
    InverseGammaParams,
    compute_kappa,
    compute_mle,
    credible_interval,
    gibbs_update,
    modify_posterior,
)
from .seeds import derive_seed
from .simulate import DiffusionSpec, JumpSpec, simulate_path
from .threshold import ThresholdRule, estimate_jump_qv

COVERAGE_CSV_HEADER = "lambda,tau,n,reps,coverage,mean_width,mc_stderr,degenerate_count"

#: Replications per aggregation block.  Partial sums are formed per block and
#: combined in block order, so floating-point totals do not depend on how
#: blocks are scheduled across workers.
_BLOCK = 256


@dataclass(frozen=True)
class ReplicationResult:
    """Outcome of one replication; degenerate runs are flagged, not raised."""

    theta_hat: float
    jump_qv_hat: float
    kappa: float | None
    interval: CredibleInterval | None
    covered: bool | None
    width: float | None
    degenerate: bool
    degenerate_reason: str | None = None


def run_replication(
    diff: DiffusionSpec,
    jumps: JumpSpec,
    n: int,
    prior: InverseGammaParams,
    threshold: ThresholdRule,
    level: float,
    seed,
) -> ReplicationResult:
    """One full pass: simulate, detect jumps, build the corrected posterior,
    and check whether the interval covers the true volatility."""
    path = simulate_path(diff, jumps, n, seed=seed)
    eta = threshold.resolve(path.increments)
    qv = estimate_jump_qv(path.increments, eta)
    theta_hat = compute_mle(path)
    try:
        kappa = compute_kappa(theta_hat, qv, path.horizon)
        post = gibbs_update(prior, path, kappa)
        modified = modify_posterior(post, qv, path.horizon)
        interval = credible_interval(modified, level)
    except DegenerateInferenceError as err:
        return ReplicationResult(
            theta_hat=theta_hat,
            jump_qv_hat=qv.jump_qv_hat,
            kappa=None,
            interval=None,
            covered=None,
            width=None,
            degenerate=True,
            degenerate_reason=str(err),
        )
    return ReplicationResult(
        theta_hat=theta_hat,
        jump_qv_hat=qv.jump_qv_hat,
        kappa=kappa,
        interval=interval,
        covered=interval.contains(diff.theta_star),
        width=interval.width,
        degenerate=False,
    )


@dataclass(frozen=True)
class CoverageConfig:
    """Grid and per-replication settings of the coverage experiment."""

    diffusion: DiffusionSpec
    lambda_grid: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0)
    tau_grid: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    n_grid: tuple[int, ...] = (5000,)
    reps: int = 1000
    level: float = 0.95
    threshold: ThresholdRule = ThresholdRule.iqr()
    prior: InverseGammaParams = InverseGammaParams(1.0, 1.0)
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "tau_grid", tuple(float(v) for v in self.tau_grid))
        object.__setattr__(self, "n_grid", tuple(int(v) for v in self.n_grid))
        if not (self.lambda_grid and self.tau_grid and self.n_grid):
            raise ConfigurationError("all grids must be nonempty")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.level < 1.0:
            raise ConfigurationError(f"level must lie in (0, 1), got {self.level}")

    def cells(self) -> list[tuple[float, float, int]]:
        """Grid cells in their deterministic enumeration order."""
        return [
            (lam, tau, n)
            for lam in self.lambda_grid
            for tau in self.tau_grid
            for n in self.n_grid
        ]


@dataclass(frozen=True)
class CoverageRow:
    """Aggregated outcome of one grid cell.

    ``reps`` is the requested replication count; coverage, mean width, and
    the binomial ``mc_stderr = sqrt(p(1-p)/m)`` are computed over the
    ``m = reps - degenerate_count`` non-degenerate replications.
    """

    lam: float
    tau: float
    n: int
    reps: int
    coverage: float
    mean_width: float
    mc_stderr: float
    degenerate_count: int


def _coverage_block(args) -> tuple[int, int, int, float, int]:
    config, cell_index, start, stop = args
    lam, tau, n = config.cells()[cell_index]
    jumps = JumpSpec.two_point(lam, tau)
    covered = 0
    width_sum = 0.0
    degenerate = 0
    for rep in range(start, stop):
        seed = derive_seed(config.base_seed, cell_index, rep)
        result = run_replication(
            config.diffusion, jumps, n, config.prior, config.threshold, config.level, seed
        )
        if result.degenerate:
            degenerate += 1
        else:
            covered += int(result.covered)
            width_sum += result.width
    return cell_index, start, covered, width_sum, degenerate


def run_coverage(config: CoverageConfig, workers: int = 1) -> list[CoverageRow]:
    """Run every grid cell and aggregate one row per cell.

    ``workers`` only controls parallel execution of fixed-size replication
    blocks; the output is identical for any worker count.
    """
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    cells = config.cells()
    tasks = [
        (config, cell_index, start, min(start + _BLOCK, config.reps))
        for cell_index in range(len(cells))
        for start in range(0, config.reps, _BLOCK)
    ]
    if workers == 1:
        outputs = [_coverage_block(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_coverage_block, tasks, chunksize=1))
    outputs.sort(key=lambda item: (item[0], item[1]))
    rows = []
    for cell_index, (lam, tau, n) in enumerate(cells):
        covered = 0
        width_sum = 0.0
        degenerate = 0
        for idx, _, block_covered, block_width, block_degenerate in outputs:
            if idx == cell_index:
                covered += block_covered
                width_sum += block_width
                degenerate += block_degenerate
        effective = config.reps - degenerate
        if effective > 0:
            coverage = covered / effective
            mean_width = width_sum / effective
            stderr = math.sqrt(coverage * (1.0 - coverage) / effective)
        else:
            coverage = mean_width = stderr = math.nan
        rows.append(
            CoverageRow(
                lam=lam,
                tau=tau,
                n=n,
                reps=config.reps,
                coverage=coverage,
                mean_width=mean_width,
                mc_stderr=stderr,
                degenerate_count=degenerate,
            )
        )
    return rows


def write_coverage_csv(file, rows: list[CoverageRow]) -> None:
    """Write coverage rows with the fixed column order."""
    own = isinstance(file, (str, Path))
    handle = open(file, "w", newline="") if own else file
    try:
        handle.write(COVERAGE_CSV_HEADER + "\n")
        for row in rows:
            handle.write(
                f"{row.lam!r},{row.tau!r},{row.n},{row.reps},{row.coverage!r},"
                f"{row.mean_width!r},{row.mc_stderr!r},{row.degenerate_count}\n"
            )
    finally:
        if own:
            handle.close()
