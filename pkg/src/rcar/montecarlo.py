"""Replication engine for the significance experiments and rate checks.

Replication ``r`` always uses stream ``r`` of ``root_seed``, and results are
written back by replication index, so reports do not depend on how many
worker threads ran them.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .estimator import estimate
from .exceptions import ExplosionError
from .model import ModelParams
from .moments import solve_moments
from .simulate import DEFAULT_BURN_IN, simulate

RECENTER_CHOICES = ("none", "theta_star")


def default_threads():
    try:
        return max(1, int(os.environ.get("RCAR_THREADS", "1")))
    except ValueError:
        return 1


def ks_statistic(sample) -> float:
    """Kolmogorov-Smirnov distance between the sample's ECDF and N(0, 1)."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    m = x.size
    if m == 0:
        raise ValueError("sample must be non-empty")
    cdf = ndtr(x)
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def critical_value(level):
    """Two-sided standard normal critical value."""
    if not 0 < level < 1:
        raise ValueError(f"nominal level must be in (0, 1), got {level}")
    return float(ndtri(1.0 - level / 2.0))


@dataclass(frozen=True)
class MCConfig:
    params: ModelParams
    n: int = 500
    reps: int = 10_000
    root_seed: int = 0
    nominal_level: float = 0.05
    recenter: str = "none"
    burn_in: int = DEFAULT_BURN_IN
    component: int | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.n <= self.params.p + 1:
            raise ValueError(f"n must exceed p + 1, got n={self.n}")
        if not 0 < self.nominal_level < 1:
            raise ValueError(f"nominal_level must be in (0, 1), got {self.nominal_level}")
        if self.recenter not in RECENTER_CHOICES:
            raise ValueError(f"recenter must be one of {RECENTER_CHOICES}, got {self.recenter!r}")

    @property
    def tested_component(self):
        # theta_2 is the coefficient under test whenever it exists
        if self.component is not None:
            return self.component
        return 1 if self.params.p >= 2 else 0

    def with_alpha1(self, alpha1):
        alpha = (float(alpha1),) + self.params.alpha[1:]
        return MCConfig(
            params=self.params.replace(alpha=alpha),
            n=self.n,
            reps=self.reps,
            root_seed=self.root_seed,
            nominal_level=self.nominal_level,
            recenter=self.recenter,
            burn_in=self.burn_in,
            component=self.component,
        )


@dataclass
class MCReport:
    z1_sample: np.ndarray
    z2_sample: np.ndarray
    reject1: float
    reject2: float
    ks1: float
    ks2: float
    theta_hat_mean: np.ndarray
    theta_hat_cov: np.ndarray
    runtime_seconds: float
    theta_hat_sample: np.ndarray = field(repr=False)
    center: np.ndarray | None = None

    def scaled_covariance(self, n):
        """``n`` times the replication covariance of ``theta_hat``."""
        return n * self.theta_hat_cov

    def to_csv(self, path=None):
        lines = ["rep,z1,z2"]
        for r, (a, b) in enumerate(zip(self.z1_sample.tolist(), self.z2_sample.tolist())):
            lines.append(f"{r},{a!r},{b!r}")
        text = "\n".join(lines) + "\n"
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path


def _run_block(config, reps, center, comp):
    p = config.params.p
    thetas = np.empty((len(reps), p))
    z1 = np.empty(len(reps))
    z2 = np.empty(len(reps))
    for i, r in enumerate(reps):
        try:
            traj = simulate(config.params, config.n, burn_in=config.burn_in, seed=config.root_seed, stream=r)
        except ExplosionError as exc:
            raise ExplosionError(f"replication {r}: {exc}", step=exc.step, replication=r) from None
        res = estimate(traj, p, center=center)
        thetas[i] = res.theta_hat
        z1[i] = res.z1[comp]
        z2[i] = res.z2[comp]
    return thetas, z1, z2


def _chunks(reps, workers):
    size = max(1, min(1000, -(-reps // max(1, workers))))
    return [range(s, min(reps, s + size)) for s in range(0, reps, size)]


def run_distribution(config: MCConfig, threads=None) -> MCReport:
    """Simulate, fit and test ``config.reps`` independent paths."""
    start = time.perf_counter()
    threads = default_threads() if threads is None else max(1, int(threads))
    center = solve_moments(config.params).theta_star if config.recenter == "theta_star" else None
    comp = config.tested_component
    blocks = _chunks(config.reps, threads)
    if threads == 1:
        parts = [_run_block(config, b, center, comp) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _run_block(config, b, center, comp), blocks))
    thetas = np.concatenate([t for t, _, _ in parts])
    z1 = np.concatenate([a for _, a, _ in parts])
    z2 = np.concatenate([b for _, _, b in parts])
    crit = critical_value(config.nominal_level)
    cov = np.cov(thetas, rowvar=False) if config.reps > 1 else np.zeros((thetas.shape[1],) * 2)
    return MCReport(
        z1_sample=z1,
        z2_sample=z2,
        reject1=float(np.mean(np.abs(z1) > crit)),
        reject2=float(np.mean(np.abs(z2) > crit)),
        ks1=ks_statistic(z1),
        ks2=ks_statistic(z2),
        theta_hat_mean=thetas.mean(axis=0),
        theta_hat_cov=np.atleast_2d(cov),
        runtime_seconds=time.perf_counter() - start,
        theta_hat_sample=thetas,
        center=center,
    )


def recentered_ks(report: MCReport, n, center=None):
    """Per-coefficient KS distance of ``sqrt(n)(theta_hat - center)`` scaled by its sd."""
    center = report.center if center is None else np.asarray(center)
    if center is None:
        raise ValueError("no centering vector available")
    dev = np.sqrt(n) * (report.theta_hat_sample - center)
    sd = dev.std(axis=0, ddof=1)
    return np.array([ks_statistic(dev[:, j] / sd[j]) for j in range(dev.shape[1])])


def restandardized_ks(sample):
    """KS distance of a sample scaled by its empirical standard deviation."""
    s = np.asarray(sample, dtype=float)
    return ks_statistic(s / s.std(ddof=1))


@dataclass(frozen=True)
class RejectionPoint:
    alpha1: float
    reject1: float
    reject2: float


def run_rejection_grid(config: MCConfig, alpha1_grid, threads=None):
    """Rejection rates of both statistics along a grid of ``alpha_1`` values.

    Every grid point reuses ``config.root_seed``, so the curves are computed
    with common random numbers.
    """
    out = []
    for a1 in alpha1_grid:
        rep = run_distribution(config.with_alpha1(a1), threads=threads)
        out.append(RejectionPoint(float(a1), rep.reject1, rep.reject2))
    return out


def rejection_csv(points, path=None):
    lines = ["alpha1,reject1,reject2"] + [f"{pt.alpha1!r},{pt.reject1!r},{pt.reject2!r}" for pt in points]
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def geometric_checkpoints(lo=1_000, hi=1_000_000, per_decade=20):
    if lo < 16:
        raise ValueError("checkpoints must be >= 16 so that ln ln n > 0")
    count = int(round(per_decade * math.log10(hi / lo))) + 1
    pts = np.unique(np.round(np.geomspace(lo, hi, count)).astype(np.int64))
    return pts.tolist()


def decade_windows(checkpoints):
    """Masks of the last decade and of the decade centred on the geometric middle."""
    c = np.asarray(checkpoints, dtype=float)
    lo, hi = c[0], c[-1]
    mid = math.sqrt(lo * hi)
    last = c >= hi / 10.0
    middle = (c >= mid / math.sqrt(10.0)) & (c <= mid * math.sqrt(10.0))
    return last, middle


@dataclass(frozen=True)
class LILPath:
    seed: int
    checkpoints: np.ndarray
    functional: np.ndarray

    @property
    def running_max(self):
        return np.maximum.accumulate(self.functional)

    @property
    def decade_ratio(self):
        last, middle = decade_windows(self.checkpoints)
        return float(self.functional[last].max() / self.functional[middle].max())


def prefix_ols(x, p, checkpoints):
    """OLS estimates on every prefix ``X_{-p+1..m}`` for m in ``checkpoints``.

    Uses running sums of the normal-equation terms, so one pass covers all
    checkpoints.
    """
    x = np.asarray(x, dtype=float)
    n = x.size - p
    phi = np.column_stack([x[p - 1 - k : p - 1 - k + n] for k in range(p)])
    y = x[p:]
    idx = np.asarray(checkpoints, dtype=np.int64) - 1
    gram = np.cumsum(phi[:, :, None] * phi[:, None, :], axis=0)[idx]
    cross = np.cumsum(phi * y[:, None], axis=0)[idx]
    return np.linalg.solve(gram, cross[:, :, None])[:, :, 0]


def run_lil(params: ModelParams, checkpoints, seeds, center=None, burn_in=DEFAULT_BURN_IN):
    """Iterated-logarithm functional ``n / (2 ln ln n) ||theta_hat_n - center||^2``.

    ``center`` defaults to ``theta_star``; one path per seed is streamed to
    the largest checkpoint.
    """
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.min() < 16:
        raise ValueError("checkpoints must be >= 16")
    if np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    center = solve_moments(params).theta_star if center is None else np.asarray(center, dtype=float)
    scale = cps / (2.0 * np.log(np.log(cps)))
    out = []
    for seed in seeds:
        traj = simulate(params, int(cps[-1]), burn_in=burn_in, seed=int(seed))
        est = prefix_ols(traj.values, params.p, cps)
        out.append(LILPath(int(seed), cps, scale * np.sum((est - center) ** 2, axis=1)))
    return out


def lil_csv(paths, path=None):
    lines = ["seed,n,functional"]
    for lp in paths:
        lines += [f"{lp.seed},{c},{v!r}" for c, v in zip(lp.checkpoints.tolist(), lp.functional.tolist())]
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
