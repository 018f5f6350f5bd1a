"""Sample paths of the RCAR(p) recursion.

Paths start from the zero state and run ``burn_in`` steps before recording,
as a stand-in for a draw from the stationary law.  Each noise source has its
own counter-based stream (see :mod:`rcar.rng`), so a longer path always
extends a shorter one with the same key.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import ExplosionError
from .model import ModelParams
from .rng import EPS_SOURCE, eta_source, generator

DEFAULT_BURN_IN = 1000
EXPLOSION_LEVEL = 1e150


@njit(cache=True, nogil=True)
def _recursion(theta, alpha, eta, eps, level):
    # x[:p] is the zero initial state; x[p + t] is the value at step t.
    steps = eps.shape[0]
    p = theta.shape[0]
    x = np.zeros(p + steps)
    for t in range(steps):
        s = eps[t]
        for k in range(p):
            prev = eta[t - 1, k] if t > 0 else 0.0
            s += (theta[k] + alpha[k] * prev + eta[t, k]) * x[p + t - 1 - k]
        if not abs(s) <= level:
            return x, t
        x[p + t] = s
    return x, -1


@dataclass(frozen=True)
class Trajectory:
    """Recorded values ``X_{-p+1}, ..., X_n`` plus the key that produced them."""

    values: np.ndarray
    n: int
    p: int
    seed: int
    burn_in: int
    eta_final: np.ndarray
    stream: int = 0

    @property
    def times(self):
        return np.arange(-self.p + 1, self.n + 1)

    def prefix(self, n):
        if not 1 <= n <= self.n:
            raise ValueError(f"prefix length must be in [1, {self.n}], got {n}")
        return Trajectory(self.values[: n + self.p].copy(), n, self.p, self.seed, self.burn_in, self.eta_final, self.stream)

    def to_csv(self, path=None):
        """Write ``t,x`` rows; returns the text when ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x"])
        for t, x in zip(self.times.tolist(), self.values.tolist()):
            w.writerow([t, repr(x)])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path


def read_csv(path_or_text, p=None):
    """Load the ``t,x`` export back into an array ordered by ``t``.

    When ``p`` is given the first time index must be ``-p + 1``.
    """
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, encoding="utf-8", newline="")
    with fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "x"]:
        raise ValueError("trajectory CSV must start with the header 't,x'")
    t = np.array([int(r[0]) for r in rows[1:]], dtype=np.int64)
    x = np.array([float(r[1]) for r in rows[1:]])
    if t.size == 0:
        raise ValueError("trajectory CSV has no rows")
    if np.any(np.diff(t) != 1):
        raise ValueError("time index must increase by one on every row")
    if p is not None and t[0] != -p + 1:
        raise ValueError(f"first time index is {t[0]}, expected {-p + 1} for p={p}")
    return x


def draw_noises(params: ModelParams, steps, seed, stream=0):
    """Coefficient noises (steps, p) and innovations (steps,) for one path."""
    eta = np.zeros((steps, params.p))
    for k, spec in enumerate(params.eta):
        if spec.scale > 0:
            eta[:, k] = spec.sample(generator(seed, stream, eta_source(k)), steps)
    eps = np.zeros(steps)
    if params.eps.scale > 0:
        eps = params.eps.sample(generator(seed, stream, EPS_SOURCE), steps)
    return eta, eps


def simulate(params: ModelParams, n, burn_in=DEFAULT_BURN_IN, seed=0, stream=0) -> Trajectory:
    """Simulate ``n + p`` recorded values after ``burn_in`` discarded steps.

    Raises
    ------
    ExplosionError
        If ``|X_t|`` exceeds 1e150 (or turns non-finite); ``step`` is the
        0-based step counted from the zero state, burn-in included.
    """
    n = int(n)
    burn_in = int(burn_in)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    p = params.p
    steps = burn_in + n + p
    eta, eps = draw_noises(params, steps, seed, stream)
    x, bad = _recursion(params.theta_vec, params.alpha_vec, eta, eps, EXPLOSION_LEVEL)
    if bad >= 0:
        raise ExplosionError(
            f"path exploded at step {bad} (burn-in {burn_in}); the parameters are not stationary",
            step=int(bad),
        )
    eta_final = eta[burn_in - 1].copy() if burn_in > 0 else np.zeros(p)
    return Trajectory(x[p + burn_in :].copy(), n, p, int(seed), burn_in, eta_final, int(stream))


def stream_increasing(params: ModelParams, checkpoints, seed=0, burn_in=DEFAULT_BURN_IN, stream=0):
    """Yield the same path truncated at each checkpoint, shortest first."""
    cps = [int(c) for c in checkpoints]
    if not cps:
        return
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    full = simulate(params, cps[-1], burn_in=burn_in, seed=seed, stream=stream)
    for c in cps[:-1]:
        yield full.prefix(c)
    yield full
