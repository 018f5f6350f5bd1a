"""Parameter space of the RCAR(p) model with MA(1) coefficient noise.

The process is

    X_t = sum_k (theta_k + alpha_k * eta_{k,t-1} + eta_{k,t}) X_{t-k} + eps_t

with independent symmetric noises.  This module holds the parameter types,
their JSON form, and the admissibility checks run before simulating or
solving the moment system.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .exceptions import ConfigError, RCARError
from .rng import eta_source, generator

FAMILIES = ("gaussian", "uniform", "rademacher")

FLAG_NAMES = (
    "two_beta1_eq_one",
    "alpha1_beta1_eq_one",
    "det_IK_zero",
    "s0_eq_one",
    "schur_zero",
    "lambda0_singular",
)

# Relative tolerance used to decide that a parameter point hits a
# pathological equality; such points only occur by construction.
PATHOLOGY_RTOL = 1e-10


def _even_moment(family, scale, order):
    s = scale**order
    if family == "gaussian":
        # (order - 1)!! for the standard normal
        return s * math.prod(range(order - 1, 0, -2))
    if family == "uniform":
        return s / (order + 1)
    return s


@dataclass(frozen=True)
class NoiseSpec:
    """Centered symmetric noise distribution.

    ``scale`` is the standard deviation for ``gaussian``, the half-width for
    ``uniform`` and the magnitude of the two atoms for ``rademacher``.  All
    odd moments vanish by symmetry.
    """

    family: str = "gaussian"
    scale: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(
                f"unknown noise family {self.family!r}; expected one of {FAMILIES}",
                field="family",
            )
        scale = float(self.scale)
        if not math.isfinite(scale) or scale < 0:
            raise ConfigError(f"noise scale must be finite and >= 0, got {self.scale!r}", field="scale")
        object.__setattr__(self, "scale", scale)
        m2, m4, m8 = self.m2, self.m4, self.m8
        # Cauchy-Schwarz sanity; holds for every supported family.
        tol = 1e-12 * max(m4, m8, 1.0)
        if m4 < m2 * m2 - tol or m8 < m4 * m4 - tol:
            raise ConfigError("inconsistent noise moments", field="scale")

    @classmethod
    def from_variance(cls, family, variance):
        if variance < 0:
            raise ConfigError(f"variance must be >= 0, got {variance}", field="variance")
        unit = _even_moment(family, 1.0, 2) if family in FAMILIES else 1.0
        return cls(family, math.sqrt(variance / unit))

    def moment(self, order):
        if order % 2:
            return 0.0
        return _even_moment(self.family, self.scale, order)

    @property
    def m2(self):
        return self.moment(2)

    @property
    def m4(self):
        return self.moment(4)

    @property
    def m6(self):
        return self.moment(6)

    @property
    def m8(self):
        return self.moment(8)

    @property
    def variance(self):
        return self.m2

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "gaussian":
            return self.scale * rng.standard_normal(size)
        if self.family == "uniform":
            return self.scale * (2.0 * rng.random(size) - 1.0)
        return self.scale * (2.0 * rng.integers(0, 2, size=size) - 1.0)

    def to_dict(self):
        return {"family": self.family, "scale": self.scale}

    @classmethod
    def from_dict(cls, doc, where="noise"):
        if not isinstance(doc, dict):
            raise ConfigError(f"{where} must be an object", field=where)
        family = doc.get("family", "gaussian")
        if "scale" in doc and "variance" in doc:
            raise ConfigError(f"{where}: give either scale or variance, not both", field=where)
        try:
            if "variance" in doc:
                return cls.from_variance(family, float(doc["variance"]))
            return cls(family, float(doc.get("scale", 0.0)))
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}", field=f"{where}.{exc.field}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}", field=where) from None


@dataclass(frozen=True)
class ModelParams:
    """A full parameter point: mean coefficients, MA(1) weights and noises."""

    theta: tuple
    alpha: tuple
    eta: tuple
    eps: NoiseSpec = field(default_factory=lambda: NoiseSpec("gaussian", 1.0))

    def __post_init__(self):
        theta = tuple(float(v) for v in np.ravel(self.theta))
        alpha = tuple(float(v) for v in np.ravel(self.alpha))
        eta = tuple(self.eta) if not isinstance(self.eta, NoiseSpec) else (self.eta,)
        if len(theta) < 1:
            raise ConfigError("order p must be >= 1", field="theta")
        if len(alpha) != len(theta):
            raise ConfigError(f"alpha has length {len(alpha)}, expected p={len(theta)}", field="alpha")
        if len(eta) != len(theta):
            raise ConfigError(f"eta has length {len(eta)}, expected p={len(theta)}", field="eta")
        for name, vec in (("theta", theta), ("alpha", alpha)):
            if not all(math.isfinite(v) for v in vec):
                raise ConfigError(f"{name} must be finite", field=name)
        for spec in eta + (self.eps,):
            if not isinstance(spec, NoiseSpec):
                raise ConfigError("noises must be NoiseSpec instances", field="eta")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def gaussian(cls, theta, alpha, eta_var, eps_var=1.0):
        """Shortcut for the all-Gaussian case used throughout the experiments."""
        eta_var = np.broadcast_to(np.asarray(eta_var, dtype=float), (len(np.ravel(theta)),))
        return cls(
            theta=theta,
            alpha=alpha,
            eta=tuple(NoiseSpec.from_variance("gaussian", v) for v in eta_var),
            eps=NoiseSpec.from_variance("gaussian", eps_var),
        )

    @property
    def p(self) -> int:
        return len(self.theta)

    @property
    def theta_vec(self):
        return np.array(self.theta)

    @property
    def alpha_vec(self):
        return np.array(self.alpha)

    @property
    def tau2(self):
        return np.array([e.m2 for e in self.eta])

    @property
    def tau4(self):
        return np.array([e.m4 for e in self.eta])

    @property
    def sigma2(self):
        return self.eps.m2

    @property
    def beta1(self):
        return self.alpha[0] * self.eta[0].m2

    @property
    def beta2(self):
        return float(sum(a * e.m2 for a, e in zip(self.alpha[1:], self.eta[1:])))

    def companion(self):
        return companion_matrix(self.theta)

    def padded(self, order):
        """Same process written with ``order`` lags (extra lags are inert)."""
        if order < self.p:
            raise ValueError(f"cannot pad order {self.p} down to {order}")
        extra = order - self.p
        return ModelParams(
            theta=self.theta + (0.0,) * extra,
            alpha=self.alpha + (0.0,) * extra,
            eta=self.eta + (NoiseSpec("gaussian", 0.0),) * extra,
            eps=self.eps,
        )

    def replace(self, **changes):
        doc = {"theta": self.theta, "alpha": self.alpha, "eta": self.eta, "eps": self.eps}
        doc.update(changes)
        return ModelParams(**doc)

    def to_dict(self):
        return {
            "p": self.p,
            "theta": list(self.theta),
            "alpha": list(self.alpha),
            "eta": [e.to_dict() for e in self.eta],
            "eps": self.eps.to_dict(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object", field="<root>")
        for key in ("theta", "alpha", "eta"):
            if key not in doc:
                raise ConfigError(f"missing required field {key!r}", field=key)
        unknown = set(doc) - {"p", "theta", "alpha", "eta", "eps"}
        if unknown:
            raise ConfigError(f"unknown field(s) {sorted(unknown)}", field=sorted(unknown)[0])
        try:
            theta = [float(v) for v in doc["theta"]]
        except (TypeError, ValueError):
            raise ConfigError("theta must be a list of numbers", field="theta") from None
        try:
            alpha = [float(v) for v in doc["alpha"]]
        except (TypeError, ValueError):
            raise ConfigError("alpha must be a list of numbers", field="alpha") from None
        if not isinstance(doc["eta"], list):
            raise ConfigError("eta must be a list of noise objects", field="eta")
        eta = tuple(NoiseSpec.from_dict(e, where=f"eta[{i}]") for i, e in enumerate(doc["eta"]))
        eps = NoiseSpec.from_dict(doc.get("eps", {"family": "gaussian", "scale": 1.0}), where="eps")
        if "p" in doc:
            p = doc["p"]
            if not isinstance(p, int) or isinstance(p, bool) or p < 1:
                raise ConfigError(f"p must be an integer >= 1, got {p!r}", field="p")
            if p != len(theta):
                raise ConfigError(f"p={p} but theta has length {len(theta)}", field="p")
        return cls(theta=tuple(theta), alpha=tuple(alpha), eta=eta, eps=eps)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", field="<root>") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def companion_matrix(theta):
    theta = np.ravel(np.asarray(theta, dtype=float))
    p = theta.size
    c = np.zeros((p, p))
    c[0] = theta
    if p > 1:
        c[1:, :-1] = np.eye(p - 1)
    return c


@dataclass(frozen=True)
class Admissibility:
    log_norm_estimate: float
    log_norm_ci: tuple
    rho_A2: float = math.nan
    theta_star_flags: frozenset = frozenset()
    draws: int = 0
    norm: str = "2-norm"

    @property
    def log_condition_holds(self):
        return self.log_norm_ci[1] < 0

    @property
    def second_order(self):
        return self.rho_A2 < 1 and not self.theta_star_flags

    @property
    def admissible(self):
        return self.log_condition_holds and self.second_order

    def to_dict(self):
        return {
            "log_norm_estimate": _json_float(self.log_norm_estimate),
            "log_norm_ci": [_json_float(v) for v in self.log_norm_ci],
            "log_norm": self.norm,
            "rho_A2": _json_float(self.rho_A2),
            "flags": sorted(self.theta_star_flags),
        }


def _json_float(v):
    if math.isfinite(v):
        return v
    return None if math.isnan(v) else ("-inf" if v < 0 else "inf")


def random_transition_matrices(params: ModelParams, draws, seed):
    """Draws of C_theta + N_0 D_alpha + N_1, shape (draws, p, p)."""
    p = params.p
    mats = np.broadcast_to(params.companion(), (draws, p, p)).copy()
    for k, spec in enumerate(params.eta):
        # two independent rows of the same source: eta_{k,0} and eta_{k,1}
        g = generator(seed, stream=0, source=eta_source(k))
        eta = spec.sample(g, (2, draws))
        mats[:, 0, k] += params.alpha[k] * eta[0] + eta[1]
    return mats


def norm_weight(params: ModelParams):
    """Factor ``R`` of the induced norm ``||M||_R = ||R M R^{-1}||_2``.

    ``R^T R`` solves the discrete Lyapunov equation of the mean companion
    matrix, normalised to a unit (1, 1) entry, so ``||C_theta||_R < 1``
    whenever the mean AR part is stable.  A plain 2-norm of a companion
    matrix with p >= 2 is never below one, which makes the log condition
    vacuous.  Returns ``(None, "2-norm")`` when no such weight exists.
    """
    c = params.companion()
    if params.p == 1:
        return None, "2-norm"
    if np.max(np.abs(np.linalg.eigvals(c))) >= 1:
        return None, "2-norm"
    w = solve_discrete_lyapunov(c.T, np.eye(params.p))
    w = 0.5 * (w + w.T) / w[0, 0]
    try:
        chol = np.linalg.cholesky(w)
    except np.linalg.LinAlgError:
        return None, "2-norm"
    return chol.T, "lyapunov-weighted 2-norm"


def check_log_condition(params: ModelParams, draws=100_000, seed=0) -> Admissibility:
    """Monte Carlo estimate of E ln||C_theta + N_0 D_alpha + N_1||.

    The norm is the operator norm induced by :func:`norm_weight`.  Returns an
    :class:`Admissibility` holding only the log part.  The estimate is
    ``-inf`` when the random matrix vanishes with positive probability (for
    instance when it is identically zero).
    """
    if draws < 1000:
        raise ValueError(f"draws must be >= 1000, got {draws}")
    mats = random_transition_matrices(params, draws, seed)
    r, norm_name = norm_weight(params)
    if r is not None:
        mats = r @ mats @ np.linalg.inv(r)
    norms = np.linalg.norm(mats, ord=2, axis=(1, 2))
    if not np.all(np.isfinite(norms)):
        raise RCARError("non-finite norm sample; check the noise specification")
    with np.errstate(divide="ignore"):
        logs = np.log(norms)
    if np.isneginf(logs).any():
        return Admissibility(-math.inf, (-math.inf, -math.inf), draws=draws, norm=norm_name)
    if logs.min() == logs.max():
        v = float(logs[0])
        return Admissibility(v, (v, v), draws=draws, norm=norm_name)
    mean = float(logs.mean())
    half = 1.959963984540054 * float(logs.std(ddof=1)) / math.sqrt(draws)
    return Admissibility(mean, (mean - half, mean + half), draws=draws, norm=norm_name)


def _close(a, b):
    return math.isclose(a, b, rel_tol=PATHOLOGY_RTOL, abs_tol=PATHOLOGY_RTOL)


def classify_theta_star(params: ModelParams, solution=None) -> frozenset:
    """Pathological conditions met by ``params``.

    ``schur_zero`` involves a vector that is only asserted to exist and is
    therefore never raised.  ``lambda0_singular`` needs a solved moment
    system and is checked only when ``solution`` is given.
    """
    from .moments import LAMBDA0_COND_MAX, build_lag_recursion

    flags = set()
    b1 = params.beta1
    if _close(2 * b1, 1.0):
        flags.add("two_beta1_eq_one")
        # the remaining quantities divide by 1 - 2 beta1
        return frozenset(flags)
    if _close(params.alpha[0] * b1, 1.0):
        flags.add("alpha1_beta1_eq_one")
    else:
        sec = build_lag_recursion(params)
        ik = np.eye(params.p) - sec.K
        scale = max(1.0, float(np.abs(ik).max()) ** params.p)
        if abs(np.linalg.det(ik)) <= PATHOLOGY_RTOL * scale:
            flags.add("det_IK_zero")
        if _close(sec.s0, 1.0):
            flags.add("s0_eq_one")
    if solution is not None and np.linalg.cond(solution.Lambda0) > LAMBDA0_COND_MAX:
        flags.add("lambda0_singular")
    return frozenset(flags)


def check_admissibility(params: ModelParams, draws=100_000, seed=0) -> Admissibility:
    """Log condition, second-order stationarity and pathological flags together."""
    from .exceptions import NonStationaryError, ThetaStarError
    from .moments import solve_moments, spectral_radius_A2

    log_part = check_log_condition(params, draws=draws, seed=seed)
    rho = spectral_radius_A2(params)
    flags = set(classify_theta_star(params))
    if rho < 1 and not flags:
        try:
            sol = solve_moments(params)
        except ThetaStarError as exc:
            flags |= exc.flags
        except NonStationaryError:
            pass
        else:
            flags |= classify_theta_star(params, sol)
    return Admissibility(
        log_part.log_norm_estimate,
        log_part.log_norm_ci,
        rho_A2=rho,
        theta_star_flags=frozenset(flags),
        draws=draws,
        norm=log_part.norm,
    )


def fig1_params(alpha1=0.3, theta1=0.3, eta1_var=0.2, eps_var=1.0) -> ModelParams:
    """The p=2 setting of the significance experiment (theta2 = alpha2 = 0)."""
    return ModelParams.gaussian([theta1, 0.0], [alpha1, 0.0], [eta1_var, 0.0], eps_var)
