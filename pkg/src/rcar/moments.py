"""Stationary second moments and the almost-sure limit of OLS.

The vectorised second moments of the state ``Phi_t = (X_t, ..., X_{t-p+1})``
together with three mixed moments against the lagged coefficient noise obey
a linear recursion ``Omega_t = A2 Omega_{t-1} + B2`` whose fixed point gives
the autocovariances, and from them the OLS limit ``theta_star``.

Conventions: ``vec`` stacks columns (Fortran order), ``E1k`` is the p x p
matrix unit with a one at (0, k).  The noise matrix ``N_t`` carries
``eta_t`` in its first row, so every expectation below reduces to sums over
``k`` of products of ``E1k`` weighted by the noise moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonStationaryError, ThetaStarError
from .model import ModelParams, companion_matrix

LAMBDA0_COND_MAX = 1e12
SYMMETRY_TOL = 1e-10
DUAL_ROUTE_TOL = 1e-8


def vec(m):
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, p):
    return np.asarray(v).reshape(p, p, order="F")


def _unit(p, k):
    e = np.zeros((p, p))
    e[0, k] = 1.0
    return e


@dataclass(frozen=True)
class GammaSet:
    """Noise expectations entering the second-moment recursion."""

    Gamma0: np.ndarray
    G_alpha: np.ndarray
    Gamma_alpha: np.ndarray
    Gamma_alpha_prime: np.ndarray
    Gamma_alpha_c: np.ndarray
    Gamma_alpha_c_prime: np.ndarray
    Gamma_alpha_alpha: np.ndarray
    Lambda_alpha_alpha: np.ndarray
    Sigma0: np.ndarray

    def items(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}.items()


def build_gamma_set(params: ModelParams) -> GammaSet:
    """Closed forms of the Gamma matrices.

    With ``N = sum_k eta_k E1k`` and independent symmetric ``eta_k``, a
    degree-two expectation keeps only the diagonal terms ``tau_{k,2}``; the
    degree-four one (``Lambda_alpha_alpha``) keeps ``tau_{1,4}`` on (1, 1)
    and ``tau_{1,2} tau_{k,2}`` elsewhere, since ``N D N = alpha_1 eta_1 N``.
    """
    p = params.p
    a = params.alpha_vec
    t2 = params.tau2
    t4 = params.tau4
    c = params.companion()
    d = np.diag(a)
    units = [_unit(p, k) for k in range(p)]

    def quad(left, right):
        return sum(t2[k] * np.kron(left(units[k]), right(units[k])) for k in range(p))

    ident = lambda e: e  # noqa: E731
    gamma0 = quad(ident, ident)
    gamma_alpha = quad(lambda e: e @ d, ident)
    gamma_alpha_prime = quad(ident, lambda e: e @ d)
    gamma_alpha_c = quad(lambda e: e @ d @ c, ident)
    gamma_alpha_c_prime = quad(ident, lambda e: e @ d @ c)
    gamma_alpha_alpha = quad(lambda e: e @ d, lambda e: e @ d)

    g_alpha = params.beta1 * units[0]

    lam = t4[0] * np.kron(units[0], units[0])
    for k in range(1, p):
        lam = lam + t2[0] * t2[k] * np.kron(units[k], units[k])
    lam = a[0] ** 2 * lam

    sigma0 = np.zeros((p, p))
    sigma0[0, 0] = params.sigma2
    return GammaSet(
        Gamma0=gamma0,
        G_alpha=g_alpha,
        Gamma_alpha=gamma_alpha,
        Gamma_alpha_prime=gamma_alpha_prime,
        Gamma_alpha_c=gamma_alpha_c,
        Gamma_alpha_c_prime=gamma_alpha_c_prime,
        Gamma_alpha_alpha=gamma_alpha_alpha,
        Lambda_alpha_alpha=lam,
        Sigma0=sigma0,
    )


def assemble_A2_B2(gammas: GammaSet, params: ModelParams):
    """Block transition matrix and constant of the second-moment recursion.

    Blocks are ordered (U, V1, V2, W) with ``U = E vec(Phi Phi^T)``,
    ``V1 = E[(N D (x) I) vec(Phi Phi^T)]``, ``V2`` its mirror and
    ``W = E[(N D (x) N D) vec(Phi Phi^T)]``.
    """
    p = params.p
    q = p * p
    c = params.companion()
    eye = np.eye(p)
    cc = np.kron(c, c)
    ic = np.kron(eye, c)
    ci = np.kron(c, eye)
    g = gammas.G_alpha
    gaa = gammas.Gamma_alpha_alpha
    zero = np.zeros((q, q))
    a2 = np.block(
        [
            [cc + gammas.Gamma0, ic, ci, np.eye(q)],
            [np.kron(g, c) + gammas.Gamma_alpha_c, gammas.Gamma_alpha, np.kron(g, eye), zero],
            [np.kron(c, g) + gammas.Gamma_alpha_c_prime, np.kron(eye, g), gammas.Gamma_alpha_prime, zero],
            [gaa @ cc + gammas.Lambda_alpha_alpha, gaa @ ic, gaa @ ci, gaa],
        ]
    )
    s = vec(gammas.Sigma0)
    b2 = np.concatenate([s, np.zeros(q), np.zeros(q), gaa @ s])
    return a2, b2


def spectral_radius(a):
    return float(np.max(np.abs(np.linalg.eigvals(a)))) if a.size else 0.0


def spectral_radius_A2(params: ModelParams) -> float:
    a2, _ = assemble_A2_B2(build_gamma_set(params), params)
    return spectral_radius(a2)


@dataclass(frozen=True)
class MomentSolution:
    A2: np.ndarray
    B2: np.ndarray
    U: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    W: np.ndarray
    Lambda0: np.ndarray
    L1: np.ndarray
    lam: np.ndarray
    theta_star: np.ndarray
    rho_A2: float
    ell: np.ndarray

    @property
    def omega(self):
        return np.concatenate([self.U, self.V1, self.V2, self.W])

    def to_dict(self):
        return {
            "theta_star": self.theta_star.tolist(),
            "lambda0": self.Lambda0.tolist(),
            "l1": self.L1.tolist(),
            "lambda": self.lam.tolist(),
            "rho_A2": self.rho_A2,
        }


def _steady_state(params: ModelParams):
    gammas = build_gamma_set(params)
    a2, b2 = assemble_A2_B2(gammas, params)
    rho = spectral_radius(a2)
    if rho >= 1:
        raise NonStationaryError(f"spectral radius of A2 is {rho:.6g} >= 1; no stationary second moments")
    omega = np.linalg.solve(np.eye(a2.shape[0]) - a2, b2)
    return a2, b2, omega, rho


def _symmetric_part(m, what):
    dev = float(np.abs(m - m.T).max())
    if dev > SYMMETRY_TOL * max(1.0, float(np.abs(m).max())):
        raise RuntimeError(f"{what} is not symmetric (deviation {dev:.3g})")
    return 0.5 * (m + m.T)


def autocovariances(params: ModelParams, max_lag: int) -> np.ndarray:
    """``ell_0, ..., ell_max_lag`` from the system padded to ``max_lag + 1`` lags."""
    order = max(params.p, max_lag + 1)
    big = params.padded(order)
    _, _, omega, _ = _steady_state(big)
    u = _symmetric_part(unvec(omega[: order * order], order), "padded second-moment matrix")
    return u[0, : max_lag + 1].copy()


def solve_moments(params: ModelParams) -> MomentSolution:
    """Solve the stationary system and return ``theta_star`` by two routes.

    Route one reads ``Lambda0`` and the mixed moment ``lambda`` off the p-lag
    system and forms ``theta + Lambda0^{-1} lambda``; route two pads the
    state to p + 1 lags to get ``ell_p`` and forms ``Lambda0^{-1} L1``.  The
    two must agree to 1e-8.
    """
    p = params.p
    q = p * p
    a2, b2, omega, rho = _steady_state(params)
    u, v1, v2, w = (omega[i * q : (i + 1) * q] for i in range(4))
    lambda0 = _symmetric_part(unvec(u, p), "Lambda0")
    if not np.all(np.isfinite(lambda0)) or np.linalg.cond(lambda0) > LAMBDA0_COND_MAX:
        raise ThetaStarError("Lambda0 is numerically singular", flags={"lambda0_singular"})
    lam = unvec(v1, p)[:, 0].copy()
    theta_star = params.theta_vec + np.linalg.solve(lambda0, lam)

    ell = autocovariances(params, p)
    l1 = ell[1:].copy()
    lambda0_padded = toeplitz_lambda0(ell[:p])
    theta_star_alt = np.linalg.solve(lambda0_padded, l1)
    gap = float(np.abs(theta_star - theta_star_alt).max())
    if gap > DUAL_ROUTE_TOL * max(1.0, float(np.abs(theta_star).max())):
        raise RuntimeError(f"theta_star routes disagree by {gap:.3g}")
    return MomentSolution(
        A2=a2,
        B2=b2,
        U=u,
        V1=v1,
        V2=v2,
        W=w,
        Lambda0=lambda0,
        L1=l1,
        lam=lam,
        theta_star=theta_star,
        rho_A2=rho,
        ell=ell,
    )


def toeplitz_lambda0(first_row):
    r = np.asarray(first_row, dtype=float)
    idx = np.abs(np.subtract.outer(np.arange(r.size), np.arange(r.size)))
    return r[idx]


def closed_form_p2(theta1, beta1, beta2):
    """OLS limit for p = 2 when theta2 = 0, as explicit fractions.

    Both components share the denominator
    ``(theta1 - 2 beta1 - beta2 + 1)(theta1 + 2 beta1 + beta2 - 1)``.
    """
    den = (theta1 - 2 * beta1 - beta2 + 1) * (theta1 + 2 * beta1 + beta2 - 1)
    if den == 0:
        raise ThetaStarError("closed form undefined: zero denominator", flags={"lambda0_singular"})
    t1 = theta1 * (theta1**2 + beta2 - (1 - beta1) ** 2 - beta1 * (beta1 + beta2 - 1)) / den
    t2 = (theta1**2 * (2 * beta1 + beta2) - beta1 * ((1 - beta2) ** 2 + 4 * beta1 * (beta1 + beta2 - 1))) / den
    return t1, t2


@dataclass(frozen=True)
class LagRecursion:
    M_theta: np.ndarray
    M_alpha_beta: np.ndarray
    U0: np.ndarray
    K: np.ndarray
    s0: float
    beta1: float
    beta2: float


def build_lag_recursion(params: ModelParams) -> LagRecursion:
    """Linear map sending ``(ell_0, ..., ell_{p-1})`` to ``L1``.

    ``M_theta`` is the Yule-Walker map of the mean coefficients (lower
    Toeplitz part plus the Hankel part ``theta_{i+j-1}``); the beta terms add
    the extra lag-two correlation and the first row is rescaled by
    ``1 / (1 - 2 beta1)``.  Then ``L1 = U0 ell_0 + K L1``.
    """
    p = params.p
    th = params.theta_vec
    b1, b2 = params.beta1, params.beta2
    if np.isclose(2 * b1, 1.0, rtol=1e-10, atol=1e-10):
        raise ThetaStarError("2 beta1 = 1", flags={"two_beta1_eq_one"})
    m_theta = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            if i >= j:
                m_theta[i, j] += th[i - j]
            if j >= 1 and i + j < p:
                m_theta[i, j] += th[i + j]
    corr = np.zeros((p, p))
    if p > 1:
        corr[0, 1] = b2
        for i in range(1, p):
            corr[i, i - 1] = b1
    scale = np.eye(p)
    scale[0, 0] = 1.0 / (1.0 - 2.0 * b1)
    m_ab = scale @ (m_theta + corr)
    u0 = m_ab[:, 0].copy()
    k = np.zeros((p, p))
    k[:, : p - 1] = m_ab[:, 1:]

    a1, t12 = params.alpha[0], params.eta[0].m2
    th2 = th[1] if p > 1 else 0.0
    # only feeds the s0_eq_one flag; theta_star never uses it
    s0 = (1 + a1 * th2 + 2 * a1 * th[0] ** 2 / (1 - 2 * b1) + params.sigma2 / (1 - a1 * b1)) * t12
    s0 += sum((1 + params.alpha[k_] ** 2) * params.eta[k_].m2 for k_ in range(1, p))
    return LagRecursion(
        M_theta=m_theta, M_alpha_beta=m_ab, U0=u0, K=k, s0=float(s0), beta1=b1, beta2=b2
    )


def l1_from_recursion(sec: LagRecursion, ell0: float) -> np.ndarray:
    p = sec.K.shape[0]
    return np.linalg.solve(np.eye(p) - sec.K, sec.U0 * ell0)


def check_yule_walker(solution: MomentSolution | None, params: ModelParams, imax: int) -> float:
    """Largest residual of the generalized Yule-Walker relations for 1 <= i <= imax.

    ``ell_1 (1 - 2 beta1) = sum_k theta_k ell_{k-1} + beta2 ell_1`` and, for
    ``i >= 2``, ``ell_i = sum_k theta_k ell_{|i-k|} + beta1 ell_{|i-2|}``.
    """
    p = params.p
    need = max(p, imax)
    if solution is not None and solution.ell.size > need:
        ell = solution.ell
    else:
        ell = autocovariances(params, need)
    th = params.theta_vec
    b1, b2 = params.beta1, params.beta2
    worst = 0.0
    for i in range(1, imax + 1):
        rhs = sum(th[k - 1] * ell[abs(i - k)] for k in range(1, p + 1))
        if i == 1:
            res = ell[1] * (1 - 2 * b1) - rhs - b2 * ell[1]
        else:
            res = ell[i] - rhs - b1 * ell[abs(i - 2)]
        worst = max(worst, abs(float(res)))
    return worst


__all__ = [
    "GammaSet",
    "MomentSolution",
    "LagRecursion",
    "assemble_A2_B2",
    "autocovariances",
    "build_gamma_set",
    "build_lag_recursion",
    "check_yule_walker",
    "closed_form_p2",
    "companion_matrix",
    "l1_from_recursion",
    "solve_moments",
    "spectral_radius",
    "spectral_radius_A2",
    "toeplitz_lambda0",
    "unvec",
    "vec",
]
