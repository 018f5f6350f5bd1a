"""Independent reference computations used by the tests.

Nothing here calls the closed forms under test: expectations are Monte Carlo
averages of the defining random matrices, spectral radii come from Gelfand's
formula, autocovariances from long simulated paths.
"""

import numpy as np

from rcar.model import ModelParams


def _kron_batch(a, b):
    d, p, _ = a.shape
    return np.einsum("dij,dkl->dikjl", a, b).reshape(d, p * p, p * p)


def gamma_monte_carlo(params: ModelParams, draws=1_000_000, seed=0, chunk=100_000):
    """Mean and standard error of every Gamma matrix over draws of N_0."""
    p = params.p
    c = params.companion()
    d = np.diag(params.alpha_vec)
    rng = np.random.default_rng(seed)
    sums, sq = {}, {}
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        eta = np.column_stack([spec.sample(rng, m) for spec in params.eta])
        n0 = np.zeros((m, p, p))
        n0[:, 0, :] = eta
        nd = n0 @ d
        ndn = nd @ n0
        samples = {
            "Gamma0": _kron_batch(n0, n0),
            "G_alpha": ndn,
            "Gamma_alpha": _kron_batch(nd, n0),
            "Gamma_alpha_prime": _kron_batch(n0, nd),
            "Gamma_alpha_c": _kron_batch(nd @ c, n0),
            "Gamma_alpha_c_prime": _kron_batch(n0, nd @ c),
            "Gamma_alpha_alpha": _kron_batch(nd, nd),
            "Lambda_alpha_alpha": _kron_batch(ndn, ndn),
        }
        for k, v in samples.items():
            sums[k] = sums.get(k, 0.0) + v.sum(axis=0)
            sq[k] = sq.get(k, 0.0) + (v * v).sum(axis=0)
        done += m
    out = {}
    for k in sums:
        mean = sums[k] / draws
        var = np.clip(sq[k] / draws - mean * mean, 0.0, None)
        out[k] = (mean, np.sqrt(var / draws))
    return out


def gelfand_radius(a, squarings=28):
    """rho(A) = lim ||A^k||^{1/k}, evaluated at k = 2**squarings with rescaling."""
    m = np.array(a, dtype=float)
    log_scale = 0.0
    for _ in range(squarings):
        m = m @ m
        s = np.abs(m).max()
        if s == 0:
            return 0.0
        m /= s
        log_scale = 2 * log_scale + np.log(s)
    k = 2**squarings
    return float(np.exp((log_scale + np.log(np.linalg.norm(m, 2))) / k))


def sample_autocov(x, max_lag):
    x = np.asarray(x, dtype=float)
    n = x.size - max_lag
    return np.array([np.dot(x[max_lag:], x[max_lag - i : max_lag - i + n]) / n for i in range(max_lag + 1)])


def yule_walker_fixed_point(theta, beta1, beta2, sigma_scale=1.0):
    """Solve the generalized Yule-Walker relations for ell_1..ell_p given ell_0 = 1.

    Returns the ratios ell_i / ell_0 for i = 0..p; brute-force linear system
    written directly from the relations, independent of the matrix layout
    used by the package.
    """
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    # unknowns r_1..r_p (r_0 = 1)
    a = np.zeros((p, p))
    b = np.zeros(p)

    def add(row, lag, coef):
        if lag == 0:
            b[row] -= coef
        else:
            a[row, lag - 1] += coef

    for i in range(1, p + 1):
        row = i - 1
        if i == 1:
            add(row, 1, 1 - 2 * beta1 - beta2)
            for k in range(1, p + 1):
                add(row, k - 1, -theta[k - 1])
        else:
            add(row, i, 1.0)
            for k in range(1, p + 1):
                add(row, abs(i - k), -theta[k - 1])
            add(row, abs(i - 2), -beta1)
    r = np.linalg.solve(a, b)
    return np.concatenate([[1.0], r])
