"""Normal-comparison bound for order-statistics non-exceedance probabilities.

Setup: a d x n array of standard normals whose n columns are independent
while the d rows share a correlation matrix.  For each row take the m-th
largest entry (m=1 the row maximum, m=n the row minimum) and consider the
probability that every row statistic stays below its threshold u_i.  The
bound controls how much this probability can move when the row correlation
matrix changes from sigma1 to sigma0, by a Slepian-type interpolation sum
over row pairs.

The interpolation kernel for a pair (i, j) at blend ``delta`` decays like
``exp(-m (u_i^2 + u_j^2) / (2 (1 + |delta|)))`` with a ``(1-delta)^{-m/2}``
prefactor, all scaled by ``u_1^{-2(m-1)}``.  The absolute constant in front
is unknown; the returned value uses 1, so it is a bound only up to that
constant and acceptance checks treat domination statistically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import CholeskyFailure, SingularPair

#: blends are clamped into [-1 + CLAMP, 1 - CLAMP] before the kernel
CLAMP = 1e-12


def _check_correlation(name, mat, d):
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (d, d):
        raise ValueError(f"{name} must be {d}x{d}")
    if not np.allclose(mat, mat.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    if not np.allclose(np.diag(mat), 1.0, atol=1e-12):
        raise ValueError(f"{name} must have unit diagonal")
    off = mat[~np.eye(d, dtype=bool)]
    if off.size and np.max(np.abs(off)) >= 1.0:
        raise ValueError(f"{name} off-diagonal entries must satisfy |.| < 1")
    if np.linalg.eigvalsh(mat).min() < -1e-9:
        raise ValueError(f"{name} is not positive semidefinite")
    return mat


@dataclass(frozen=True)
class ComparisonInstance:
    """Two row-correlation matrices, thresholds, and the (m, n) selection."""

    d: int
    n: int
    m: int
    sigma0: np.ndarray
    sigma1: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError("need 1 <= m <= n")
        object.__setattr__(self, "sigma0",
                           _check_correlation("sigma0", self.sigma0, self.d))
        object.__setattr__(self, "sigma1",
                           _check_correlation("sigma1", self.sigma1, self.d))
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.d,) or not np.all(np.isfinite(u)):
            raise ValueError("u must be a finite d-vector")
        object.__setattr__(self, "u", u)


def _pair_integral(s0, s1, ui, uj, m):
    if max(abs(s0), abs(s1)) >= 1.0 - CLAMP:
        raise SingularPair(f"blend of {s0:g} and {s1:g} reaches 1; the "
                           "kernel is singular")
    usq = ui * ui + uj * uj

    def integrand(h):
        delta = np.clip(h * s0 + (1.0 - h) * s1, -1.0 + CLAMP, 1.0 - CLAMP)
        return ((1.0 - delta) ** (-0.5 * m)
                * np.exp(-m * usq / (2.0 * (1.0 + abs(delta)))))

    val, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def comparison_bound(inst: ComparisonInstance) -> float:
    """Upper bound (up to an absolute constant, reported with constant 1) on
    the difference of the two non-exceedance probabilities.

    The selection depth enters through ``k = m`` for the m-th largest: a
    deeper selection (larger m) means a joint exceedance of a row pair
    needs m simultaneous column exceedances, hence the factor m in the
    exponent.  Requires all thresholds positive.
    """
    if np.any(inst.u <= 0):
        raise ValueError("thresholds must be positive")
    m = inst.m
    total = 0.0
    for i in range(inst.d):
        for j in range(i + 1, inst.d):
            diff = abs(inst.sigma0[i, j] - inst.sigma1[i, j])
            if diff == 0.0:
                continue
            total += diff * _pair_integral(inst.sigma0[i, j],
                                           inst.sigma1[i, j],
                                           inst.u[i], inst.u[j], m)
    return float(inst.u[0] ** (-2.0 * (m - 1)) * total)


def mc_order_stat_cdf(sigma, n, m, u, replicates, seed):
    """Monte Carlo oracle for P(all row order statistics <= u).

    Samples the d x n array with independent columns and rows correlated
    by sigma, takes the m-th largest per row, and returns the empirical
    probability together with its binomial standard error.
    """
    if replicates < 10_000:
        raise ValueError("need at least 1e4 replicates")
    sigma = np.asarray(sigma, dtype=float)
    d = sigma.shape[0]
    u = np.asarray(u, dtype=float)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from None
    rng = np.random.default_rng(seed)
    hits = 0
    block = max(1, int(4e6) // (d * n))
    done = 0
    while done < replicates:
        b = min(block, replicates - done)
        z = rng.standard_normal((b, d, n))
        x = np.einsum("ij,bjn->bin", chol, z)
        stat = np.partition(x, n - m, axis=2)[:, :, n - m]
        hits += int(np.all(stat <= u, axis=1).sum())
        done += b
    p = hits / replicates
    se = np.sqrt(p * (1.0 - p) / replicates)
    return float(p), float(se)
