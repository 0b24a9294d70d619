"""Normalizing constants and theoretical joint limit laws.

The four laws share the level scale ``a = sqrt(2 m ln T)`` and centering
sequences built from the excursion-intensity constants:

* ``b_cont``   -- centering for the fine-lattice ("continuous") maximum,
* ``b_sparse`` -- centering for a sparse grid with spacing p,
* ``b_pick``   -- centering for a critical grid (grid constant H_grid).

For finite long-range limits r, the joint laws are Gumbel-type mixed over a
single standard normal N; expectations over N are evaluated by
Gauss-Hermite quadrature.  The strong-dependence law is the degenerate
normal ``Phi(min(x, y))``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import roots_hermite
from scipy.stats import norm

from .errors import DomainError, InvalidJointConstant

THEOREMS = ("T21", "T22", "T23", "T24")

# spectral order needed for the double-exponential integrands to be stable
# to 1e-10 under order doubling across r <= 2, m <= 3, |x|, |y| <= 5
DEFAULT_QUAD_ORDER = 1024


@dataclass(frozen=True)
class NormalizingConstants:
    a: float
    b_cont: float
    b_sparse: float
    b_pick: float
    m: int
    n: int
    alpha: float
    T: float
    p: float
    h_cont: float
    h_grid: float


def norming_constants(m, n, alpha, T, p, h_cont, h_grid) -> NormalizingConstants:
    """Exact evaluation of the level scale and the three centerings."""
    if T <= math.e:
        raise DomainError(f"need T > e, got {T!r}")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if h_cont <= 0 or h_grid <= 0 or p <= 0:
        raise ValueError("h_cont, h_grid and p must be positive")
    a = math.sqrt(2.0 * m * math.log(T))
    c_nm = comb(n, m)
    gauss = (2.0 * math.pi) ** (-m / 2.0)
    lead = a / m
    b_cont = lead + math.log(a ** (2.0 / alpha - m) * c_nm * h_cont * gauss) / a
    b_sparse = lead + math.log(a ** (-float(m)) * c_nm * gauss / p) / a
    b_pick = lead + math.log(a ** (2.0 / alpha - m) * c_nm * h_grid * gauss) / a
    return NormalizingConstants(a, b_cont, b_sparse, b_pick,
                                m, n, alpha, T, p, h_cont, h_grid)


@dataclass(frozen=True)
class LimitLawSpec:
    """Parameters of one theoretical joint limit CDF.

    ``h_joint`` is only used by the T22 law: either a constant or a
    callable ``(x, y) -> value`` returning the joint constant already
    shifted by the log-constants (see :func:`shifted_joint_provider`).
    """

    theorem: str
    m: int
    n: int
    r_long: float = 0.0
    h_joint: object = None
    quadrature_order: int = DEFAULT_QUAD_ORDER

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        if self.theorem != "T24":
            if not (0.0 <= self.r_long < math.inf):
                raise ValueError("finite-r laws need r_long in [0, inf)")
        if self.quadrature_order < 16:
            raise ValueError("quadrature_order must be at least 16")


@lru_cache(maxsize=16)
def _gh_nodes(order: int):
    nodes, weights = roots_hermite(order)
    # E f(N) = sum w_i f(sqrt(2) x_i) / sqrt(pi) for N ~ N(0,1)
    return nodes * math.sqrt(2.0), weights / math.sqrt(math.pi)


def _mixed_expectation(fn, order: int) -> float:
    z, w = _gh_nodes(order)
    with np.errstate(over="ignore"):
        # inner exp may overflow to inf; exp(-inf) = 0 is the right limit
        return float(np.dot(w, fn(z)))


def marginal_cdf(r, m, x, quadrature_order=DEFAULT_QUAD_ORDER):
    """Gumbel law mixed over the normal: E exp(-e^{-x-r+sqrt(2rm) N}).

    Accepts scalar or array ``x``; returns a matching float or array.
    """
    if not (0.0 <= r < math.inf):
        raise ValueError("need finite r >= 0")
    s = math.sqrt(2.0 * r * m)
    z, w = _gh_nodes(quadrature_order)
    xs = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        vals = np.exp(-np.exp(-xs[..., None] - r + s * z)) @ w
    if xs.ndim == 0:
        return float(vals)
    return vals


def limit_cdf(spec: LimitLawSpec, x, y) -> float:
    """Theoretical joint CDF of the normalized (lattice, grid) maxima."""
    if spec.theorem == "T24":
        return float(norm.cdf(min(x, y)))
    r, m = spec.r_long, spec.m
    s = math.sqrt(2.0 * r * m)
    order = spec.quadrature_order

    if spec.theorem == "T23":
        return marginal_cdf(r, m, min(x, y), order)

    if spec.theorem == "T21":
        val = _mixed_expectation(
            lambda z: np.exp(-(np.exp(-x - r + s * z)
                               + np.exp(-y - r + s * z))), order)
        return min(1.0, val)

    # T22: corrected exponent with the joint constant
    h = spec.h_joint(x, y) if callable(spec.h_joint) else spec.h_joint
    if h is None or h < 0:
        raise InvalidJointConstant(f"joint constant must be >= 0, got {h!r}")
    val = _mixed_expectation(
        lambda z: np.exp(-(np.exp(-x - r + s * z) + np.exp(-y - r + s * z)
                           - h * np.exp(-r + s * z))), order)
    bound = min(marginal_cdf(r, m, x, order), marginal_cdf(r, m, y, order))
    if val > bound + 1e-9:
        raise InvalidJointConstant(
            f"joint CDF {val:.6g} exceeds marginal {bound:.6g} at "
            f"({x:g}, {y:g}); the supplied joint constant is inconsistent")
    return min(1.0, val)


def tail_probability(u, S, m, n, alpha, h_cont) -> float:
    """Leading-order exceedance probability of the order-statistics maximum
    over [0, S] at level u: ``C(n,m) S H u^{2/alpha} Psi(u)^m``."""
    if u <= 0 or S <= 0:
        raise ValueError("need u > 0 and S > 0")
    val = comb(n, m) * S * h_cont * u ** (2.0 / alpha) * norm.sf(u) ** m
    if val >= 0.5:
        warnings.warn(f"tail approximation {val:.3g} >= 0.5 is outside the "
                      "asymptotic regime", stacklevel=2)
    return float(val)


# ---------------------------------------------------------------------------
# joint-constant providers for the T22 law
# ---------------------------------------------------------------------------

def shifted_joint_provider(raw, h_cont: float, h_grid: float):
    """Wrap a raw provider of H^{x', y'} so the law can call it per probe.

    The T22 exponent needs the joint constant at arguments shifted by
    ``(ln h_cont, ln h_grid)``; ``raw`` is any ``(x', y') -> value``.
    """
    lx, ly = math.log(h_cont), math.log(h_grid)
    return lambda x, y: raw(lx + x, ly + y)


def bilinear_table_provider(xs, ys, values):
    """Bilinear interpolation of a joint-constant table on an (x, y) grid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (len(xs), len(ys)):
        raise ValueError("table shape does not match the axes")

    def provider(x, y):
        i = np.clip(np.searchsorted(xs, x) - 1, 0, len(xs) - 2)
        j = np.clip(np.searchsorted(ys, y) - 1, 0, len(ys) - 2)
        tx = np.clip((x - xs[i]) / (xs[i + 1] - xs[i]), 0.0, 1.0)
        ty = np.clip((y - ys[j]) / (ys[j + 1] - ys[j]), 0.0, 1.0)
        v00, v01 = values[i, j], values[i, j + 1]
        v10, v11 = values[i + 1, j], values[i + 1, j + 1]
        return float((1 - tx) * ((1 - ty) * v00 + ty * v01)
                     + tx * ((1 - ty) * v10 + ty * v11))

    return provider


def shift_reduced_provider(zs, values, m: int):
    """Provider built from a 1-D table of H^{z, 0} in z = x - y.

    Uses the exact shift identity H^{x, y} = exp(-m y) H^{x - y, 0} to
    reduce the two-argument constant to one dimension.
    """
    zs = np.asarray(zs, dtype=float)
    values = np.asarray(values, dtype=float)
    if zs.ndim != 1 or zs.shape != values.shape:
        raise ValueError("zs and values must be matching 1-D arrays")
    order = np.argsort(zs)
    zs, values = zs[order], values[order]

    def provider(x, y):
        base = float(np.interp(x - y, zs, values))
        return math.exp(-m * y) * base

    return provider
