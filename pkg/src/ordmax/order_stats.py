"""Order-statistics paths and joint extraction of lattice/grid maxima.

The m-th upper order-statistics path is the pointwise m-th largest of n
independent component paths (m=1 the pointwise max, m=n the pointwise min).
Sampling grids are classified by the scaled spacing
``ratio = p * (2/m * ln T)**(1/alpha)``: large ratios are sparse, bounded
ratios with a fixed target are "critical" grids, vanishing ratios are dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GridOutOfRange
from .gp_synth import GaussianPath, LatticeSpec

REGIMES = ("sparse", "pickands", "dense")

#: operational thresholds on the scaled spacing
SPARSE_MIN_RATIO = 10.0
DENSE_MAX_RATIO = 0.1


def grid_scale(T: float, m: int, alpha: float) -> float:
    """The spacing unit ``(2/m * ln T)**(-1/alpha)``."""
    if T <= 1.0:
        raise ValueError("T must exceed 1")
    return (2.0 / m * math.log(T)) ** (-1.0 / alpha)


@dataclass(frozen=True)
class GridSpec:
    """A uniform sampling grid {kp} with regime bookkeeping.

    ``d`` is the target scaled spacing (meaningful for the critical
    regime); provenance (T, m, alpha) fixes the classification scale.
    """

    regime: str
    p: float
    d: float
    T: float
    m: int
    alpha: float

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.p > 0:
            raise ValueError("p must be positive")
        ratio = self.ratio
        if self.regime == "sparse" and ratio < SPARSE_MIN_RATIO:
            raise ValueError(f"sparse grid needs ratio >= {SPARSE_MIN_RATIO}, "
                             f"got {ratio:.3g}")
        if self.regime == "pickands" and abs(ratio - self.d) > 1e-9 * self.d:
            raise ValueError(f"pickands grid needs ratio == d, got {ratio!r}")
        if self.regime == "dense" and ratio > DENSE_MAX_RATIO:
            raise ValueError(f"dense grid needs ratio <= {DENSE_MAX_RATIO}, "
                             f"got {ratio:.3g}")

    @property
    def ratio(self) -> float:
        return self.p / grid_scale(self.T, self.m, self.alpha)

    @classmethod
    def sparse(cls, ratio: float, T: float, m: int, alpha: float) -> "GridSpec":
        p = ratio * grid_scale(T, m, alpha)
        return cls("sparse", p, ratio, T, m, alpha)

    @classmethod
    def pickands(cls, d: float, T: float, m: int, alpha: float) -> "GridSpec":
        p = d * grid_scale(T, m, alpha)
        return cls("pickands", p, d, T, m, alpha)

    @classmethod
    def dense(cls, ratio: float, T: float, m: int, alpha: float) -> "GridSpec":
        p = ratio * grid_scale(T, m, alpha)
        return cls("dense", p, ratio, T, m, alpha)


@dataclass(frozen=True)
class MaximaSample:
    """One replicate's pair of maxima: fine lattice and sampling grid."""

    m_cont: float
    m_grid: float
    T: float
    m: int
    n: int
    seed: int


def order_stat_path(paths, m: int) -> np.ndarray:
    """Pointwise m-th largest of n component paths.

    ``paths`` is a list of :class:`GaussianPath` on one lattice or an
    (n, n_points) array.  Selection is by partial partition, O(n) per point.
    """
    if isinstance(paths, np.ndarray):
        values = paths
    else:
        lattices = {p.lattice for p in paths}
        if len(lattices) != 1:
            raise DimensionMismatch("paths do not share a lattice")
        values = np.stack([p.values for p in paths])
    n = values.shape[0]
    if not 1 <= m <= n:
        raise DimensionMismatch(f"need 1 <= m <= n, got m={m}, n={n}")
    if n == 1:
        return values[0]
    # index n-m of the ascending partition is the m-th largest
    return np.partition(values, n - m, axis=0)[n - m]


def grid_indices(lattice: LatticeSpec, grid: GridSpec) -> np.ndarray:
    """Lattice indices of the grid points kp inside [0, horizon].

    Grid points snap to the nearest lattice point; the harness keeps p an
    exact lattice multiple so the lookup is exact.  Points further than
    delta/2 from the lattice or beyond the horizon are rejected.
    """
    n_pts = int(math.floor(lattice.horizon / grid.p + 1e-9)) + 1
    kp = grid.p * np.arange(n_pts)
    idx = np.rint(kp / lattice.delta).astype(np.int64)
    if np.any(idx > lattice.n_points - 1):
        raise GridOutOfRange("grid point beyond the lattice horizon")
    off = np.abs(kp - idx * lattice.delta)
    if np.any(off > 0.5 * lattice.delta * (1 + 1e-9)):
        raise GridOutOfRange("grid point further than delta/2 from lattice")
    return idx


def maxima_pair(osp: np.ndarray, lattice: LatticeSpec, grid: GridSpec,
                n: int = 0, seed: int = 0) -> MaximaSample:
    """Maxima of an order-statistics path over the lattice and the grid."""
    if len(osp) != lattice.n_points:
        raise DimensionMismatch("path length does not match lattice")
    idx = grid_indices(lattice, grid)
    return MaximaSample(
        m_cont=float(np.max(osp)),
        m_grid=float(np.max(osp[idx])),
        T=lattice.horizon,
        m=grid.m,
        n=n,
        seed=seed,
    )
