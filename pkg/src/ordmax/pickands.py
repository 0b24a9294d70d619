"""Monte Carlo estimation of high-excursion intensity constants.

Per replicate, m independent fractional Brownian motions B_i (Hurst a/2)
are simulated on [0, lam] and the drifted envelopes
``eta_i(t) = sqrt(2) B_i(t) - t**a`` evaluated on the lattice.  The
replicate's contribution is the exact measure, under the weight
``exp(w_1 + ... + w_m) dw``, of the union of lower orthants
``{w : w_i < eta_i(t_k) for all i}`` over candidate times t_k: all lattice
times for the continuous constant, the points {kd} for the grid constant,
and the intersection of the two (with level shifts x, y) for the joint
constant.  Averaging over replicates estimates the lambda-level constant
H(lam); the limiting constant is the slope of H(lam) in lam.

The orthant measures are computed exactly (up to rounding) by a descending
sweep on the last coordinate with recursive lower-dimensional sub-measures;
no Monte Carlo is spent on the w integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, StepMismatch
from .gp_synth import LatticeSpec, sample_fbm_paths

KINDS = ("continuous", "grid", "joint")

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class OrthantPointSet:
    """Corner points of lower orthants in R^m (one per candidate time)."""

    m: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size and (pts.ndim != 2 or pts.shape[1] != self.m):
            raise ValueError("points must have shape (k, m)")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("orthant corners must be finite")
        object.__setattr__(self, "points", pts.reshape(-1, self.m))


def _as_points(ps) -> np.ndarray:
    if isinstance(ps, OrthantPointSet):
        return ps.points
    pts = np.asarray(ps, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, 1)
    if pts.ndim == 1:
        return pts.reshape(-1, 1)
    return pts


def _prune(pts: np.ndarray) -> np.ndarray:
    """Drop orthants contained in another (componentwise dominated corners)."""
    pts = np.unique(pts, axis=0)
    k = len(pts)
    if k <= 1:
        return pts
    keep = np.ones(k, dtype=bool)
    idx = np.arange(k)
    for i in range(k):
        if np.any(np.all(pts >= pts[i], axis=1) & (idx != i)):
            keep[i] = False
    return pts[keep]


def _staircase_2d(pts: np.ndarray) -> float:
    # descending sweep on the 2nd coordinate; ties telescope to weight 0
    order = np.argsort(-pts[:, 1], kind="stable")
    last = pts[order, 1]
    runmax = np.maximum.accumulate(pts[order, 0])
    weights = np.exp(last) - np.append(np.exp(last[1:]), 0.0)
    return float(np.sum(weights * np.exp(runmax)))


def orthant_union_exp_measure(ps) -> float:
    """Measure of a union of lower orthants under ``exp(sum w) dw``.

    Exact up to float rounding: closed form ``exp(max)`` in one dimension,
    a sweep on the last coordinate with (m-1)-dimensional sub-measures
    otherwise.  The empty set has measure 0.
    """
    pts = _as_points(ps)
    if pts.shape[0] == 0:
        return 0.0
    m = pts.shape[1]
    if m == 1:
        return float(np.exp(pts.max()))
    if m == 2:
        return _staircase_2d(pts)
    pts = _prune(pts)
    order = np.argsort(-pts[:, -1], kind="stable")
    pts = pts[order]
    last = pts[:, -1]
    edge = np.exp(last) - np.append(np.exp(last[1:]), 0.0)
    total = 0.0
    for j in range(len(pts)):
        if edge[j] != 0.0:
            total += edge[j] * orthant_union_exp_measure(pts[:j + 1, :-1])
    return total


def _staircase_inter_2d(pa: np.ndarray, pb: np.ndarray) -> float:
    last = np.concatenate([pa[:, 1], pb[:, 1]])
    first = np.concatenate([pa[:, 0], pb[:, 0]])
    is_a = np.zeros(len(last), dtype=bool)
    is_a[:len(pa)] = True
    order = np.argsort(-last, kind="stable")
    last, first, is_a = last[order], first[order], is_a[order]
    run_a = np.maximum.accumulate(np.where(is_a, first, _NEG_INF))
    run_b = np.maximum.accumulate(np.where(is_a, _NEG_INF, first))
    weights = np.exp(last) - np.append(np.exp(last[1:]), 0.0)
    # exp(-inf) = 0 covers levels where one family is not yet active
    return float(np.sum(weights * np.exp(np.minimum(run_a, run_b))))


def orthant_intersection_exp_measure(ps_a, ps_b) -> float:
    """Measure of (union of orthants A) intersect (union of orthants B).

    Single sweep on the last coordinate maintaining both active families;
    lower-dimensional intersections are recursed exactly.
    """
    pa, pb = _as_points(ps_a), _as_points(ps_b)
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        return 0.0
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("point sets live in different dimensions")
    m = pa.shape[1]
    if m == 1:
        return float(np.exp(min(pa.max(), pb.max())))
    if m == 2:
        return _staircase_inter_2d(pa, pb)
    pa, pb = _prune(pa), _prune(pb)
    last = np.concatenate([pa[:, -1], pb[:, -1]])
    is_a = np.zeros(len(last), dtype=bool)
    is_a[:len(pa)] = True
    order = np.argsort(-last, kind="stable")
    last, is_a = last[order], is_a[order]
    rest = np.concatenate([pa[:, :-1], pb[:, :-1]])[order]
    edge = np.exp(last) - np.append(np.exp(last[1:]), 0.0)
    total = 0.0
    for j in range(len(last)):
        if edge[j] == 0.0:
            continue
        head_a = rest[:j + 1][is_a[:j + 1]]
        head_b = rest[:j + 1][~is_a[:j + 1]]
        if len(head_a) and len(head_b):
            total += edge[j] * orthant_intersection_exp_measure(head_a, head_b)
    return total


# ---------------------------------------------------------------------------
# per-path envelopes and measures
# ---------------------------------------------------------------------------

def drifted_envelope(fbm_values: np.ndarray, times: np.ndarray,
                     alpha: float) -> np.ndarray:
    """eta_i(t) = sqrt(2) B_i(t) - t**alpha, rows = components."""
    return math.sqrt(2.0) * np.atleast_2d(fbm_values) - times ** alpha


def continuous_measure(eta: np.ndarray) -> float:
    return orthant_union_exp_measure(eta.T)


def grid_measure(eta: np.ndarray, stride: int) -> float:
    return orthant_union_exp_measure(eta[:, ::stride].T)


def joint_measure(eta: np.ndarray, stride: int, x: float, y: float) -> float:
    return orthant_intersection_exp_measure(eta.T - x, eta[:, ::stride].T - y)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PickandsEstimate:
    """One lambda-level estimate of an excursion-intensity constant."""

    kind: str
    m: int
    alpha: float
    lam: float
    value: float           # estimate of H(lam)
    slope: float           # crude H(lam)/lam ratio
    ci_halfwidth: float    # 95% normal CI on value
    replicates: int
    time_step: float
    d: float = math.nan
    x: float = math.nan
    y: float = math.nan

    @property
    def caveat(self):
        if self.kind == "grid":
            return None
        return ("lattice-restricted suprema bias the estimate of the "
                "continuous-time constant downward")


def _exact_multiple(whole: float, part: float, name: str) -> int:
    k = whole / part
    ki = int(round(k))
    if ki < 1 or abs(k - ki) > 1e-12 * max(1.0, abs(k)):
        raise StepMismatch(f"time step {part!r} does not divide {name} "
                           f"({whole!r})")
    return ki


def _measure_block(eta, kind, stride, x, y, lam_idx):
    """Per-replicate measures for one simulated block.

    eta has shape (block, m, k+1); lam_idx lists the lattice index of each
    requested horizon, so one simulation serves a whole common-random-number
    lambda schedule.
    """
    block, m, _ = eta.shape
    out = np.empty((len(lam_idx), block))
    if m == 1 and kind == "continuous":
        run = np.maximum.accumulate(eta[:, 0, :], axis=1)
        for j, k in enumerate(lam_idx):
            out[j] = np.exp(run[:, k])
        return out
    if m == 1 and kind == "grid":
        sub = np.maximum.accumulate(eta[:, 0, ::stride], axis=1)
        for j, k in enumerate(lam_idx):
            out[j] = np.exp(sub[:, k // stride])
        return out
    if m == 1 and kind == "joint":
        run = np.maximum.accumulate(eta[:, 0, :], axis=1)
        sub = np.maximum.accumulate(eta[:, 0, ::stride], axis=1)
        for j, k in enumerate(lam_idx):
            out[j] = np.exp(np.minimum(run[:, k] - x, sub[:, k // stride] - y))
        return out
    for i in range(block):
        for j, k in enumerate(lam_idx):
            head = eta[i, :, :k + 1]
            if kind == "continuous":
                out[j, i] = continuous_measure(head)
            elif kind == "grid":
                out[j, i] = grid_measure(head, stride)
            else:
                out[j, i] = joint_measure(head, stride, x, y)
    return out


def measure_samples(kind, m, alpha, lambdas, time_step, d=None, x=0.0, y=0.0,
                    replicates=2000, seed=0) -> np.ndarray:
    """Raw per-replicate measures at each lambda, shape (len(lambdas), R).

    All lambdas share paths (common random numbers): one simulation on
    [0, max lambda], prefix measures at the smaller horizons.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    lambdas = sorted(float(l) for l in lambdas)
    if lambdas[0] <= 0:
        raise ValueError("lambda must be positive")
    lam_idx = [_exact_multiple(l, time_step, "lambda") for l in lambdas]
    stride = None
    if kind in ("grid", "joint"):
        if d is None or d <= 0:
            raise ValueError(f"{kind} estimates need d > 0")
        stride = _exact_multiple(d, time_step, "d")
    k_max = lam_idx[-1]
    lattice = LatticeSpec(time_step, k_max + 1)
    drift = lattice.times() ** alpha
    hurst = alpha / 2.0
    out = np.empty((len(lambdas), replicates))
    block = max(1, int(2 ** 21) // (m * (k_max + 1)))
    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    children = ss.spawn((replicates + block - 1) // block)
    done = 0
    for child in children:
        b = min(block, replicates - done)
        paths = sample_fbm_paths(hurst, lattice, b * m, child)
        eta = math.sqrt(2.0) * paths.reshape(b, m, k_max + 1) - drift
        out[:, done:done + b] = _measure_block(eta, kind, stride, x, y, lam_idx)
        done += b
    return out


def estimate_H(kind, m, alpha, lam, time_step=None, d=None, x=0.0, y=0.0,
               replicates=2000, seed=0) -> PickandsEstimate:
    """Estimate H(lam) for one constant kind.

    With ``time_step=None`` the step starts at ``min(d, lam)/64`` and is
    halved (up to three times, on quarter-size pilots) until the estimate
    moves by less than 1%.
    """
    if time_step is None:
        time_step = _auto_step(kind, m, alpha, lam, d, x, y, replicates, seed)
    vals = measure_samples(kind, m, alpha, [lam], time_step, d, x, y,
                           replicates, seed)[0]
    return _summarize(kind, m, alpha, lam, time_step, d, x, y, vals)


def estimate_H_schedule(kind, m, alpha, lambdas, time_step, d=None, x=0.0,
                        y=0.0, replicates=2000, seed=0):
    """Common-random-number estimates along an increasing lambda schedule."""
    lambdas = sorted(float(l) for l in lambdas)
    samples = measure_samples(kind, m, alpha, lambdas, time_step, d, x, y,
                              replicates, seed)
    return [_summarize(kind, m, alpha, lam, time_step, d, x, y, vals)
            for lam, vals in zip(lambdas, samples)]


def _summarize(kind, m, alpha, lam, time_step, d, x, y, vals):
    value = float(np.mean(vals))
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return PickandsEstimate(
        kind=kind, m=m, alpha=alpha, lam=lam, value=value,
        slope=value / lam, ci_halfwidth=1.96 * sd / math.sqrt(len(vals)),
        replicates=len(vals), time_step=time_step,
        d=math.nan if d is None else float(d), x=float(x), y=float(y))


def _auto_step(kind, m, alpha, lam, d, x, y, replicates, seed):
    base = lam if d is None else min(d, lam)
    step = base / 64.0
    pilots = max(200, replicates // 4)
    prev = np.mean(measure_samples(kind, m, alpha, [lam], step, d, x, y,
                                   pilots, seed)[0])
    for _ in range(3):
        half = step / 2.0
        cur = np.mean(measure_samples(kind, m, alpha, [lam], half, d, x, y,
                                      pilots, seed)[0])
        if abs(cur - prev) < 0.01 * abs(cur):
            break
        step, prev = half, cur
    return step


def slope_extrapolate(estimates) -> float:
    """Least-squares slope of H(lam) over the largest-lambda half."""
    ests = sorted(estimates, key=lambda e: e.lam)
    lams = [e.lam for e in ests]
    if len(set(lams)) < 3:
        raise InsufficientData("need at least 3 distinct lambda values")
    tail = ests[len(ests) // 2:]
    xs = np.array([e.lam for e in tail])
    ys = np.array([e.value for e in tail])
    slope = float(np.polyfit(xs, ys, 1)[0])
    if slope <= 0:
        raise InsufficientData(f"nonpositive slope {slope:g}; the schedule "
                               "does not resolve the linear growth")
    return slope


def estimate_slope(kind, m, alpha, lambda0=2.0, time_step=None, d=None,
                   x=0.0, y=0.0, replicates=2000, seed=0):
    """Slope of the default {lam0, 2 lam0, 4 lam0} schedule, with estimates."""
    lambdas = [lambda0, 2 * lambda0, 4 * lambda0]
    if time_step is None:
        time_step = _auto_step(kind, m, alpha, lambdas[-1], d, x, y,
                               replicates, seed)
    ests = estimate_H_schedule(kind, m, alpha, lambdas, time_step, d, x, y,
                               replicates, seed)
    return slope_extrapolate(ests), ests
