"""Parametric stationary correlation families.

Every family is normalized so that ``1 - r(t) ~ |t|**alpha`` with unit local
coefficient as ``t -> 0``, while the behaviour of ``r(t) * ln(t)`` at large
lags separates the dependence regimes:

* ``exp_alpha``        -- ``r(t) = exp(-|t|**alpha)``; ``r(t) ln t -> 0``.
* ``polya_log``        -- ``r(t) = r / ln(e**r + r e**r |t|)``;
                          ``r(t) ln t -> r`` in ``(0, inf)``.
* ``polya_log_infty``  -- ``r(t) = ln(e + |t|/beta * e)**(-beta)``,
                          ``beta in (0,1)``; ``r(t) ln t -> inf`` monotonely.

The two logarithmic families are convex and decrease to zero on ``[0, inf)``,
so their even extensions are valid correlation functions by Polya's
criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationFailure

FAMILIES = ("exp_alpha", "polya_log", "polya_log_infty")
THEOREMS = ("T21", "T22", "T23", "T24")

#: probe lags used for numeric long-range checks
LONG_RANGE_PROBES = (1e3, 1e6, 1e9)

#: relative tolerance for the limit probe at the largest lag
LIMIT_PROBE_RTOL = 0.05

#: slack allowed in the numeric convexity check (second differences)
CONVEXITY_SLACK = 1e-9


@dataclass(frozen=True)
class CorrelationModel:
    """A stationary correlation function with known regime parameters.

    ``r_long`` is the analytic limit of ``r(t) * ln(t)``: 0 for the
    exponential family, the parameter ``r`` for ``polya_log`` and ``inf``
    for ``polya_log_infty``.
    """

    family: str
    alpha: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError("alpha must lie in (0, 2]")
        if self.family == "polya_log":
            r = self.params.get("r")
            if r is None or not (0.0 < r < math.inf):
                raise ValueError("polya_log needs r in (0, inf)")
            if self.alpha != 1.0:
                raise ValueError("polya_log is an alpha=1 family")
        if self.family == "polya_log_infty":
            beta = self.params.get("beta")
            if beta is None or not (0.0 < beta < 1.0):
                raise ValueError("polya_log_infty needs beta in (0, 1)")
            if self.alpha != 1.0:
                raise ValueError("polya_log_infty is an alpha=1 family")

    @property
    def r_long(self) -> float:
        """Analytic limit of ``r(t) * ln(t)`` as ``t -> inf``."""
        if self.family == "exp_alpha":
            return 0.0
        if self.family == "polya_log":
            return float(self.params["r"])
        return math.inf


def exp_alpha(alpha: float) -> CorrelationModel:
    return CorrelationModel("exp_alpha", float(alpha))


def polya_log(r: float) -> CorrelationModel:
    return CorrelationModel("polya_log", 1.0, {"r": float(r)})


def polya_log_infty(beta: float) -> CorrelationModel:
    return CorrelationModel("polya_log_infty", 1.0, {"beta": float(beta)})


def evaluate(model: CorrelationModel, t):
    """Correlation at lag ``t`` (scalar or array); even, 1 only at t=0."""
    at = np.abs(np.asarray(t, dtype=float))
    if model.family == "exp_alpha":
        out = np.exp(-(at ** model.alpha))
    elif model.family == "polya_log":
        r = model.params["r"]
        # ln(e^r + r e^r t) = r + log1p(r t), stable for huge t
        out = r / (r + np.log1p(r * at))
    else:
        beta = model.params["beta"]
        # ln(e + (e/beta) t) = 1 + log1p(t / beta)
        out = (1.0 + np.log1p(at / beta)) ** (-beta)
    if np.ndim(t) == 0:
        return float(out)
    return out


def long_range_limit(model: CorrelationModel) -> float:
    """Limit of ``r(t) ln t``: 0, a finite constant, or inf."""
    return model.r_long


def probe_long_range(model: CorrelationModel, ts=LONG_RANGE_PROBES):
    """Numeric values of ``r(t) ln t`` at the probe lags."""
    ts = np.asarray(ts, dtype=float)
    return evaluate(model, ts) * np.log(ts)


@dataclass
class ValidationReport:
    """Outcome of the regime checks for one model/law pair."""

    theorem: str
    checks: list


def _check(checks, name, ok, detail):
    checks.append((name, bool(ok), detail))
    if not ok:
        raise ValidationFailure(f"{name}: {detail}")


def validate_for_theorem(model: CorrelationModel, theorem: str) -> ValidationReport:
    """Check that the model satisfies the hypotheses of the selected law.

    Raises :class:`ValidationFailure` naming the violated condition.  The
    finite-``r`` laws (T21-T23) need ``r(t) ln t`` to converge to a finite
    limit; the strong-dependence law (T24) needs divergence together with
    convexity, decay to zero and eventual monotonicity of ``r(t) ln t``.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    checks = []
    probes = probe_long_range(model)
    if theorem in ("T21", "T22", "T23"):
        _check(checks, "finite_long_range", model.r_long < math.inf,
               f"r(T)ln T -> {model.r_long} not finite")
        if model.r_long > 0:
            rel = abs(probes[-1] - model.r_long) / model.r_long
            _check(checks, "limit_probe", rel <= LIMIT_PROBE_RTOL,
                   f"probe at t={LONG_RANGE_PROBES[-1]:g} off by {rel:.3f}")
        else:
            _check(checks, "limit_probe", probes[-1] <= LIMIT_PROBE_RTOL,
                   f"probe at t={LONG_RANGE_PROBES[-1]:g} is {probes[-1]:.3g}")
        return ValidationReport(theorem, checks)

    # T24: strong dependence with a convex, vanishing correlation
    _check(checks, "infinite_long_range", model.r_long == math.inf,
           f"r(T)ln T -> {model.r_long:g} not inf")
    _check(checks, "alpha_range", model.alpha <= 1.0,
           f"alpha={model.alpha} outside (0, 1]")
    for lo, hi, n in ((0.0, 20.0, 401), (0.0, 2e4, 401)):
        ts = np.linspace(lo, hi, n)
        r = evaluate(model, ts)
        d2 = r[2:] - 2.0 * r[1:-1] + r[:-2]
        _check(checks, "convexity", d2.min() >= -CONVEXITY_SLACK,
               f"second difference {d2.min():.3g} on [{lo:g},{hi:g}]")
    decay = evaluate(model, np.asarray(LONG_RANGE_PROBES))
    _check(checks, "decay_to_zero",
           decay[2] < decay[1] < decay[0] and decay[2] < 0.5,
           f"r at probes {decay.round(4).tolist()}")
    _check(checks, "monotone_r_ln_t", probes[0] < probes[1] < probes[2],
           f"r(t)ln t at probes {probes.round(4).tolist()}")
    return ValidationReport(theorem, checks)


def to_config_dict(model: CorrelationModel) -> dict:
    """Plain key=value representation for the experiment config file."""
    out = {"family": model.family, "alpha": repr(model.alpha)}
    for key, val in model.params.items():
        out[key] = repr(val)
    return out


def from_config_dict(block: dict) -> CorrelationModel:
    """Inverse of :func:`to_config_dict` (extra keys rejected)."""
    data = {k.strip(): v.strip() for k, v in block.items()}
    family = data.pop("family")
    alpha = float(data.pop("alpha", 1.0))
    params = {k: float(v) for k, v in data.items()}
    if family == "exp_alpha":
        if params:
            raise ValueError(f"exp_alpha takes no params, got {sorted(params)}")
        return exp_alpha(alpha)
    if family == "polya_log":
        return polya_log(params["r"])
    if family == "polya_log_infty":
        return polya_log_infty(params["beta"])
    raise ValueError(f"unknown family {family!r}")
