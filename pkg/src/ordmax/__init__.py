"""ordmax: joint continuous/grid maxima of Gaussian order-statistics processes.

Simulation of stationary Gaussian order-statistics processes, Monte Carlo
estimation of the excursion-intensity (Pickands-type) constants, evaluation
of the theoretical joint limit laws for the (lattice max, grid max) pair,
and a statistical verification harness.
"""

from .corr_models import (CorrelationModel, evaluate, exp_alpha,
                          long_range_limit, polya_log, polya_log_infty,
                          validate_for_theorem)
from .gp_synth import (CirculantSpectrum, GaussianPath, LatticeSpec,
                       PathSampler, circulant_spectrum, sample_fbm,
                       sample_path, sample_paths)
from .order_stats import GridSpec, MaximaSample, maxima_pair, order_stat_path
from .pickands import (OrthantPointSet, PickandsEstimate, estimate_H,
                       estimate_H_schedule, estimate_slope,
                       orthant_intersection_exp_measure,
                       orthant_union_exp_measure, slope_extrapolate)
from .limitlaw import (LimitLawSpec, NormalizingConstants, limit_cdf,
                       marginal_cdf, norming_constants, tail_probability)
from .compare_bound import (ComparisonInstance, comparison_bound,
                            mc_order_stat_cdf)
from .harness import (EmpiricalJointCDF, ExperimentConfig, ExperimentReport,
                      empirical_joint_cdf, ks_statistic, load_config,
                      run_experiment)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
