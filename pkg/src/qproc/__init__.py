"""Exact and Monte Carlo tools for empirical quantile processes in L1(0,1).

The package provides the pieces needed to study, at desk scale, when the
scaled difference between an empirical quantile function and its population
counterpart settles into a Brownian-bridge limit law: piecewise-monotone
cdf/quantile representations with exact generalized inverses, measures
generated by monotone functions, a distribution catalog spanning every
regularity regime, exact L1 distances between empirical and true functions,
bridge-path functionals, derivative checks for the inverse map, and a
deterministic replication/bootstrap engine.
"""

__version__ = "0.1.0"

from .geninv import (PiecewiseMonotone, Segment, SupportBounds, closed_segment,
                     const_segment, eval_cdf, eval_quantile, gen_inverse,
                     linear_segment, make_cdf, make_quantile, support_bounds)
from .lsint import (Atom, LsMeasure, PropertyQReport, ls_integrate, measure_of,
                    property_q_check, qmoment)
from .zoo import (DistSpec, Distribution, make_distribution, parse_spec, sample)
from .empirics import (EmpiricalData, empirical_cdf, empirical_quantile,
                       interval_integral, l1_cdf_distance, l1_quantile_distance,
                       l1_quantile_statistic, sup_cdf_distance, zeta_statistic)
from .bridge import (BridgePath, LimitFunctionalSample, bridge_dq_integral,
                     bridge_signed_dq_integral, default_grid,
                     limit_functional_samples, sample_bridge)
from .hadamard import (ModifiedCdf, StepFunction, TangentDirection,
                       derivative_along, direction_from_g, fd_derivative_error,
                       gq_norm, lipschitz_check, perturb_identity_residual,
                       perturbed_inverse, step_composition_norm)
from .functionals import Functional, parse_functional
from .mc import (BootstrapConfig, BootstrapWeights, ExperimentConfig, McSummary,
                 SecondMomentReport, bootstrap_quantile, bridge_l1_sample,
                 efron_weights, ks_two_sample, run_bootstrap, run_replications,
                 second_moment_check)
from .rng import Stream, mix
from . import errors
