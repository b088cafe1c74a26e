"""Tail chains of GARCH(1,1) returns and volatility, with extremal-measure estimators."""
from .bftc import (BackwardLaw, BftcSpec, IncrementLaw, TailChainPath, build_adjoint, garch_volatility_spec,
                   point_mass_diagnostic, simulate_bftc, transition_h)
from .counterexample import accumulation_point_experiment, eval_f, verify_pareto_pushforward
from .distributions import (MonotoneCdfTable, ParetoLaw, SignLaw, TiltedInnovationLaw, backward_increment_cdf,
                            build_backward_sampler, sample_pareto, sample_tilted_innovation)
from .errors import (ConsistencyError, InsufficientConditioningError, InsufficientDataError, NoTailIndexError,
                     NumericalError, ParameterError)
from .estimators import (EstimatorReport, ReturnSeries, blocks_estimator, estimate_chi, estimate_gamma,
                         estimate_theta, table1)
from .garch_chain import GarchTailChainSample, chain_algebra_check, sample_garch_tail_chain
from .oracle import ConditionalEmpirics, PathSimConfig, conditional_empirics, simulate_garch_path, tail_index_empirical
from .tail_index import GarchParams, TailIndex, abs_normal_moment, log_drift, solve_tail_index

__version__ = "0.1.0"
