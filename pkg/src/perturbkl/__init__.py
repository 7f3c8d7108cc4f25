"""Beta and Dirichlet upper-tail bounds with perturbed KL rate functions."""
from ._accel import NUMBA_ENABLED
from .beta_bounds import (BetaParams, BoundReport, bernstein_bound, bound_report,
                          classic_eta, hoeffding_bound, kl_bound, perturbation_residual,
                          perturbed_kl_bound, s_lower_bounds, s_value)
from .dirichlet_bounds import (BaseMeasure, PerturbationPlan, auto_plan, build_eta,
                               dp_tail_bound, max_perturbation_mass)
from .errors import (DomainError, InvalidSupportError, NoValidPlanError,
                     PerturbationTooLargeError, ValidityError)
from .kinf import (binary_kinf_threshold, kinf, kinf_brute_force, kinf_dual_objective,
                   kinf_solve)
from .mc import (RngStream, TailEstimate, Verdict, estimate_weighted_tail, partition_check,
                 sample_dirichlet, verify_bound)
from .special import (beta_tail_exact, binary_kl, lambert_w0, log_beta_tail_exact,
                      log_gamma)

__version__ = "0.1.0"
