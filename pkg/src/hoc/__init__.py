"""Numerical concentration certificates under spectral-gap conditions.

The package turns derivative-norm profiles of polynomial functions into
explicit moment, tail, and exponential-moment certificates, and checks every
certificate against deterministic Monte Carlo ground truth. See the README
for the route taxonomy and the experiment runner.
"""

from .bounds import (Certificate, DerivativeProfile, MissingHypothesisError,
                     MissingNormError, WeightedProfile, derivative_tail_bound,
                     exp_moment_certificate, gradient_moment_bound,
                     iterated_moment_bound, moment_certificate,
                     multilinear_certificates, normalized_moment_cap,
                     profile_from_function, subexponential_constant,
                     tail_certificate, weighted_moment_bounds,
                     weighted_moment_certificate, weighted_tail_bound,
                     weighted_tail_certificate)
from .kernels import BACKEND
from .measures import (CATALOG, CoordinateDist, GapResult, MeasureSpec,
                       UncertifiedConstantError, WeightSpec, catalog_oracle,
                       coordinate_moment, coordinate_sigma2, poincare_constant,
                       sample, spectral_gap_oracle, student_weight_kappa,
                       student_weight_norm, weighted_norm)
from .polynomials import (MultilinearSpec, PolyFunction, from_multilinear,
                          opnorm_gradient_check)
from .rmt import (Calibration, EigenSample, WignerEnsemble, calibrate,
                  jacobi_eigenvalues, linear_stat, recentered_stat,
                  rmt_certificates, sample_ensemble)
from .tensors import SymTensor, UnsupportedSizeError
from .verify import (EmpiricalReport, check_certificate, check_exp_certificate,
                     check_moment_bound, check_tail_certificate, empirical_lp,
                     empirical_tail, wilson_interval)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
