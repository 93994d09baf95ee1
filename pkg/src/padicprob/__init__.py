"""Exact non-Archimedean probability at finite truncation depth.

Measures take values in a p-adic field K_s; state spaces are depth-N
quotients of Z_p.  Everything is computed in exact rational or truncated
s-adic arithmetic — no floats touch any value that matters.
"""

from .clopen import Ball, ClopenSet, DepthSpace, parse_ball, refine
from .errors import PadicProbError
from .markov import (CylinderMeasure, HomogeneousKernel, TransitionKernel,
                     Verdict, boundedness_criterion, build_cylinder,
                     chapman_check, char_functional, convolution_step,
                     functional_integral, increment_independence,
                     projection_consistency, psi_factorization_check,
                     unbounded_witness)
from .measure import (LqWeight, Measure, ProductMeasure, StepFunction, density,
                      haar, integrate, lq_norm, measure_from_text,
                      measure_to_text, normalize_probability, product,
                      product_convergence_probe)
from .poisson import (Configuration, PoissonMeasureTruncated, config_distance,
                      idempotence_check, leaf_distance, levy_psi,
                      levy_semigroup_check, moment_coefficients, number_map,
                      poisson_consistency, poisson_event_check,
                      poisson_event_closed_form, poisson_measure_event,
                      poisson_transition, tuple_distance, tuple_sup_distance)
from .scalar import (DEFAULT_PRECISION, CyclotomicScalar, NormValue,
                     RootOfUnityExponent, ScalarKs, character, cyclo_embed,
                     exp_s, factorial_valuation, frac_part, ord_q)

__version__ = "0.1.0"
