"""Sparse identification of 1-D PDEs from noisy lattice data.

Stage 1 estimates u, u_x, u_xx and u_t with penalised cubic smoothing
splines (banded solves, linear cost). Stage 2 selects dictionary terms by
lasso coordinate descent.
"""

from .types import DerivativeEstimates, Field, Grid1D, TermLabel, enumerate_terms
from .spline import build_spline_system, default_alpha, estimate_derivatives, fit_slice
from .dictionary import Dictionary, build_dictionary, descale_coefficients
from .lasso import (ConditionReport, IdentifiedModel, LassoConfig, coordinate_descent,
                    diagnose_conditions, lambda_max, refit_ols, solution_path)
from .simulate import NoiseSpec, PdeSpec, add_noise, simulate_field

__version__ = "0.1.0"
