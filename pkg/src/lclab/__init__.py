"""Desk-scale laboratory for the large-coupling limit of Schrodinger
operators with a piecewise-constant potential jump across an interface.

Subpackages:

  geometry   domains, interface graph charts, metric data, atlas quadrature
  symbols    characteristic roots and interface operator symbols, class calculus
  torus      discrete Fourier model and measured operator-norm experiments
  grids      finite-difference grids and the transmission-problem operators
  kernels    SPD solves, power iteration, dense symmetric eigensolver
  coupling   the resolvent difference, its decay rate, interface identities
  counting   eigenvalue counting, comparison inequalities, phase-space laws
  runner     experiment orchestration and the ``lclab`` command line
"""

from .errors import (ConfigError, ContractError, ConvergenceError,
                     DegenerateCovectorError, DomainError, InconclusiveError,
                     LabError, ResourceLimitError)
from .geometry import (BoundaryChart, Domain1D, Domain2D, chart_atlas,
                       flat_chart, linear_chart, lipschitz_constant,
                       metric_matrix, surface_density, unit_normal)
from .symbols import (IDENTITY_SYMBOL, ParamSymbol, SymbolClass,
                      characteristic_roots, characteristic_roots_screened,
                      class_membership_estimate, difference_symbol,
                      difference_symbol_expanded, eta_symbol, flat_ntd_symbol,
                      flat_transmission_symbol, make_symbol, ntd_symbol,
                      product_symbol, tau_symbol, transmission_symbol)
from .grids import Grid1D, PolarGrid, SparseOperator, transmission_solve
from .kernels import dense_eigen, loglog_fit, power_iteration_sym, solve_spd
from .coupling import (DifferencePipeline, GreenReport, RateFit,
                       convergence_rate_fit, convergence_rate_fit_exact_1d,
                       counting_zero_threshold, difference_apply,
                       difference_matrix_1d, difference_norm,
                       difference_norm_exact_1d, exterior_gram_1d,
                       green_identity_check, green_test_fields,
                       nonlocal_bc_solve, ntd_matrix_1d)
from .counting import (CountingReport, birman_disk_check,
                       birman_synthetic_check, circle_count_prediction,
                       circle_difference_eigenvalue, circle_model_exponent_fit,
                       counting_circle, counting_function, counting_report,
                       eigen_spectrum, sphere_slice_integral, trace_map_norm,
                       weyl_exponent_fit, weyl_rhs)
from .torus import (SpectralField, TorusGrid, apply_multiplier, apply_psdo,
                    composition_error_experiment, default_composition_symbols,
                    dft, idft, ntd_bound_experiment, operator_bound_experiment,
                    random_field, sobolev_norm)

__version__ = "0.1.0"
