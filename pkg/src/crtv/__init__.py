"""Nonconforming finite-element laboratory for total-variation regularized denoising.

Builds dyadic triangulations of the square, discretizes the
Rudin-Osher-Fatemi model with Crouzeix-Raviart elements, minimizes it by a
semi-implicit gradient flow, and measures convergence rates and
dual-interpolant admissibility for benchmark problems with known singular
dual solutions.
"""

from .analysis import (RateTable, case_classifier, classify_benchmark_elements,
                       cut_element_interpolant, eoc, fit_decay_exponent,
                       interp_sup_norm, midpoint_error_sq, unit_excess)
from .benchmarks import (BenchmarkSpec, data_g, dual_divergence, exact_dual,
                         exact_primal, jump_lines, one_sided_dual,
                         optimality_residual)
from .fespace import (CrFunction, P0Function, Rt0Field, cr_gradient, cr_interpolate,
                      cr_mass_diagonal, cr_stiffness, fidelity_load, fidelity_matrix,
                      p0_project, rt_interpolate)
from .flow import (FlowConfig, FlowError, FlowTrace, data_initial_iterate,
                   flow_run, flow_step)
from .linalg import (CgError, CgResult, SparseMatrix, SparseMatrixBuilder,
                     SparseSystem, cg_solve)
from .mesh import (Mesh, barycenter, element_diameter, initial_square_mesh,
                   red_refine, refined_square_mesh, side_midpoint, side_normal)
from .quadrature import (JumpLine, clip_side_fraction, side_average,
                         triangle_integral)
from .rof import (INFEASIBLE, DualReconstruction, RofProblem, coercivity_check,
                  dual_energy, dual_reconstruction, duality_gap, feasible_rescaling,
                  primal_energy, reg_modulus)

__version__ = "0.1.0"
