"""Isogeometric Poisson solver on unions of ordered, overlapping spline patches.

Patches are coupled weakly by Nitsche's method; interface fluxes evaluated on
badly cut elements are replaced by polynomial extensions from good
neighbours. ``BACKEND`` names the active spline kernel (``'cython'`` or
``'python'``).
"""
from .assembly import (LinearSystem, ProblemSpec, TrimmedDirichletError, assemble_system,
                       export_matrix, read_matrix)
from .fixtures import Problem, load_config
from .geometry import BoundaryCurve, invert_point, inverter
from .kernels import BACKEND
from .linsolve import SolverError, estimate_condition, pcg_solve
from .multimesh import (InterfacePreimageError, MultiPatchUnion, build_cut_quadrature,
                        build_interface_mesh, check_assumptions, classify_elements, dump_svg)
from .solutions import ManufacturedSolution, get_solution
from .splines import KnotVector, SplinePatch, TensorBasis, h_refine, map_point
from .stabilization import (IllConditionedProjectionError, IsolatedBadElementError,
                            Stabilizer, classify_good_bad, find_good_neighbor)
from .study import (error_norms, rates, run_conditioning_study, run_convergence_study, solve,
                    write_csv)

__all__ = [
    'BACKEND', 'BoundaryCurve', 'IllConditionedProjectionError', 'InterfacePreimageError',
    'IsolatedBadElementError', 'KnotVector', 'LinearSystem', 'ManufacturedSolution',
    'MultiPatchUnion', 'Problem', 'ProblemSpec', 'SolverError', 'SplinePatch', 'Stabilizer',
    'TensorBasis', 'TrimmedDirichletError', 'assemble_system', 'build_cut_quadrature',
    'build_interface_mesh', 'check_assumptions', 'classify_elements', 'classify_good_bad',
    'dump_svg', 'error_norms', 'estimate_condition', 'export_matrix', 'find_good_neighbor',
    'get_solution', 'h_refine', 'invert_point', 'inverter', 'load_config', 'map_point',
    'pcg_solve', 'rates', 'read_matrix', 'run_conditioning_study', 'run_convergence_study',
    'solve', 'write_csv',
]
