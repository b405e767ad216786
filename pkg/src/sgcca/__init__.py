"""Sparse generalized canonical correlation analysis with exact l1/l2 block updates."""
from .errors import (BranchConditionError, ConfigError, DataFormatError, DegenerateColumnError,
                     DegenerateInputError, InfeasibleBudgetError, InvalidArgumentError,
                     SGCCAError, UnsupportedSchemeError)
from .norm_geometry import (LmSolution, MaxLevelSet, Variant, find_phi_root, is_feasible,
                            max_level_set, phi, project_l1_ball, project_omega, soft_threshold,
                            solve_lm, solve_lm_p1_plus, solve_lm_p2_plus, solve_lm_p3_plus)
from .model import (BlockSet, CoefState, DesignGraph, Scheme, CENTROID, FACTORIAL, HORST,
                    identity_22_check, inner_components, objective_h, standardize_columns)
from .bcd import BcdConfig, SolverReport, baseline_outer_weight, bcd_sweep, fit_baseline, fit_bcd
from .gp import GpConfig, fit_gp, gradient_h, lipschitz_bound, project_product
from .data_lab import (GenSpec, GroundTruth, design_preset, generate, grid_search, load_blocks,
                       sensitivity, specificity)
from .runner import ALGOS, fit

__version__ = "0.1.0"
