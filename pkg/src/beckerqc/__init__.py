"""Loewner chains, quasiconformal Becker extensions and exterior conformal maps.

The package turns an explicit quasiconformal-extension construction into an
executable pipeline: series models of univalent functions, the
Loewner-Kufarev evolution, the closed-form plane extension with Wirtinger
calculus, Theodorsen-style exterior Riemann maps, a ledger of closed-form
constants, and an end-to-end construction that measures the Becker disk
radius k0 of the glued chain.
"""

from .analytic import (DEFAULT_ORDER, DiskGrid, SchlichtFunction, SigmaFunction,
                       catalog, schwarzian_norm, truncation_certificate)
from .constants import (ConstantsTable, angular_derivative_bound, core_times,
                        curvature_bound, dist_annulus, explicit_constants,
                        henkin_lower_bound, min_angular_derivative_bound,
                        schedule_times, subharmonic_exponent,
                        tangent_disk_radius)
from .construction import (ConstructionReport, ConstructionState, FinalExtension,
                           HerglotzBoundaryTrace, build_state, curve_at,
                           herglotz_boundary, locate_z0, run_construction,
                           subharmonicity_check, tangent_disk_check)
from .extension import (BeltramiSample, PlaneMap, ahlfors_weill_extension,
                        aw_chain, aw_extension_value, becker_extension,
                        beltrami, derivative_bounds_report, dilatation_sweep,
                        second_derivative_bounds_report, wirtinger)
from .exterior import (ExteriorMap, JordanCurve, circle_curve, conjugate_function,
                       ellipse_curve, exterior_map)
from .loewner import (HerglotzField, LoewnerChain, aw_herglotz, aw_herglotz_field,
                      becker_radius, chain_from_herglotz, constant_field,
                      numerical_chain, pde_residual, scaling_chain, slit_field,
                      solve_lk_ode)

__version__ = "0.1.0"
