"""Range-control certificates for singular radial potentials and a radial wave solver."""
from .errors import *  # noqa: F401,F403
from .geometry import (
    KINDS, MARKERS, CompletenessReport, InnerTimeChart, RadialPotential, closed_form_tau,
    completeness_report, dual_potential, geometry_profile, invert_many, log_singular_profile,
    r_of_tau, tau_many, tau_of_r, window_profile,
)
from .rcn import (
    RcnCertificate, RcnWindow, SearchConfig, certify_window, delta_bound, example4_layer,
    infinity_layer, log_singular_window, necessary_product, relative_bound, uniform_delta_sweep,
)
from .forms import (
    CutoffFamily, FalsificationReport, TestProfile, alpha_boundary, falsify_nonnegativity,
    falsify_positivity, form_integrals, hardy_check, ims_error, ims_identity, minorant_form_check,
    nonnegativity_check, positivity_check, power_profile, self_adjointness_feasible,
)
from .wave import (
    ConeSpec, Grid, Trajectory, WaveScenario, build_grid, cfl_dt, energy_constant, energy_slice,
    excision_check, gaussian_pulse, run_wave, solve_dirichlet, verify_cone, verify_silo,
)
from .spacetimes import (
    SpacetimeModel, light_cone, origin_taylor_ratio, rn_regime, spacetime_tau, uncertainty,
    uncertainty_minimum,
)

__version__ = "0.1.0"
