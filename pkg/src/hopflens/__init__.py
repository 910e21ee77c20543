"""Effective geometry and geodesic lensing around a Q=1 Hopf soliton.

The package implements the toroidal chart and torus ansatz for a unit-charge
Hopf soliton, the Riemannian effective metric governing its linearized
excitations, closed-form and finite-difference geodesic equations with an
adaptive RK4 integrator, and declarative ray-bundle experiments with focal
and wavefront diagnostics.
"""

from hopflens.hopf_map import (
    AnsatzConfig,
    ChartDomainError,
    Profile,
    Q1_PROFILE,
    SpherePoint,
    ToroidalPoint,
    ansatz_map,
    cartesian_to_toroidal,
    hopf_charge_whitehead,
    linking_number,
    preimage_curve,
    profile_residual,
    sigma1,
    strain,
    toroidal_to_cartesian,
)
from hopflens.effective_geometry import (
    inv_metric_cartesian,
    inv_metric_toroidal,
    lorentzian_check,
    metric_cartesian,
    principal_symbol,
    ricci_scalar,
    ricci_scalar_numeric,
)
from hopflens.geodesics import (
    GeodesicState,
    IntegratorSettings,
    RayTrajectory,
    integrate,
    normalize_velocity,
    rhs_christoffel,
    rhs_closed_form,
    rk4_step,
)
from hopflens.scenarios import (
    BundleResult,
    ScenarioConfig,
    build_fig2,
    build_fig3,
    build_fig4,
    build_fig5,
    build_fig6,
    build_fig7,
    focal_points,
    run,
    wavefront_measure,
)

__version__ = "0.1.0"

__all__ = [
    "AnsatzConfig", "ChartDomainError", "Profile", "Q1_PROFILE",
    "SpherePoint", "ToroidalPoint", "ansatz_map", "cartesian_to_toroidal",
    "hopf_charge_whitehead", "linking_number", "preimage_curve",
    "profile_residual", "sigma1", "strain", "toroidal_to_cartesian",
    "inv_metric_cartesian", "inv_metric_toroidal", "lorentzian_check",
    "metric_cartesian", "principal_symbol", "ricci_scalar",
    "ricci_scalar_numeric",
    "GeodesicState", "IntegratorSettings", "RayTrajectory", "integrate",
    "normalize_velocity", "rhs_christoffel", "rhs_closed_form", "rk4_step",
    "BundleResult", "ScenarioConfig", "build_fig2", "build_fig3",
    "build_fig4", "build_fig5", "build_fig6", "build_fig7", "focal_points",
    "run", "wavefront_measure",
    "__version__",
]
