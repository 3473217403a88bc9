"""ckn-lab: numerics for subcritical Caffarelli-Kohn-Nirenberg inequalities.

Submodules:
    params     parameter cone, cylinder map, derived exponents
    symmetry   region classification, Felli-Schneider thresholds, spectral gap
    radial     profiles, weighted norms, optimal constants, shooting
    spectral   Rayleigh quotients and the quadratic form of the second variation
    flow       weighted fast-diffusion flow with entropy-power diagnostics
    cylinder   Emden-Fowler transform and asymptotic rate checks
    cli        command-line front end
"""

__version__ = "0.1.0"

from . import cylinder, errors, flow, params, quadrature, radial, spectral, symmetry

__all__ = [
    "cylinder", "errors", "flow", "params", "quadrature", "radial",
    "spectral", "symmetry", "__version__",
]
