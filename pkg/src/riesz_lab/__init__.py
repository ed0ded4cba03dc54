"""riesz_lab: numerical laboratory for symmetric stable processes and
Riesz potentials of their self-intersection measures.

Modules
-------
stable      symmetric beta-stable path sampling (subordinated CMS draws)
riesz       self- and mutual-intersection Riesz functionals, exact means
renorm      dyadic renormalization of the divergent-mean regime
spectral    smoothed functionals: Fejer-square weights, theta kernels
variational lattice variational problem, rho, and the derived constants
potential   Gaussian random-potential functional driven by the path
mc          replica harness: mergeable estimates, tail curves, KS tests
cli         config-driven experiment runner (`riesz-lab run`)
"""

from .stable import StableParams, StablePath, psi, q_weight, sample_path
from .riesz import (
    Regime,
    RegimeError,
    RieszParams,
    QuadratureSpec,
    classify,
    eta,
    eta_shifted,
    eta_rectangle,
    zeta,
    xi_field,
    xi_l2_integral,
    moment_neg_sigma,
    mean_eta,
    mean_rectangle,
    excluded_band_mean,
    pair_weight_table,
    riesz_composition_constant,
    c_d_sigma,
)

__version__ = "0.1.0"
