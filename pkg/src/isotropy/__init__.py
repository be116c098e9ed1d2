"""Exact and sampled isotropy densities of random quadratic forms over Z_p and Z."""

from .densities import delta_closed, delta_recursive, pi, rho_closed
from .global_density import euler_product, rho_global, rho_infinity_mc
from .qp import ZForm, hilbert_symbol, k_isotropic, mc_rho
from .ratfun import RationalFunction, parse, render

__version__ = "0.1.0"

__all__ = [
    "RationalFunction",
    "parse",
    "render",
    "pi",
    "rho_closed",
    "delta_closed",
    "delta_recursive",
    "ZForm",
    "hilbert_symbol",
    "k_isotropic",
    "mc_rho",
    "euler_product",
    "rho_infinity_mc",
    "rho_global",
]
