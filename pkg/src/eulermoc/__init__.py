"""eulermoc: alternating-envelope vorticity moduli for 2D incompressible flow.

Construction and evaluation of a piecewise-linear concave modulus of
continuity that alternates between two logarithmic envelopes, the
log-domain arithmetic that makes its super-exponentially small node scales
computable, closed-form transport diagnostics, a Biot-Savart quadrature
layer with the near-origin velocity decomposition, a desk-scale vortex-blob
simulator with exact four-fold odd symmetry, and empirical modulus
estimation over simulated fields.
"""

__version__ = "0.1.0"

from .logdomain import f_lower, f_upper, find_root_bracketed, to_direct
from .modulus import PiecewiseModulus, construct
from .flowmodel import (PowerLogModulus, predicted_ratio, propagation_bound,
                        transported_abscissa, yudovich_envelopes)
from .biotsavart import (QuadratureSpec, VorticityOracle, i_c, i_s,
                         velocity_direct, velocity_direct_many)
from .eulersim import (BlobSystem, BumpSpec, ModulusProfile, PowerLogProfile,
                       SimConfig, Tracer, initial_data, run)
from .fieldanalysis import PairSampler, empirical_modulus, modulus_ratio_series

__all__ = [
    "__version__",
    "f_lower", "f_upper", "find_root_bracketed", "to_direct",
    "PiecewiseModulus", "construct",
    "PowerLogModulus", "predicted_ratio", "propagation_bound",
    "transported_abscissa", "yudovich_envelopes",
    "QuadratureSpec", "VorticityOracle", "i_c", "i_s", "velocity_direct",
    "velocity_direct_many",
    "BlobSystem", "BumpSpec", "ModulusProfile", "PowerLogProfile",
    "SimConfig", "Tracer", "initial_data", "run",
    "PairSampler", "empirical_modulus", "modulus_ratio_series",
]
