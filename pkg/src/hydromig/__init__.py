"""Water-hydrogen two-phase flow in porous media with gas appearance and
disappearance, solved in the persistent variables (p_l, rho_l^h)."""

from .constitutive import RockParams, dpc_dSg, effective_saturation, mobilities, pc
from .fluid import (
    CellState,
    FluidParams,
    SecondaryState,
    a_func,
    a_star,
    capillary_inverse,
    derive_constants,
    saturation_from_state,
    secondary_state,
)

__version__ = "0.1.0"
