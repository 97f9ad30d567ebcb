"""Full-order benchmark models and the stiff time integrator."""

from .base import OdeSystem
from .ferro import (EwaveConfig, FerroConfig, applied_potential,
                    butler_volmer_rate, diffusion_layer_thickness, ferro_build)
from .fhn import FhnConfig, fhn_build, fhn_input, fhn_uniform_equilibrium
from .solver import IntegrationError, integrate, output_times

__all__ = [
    "OdeSystem",
    "FhnConfig", "fhn_build", "fhn_input", "fhn_uniform_equilibrium",
    "FerroConfig", "EwaveConfig", "ferro_build", "butler_volmer_rate",
    "diffusion_layer_thickness", "applied_potential",
    "IntegrationError", "integrate", "output_times",
]
