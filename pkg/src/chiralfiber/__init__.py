"""Laser-driven atom chains chirally coupled to a single-mode nanofiber.

Units throughout the package: the transition wavelength lambda is the unit
of length, the free-space single-atom decay rate gamma is the unit of rate,
hbar = 1 and time is measured in 1/gamma.
"""

from .geometry import AtomChain, DriveParams, drive_phases
from .fiber_modes import FiberSpec, FiberMode, solve_he11, single_atom_guided_rates
from .couplings import CouplingKernels, assemble
from .spectral import CollectiveSpectrum, decay_spectrum, spin_wave, effective_decay_rate
from .lindblad import Register, build_liouvillian, steady_state

__version__ = "0.1.0"

__all__ = [
    "AtomChain",
    "DriveParams",
    "drive_phases",
    "FiberSpec",
    "FiberMode",
    "solve_he11",
    "single_atom_guided_rates",
    "CouplingKernels",
    "assemble",
    "CollectiveSpectrum",
    "decay_spectrum",
    "spin_wave",
    "effective_decay_rate",
    "Register",
    "build_liouvillian",
    "steady_state",
    "__version__",
]
