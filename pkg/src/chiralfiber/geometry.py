"""Atom chain, drive parameters and the shared unit conventions.

The chain sits parallel to the fiber axis (z), all atoms in the plane
phi_az = 0.  Site j of the underlying lattice is at z = a*j; voids are
represented by integers missing from ``occupied_sites``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Fixed unit conventions (not configurable).
LAMBDA = 1.0            # transition wavelength, the unit of length
GAMMA = 1.0             # free-space single-atom decay rate, the unit of rate
WAVENUMBER = 2.0 * np.pi / LAMBDA

# Dipole of the working transition, quasi-circular in the (x, z) plane.
CIRCULAR_MINUS = (1.0 / np.sqrt(2.0), 0.0, -1.0j / np.sqrt(2.0))


@dataclass(frozen=True)
class AtomChain:
    """Ordered atom positions along the fiber, in units of lambda."""

    spacing: float                       # nearest-neighbor lattice constant a
    occupied_sites: tuple[int, ...]      # strictly increasing site indices
    surface_distance: float = 0.1        # fiber surface to atom, along x
    dipole: tuple[complex, complex, complex] = field(default=CIRCULAR_MINUS)

    def __post_init__(self):
        sites = tuple(int(s) for s in self.occupied_sites)
        object.__setattr__(self, "occupied_sites", sites)
        if len(sites) < 1:
            raise ValueError("chain needs at least one atom")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError("occupied_sites must be strictly increasing")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.surface_distance < 0:
            raise ValueError("surface_distance must be nonnegative")
        d = np.asarray(self.dipole, dtype=complex)
        norm = np.linalg.norm(d)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("dipole must be a unit vector")

    @classmethod
    def regular(cls, n_atoms: int, spacing: float, **kwargs) -> "AtomChain":
        """Gapless chain of n_atoms sites 0..n_atoms-1."""
        return cls(spacing=spacing, occupied_sites=tuple(range(n_atoms)), **kwargs)

    @property
    def n_atoms(self) -> int:
        return len(self.occupied_sites)

    @property
    def positions(self) -> np.ndarray:
        """Axial positions z_j = a*j of the occupied sites, in lambda."""
        return self.spacing * np.asarray(self.occupied_sites, dtype=float)

    def dipole_vector(self) -> np.ndarray:
        return np.asarray(self.dipole, dtype=complex)


@dataclass(frozen=True)
class DriveParams:
    """Laser drive: Rabi frequency and detuning in gamma, angle in radians."""

    rabi: float
    detuning: float = 0.0
    laser_angle: float = np.pi / 2

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi must be nonnegative")


def drive_phases(chain: AtomChain, drive: DriveParams) -> np.ndarray:
    """Laser phase factors u_j = exp(i k z_j cos(phi)) at the occupied sites.

    The phases are set by the physical positions z_j, not by the index of
    the atom within the chain, so voids shift the phases of everything
    behind them.
    """
    z = chain.positions
    return np.exp(1j * WAVENUMBER * z * np.cos(drive.laser_angle))
