"""Coherent (V) and dissipative (Gamma) coupling kernels of the chain.

The guided right/left kernels are the closed-form Markovian result for a
linear-dispersion single-mode 1D continuum: all-to-all phases exp(i beta_f z)
with a sgn() coherent part.  The unguided channel uses the free-space
dipole-dipole kernel evaluated on the chain axis, with the diagonal pinned
to the free-space rate gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentAtoms, HermiticityViolation, PSDViolation
from .fiber_modes import FiberMode
from .geometry import GAMMA, WAVENUMBER, AtomChain

_HERM_TOL = 1e-12
_PSD_TOL = 1e-10


@dataclass(frozen=True)
class CouplingKernels:
    """R/L/unguided decomposition of V and Gamma, all N x N, rates in gamma."""

    V_R: np.ndarray
    V_L: np.ndarray
    V_u: np.ndarray
    G_R: np.ndarray
    G_L: np.ndarray
    G_u: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return self.V_R + self.V_L + self.V_u

    @property
    def G(self) -> np.ndarray:
        return self.G_R + self.G_L + self.G_u

    @property
    def n_atoms(self) -> int:
        return self.G_u.shape[0]

    @property
    def total_single_rate(self) -> float:
        """Gamma_tot = gamma + Gamma_R1 + Gamma_L1 (homogeneous chain)."""
        return float(np.real(self.G[0, 0]))


def build_guided_kernels(
    chain: AtomChain, mode: FiberMode, rates: tuple[float, float]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Guided-mode kernels (V_R, G_R, V_L, G_L) from the single-atom rates.

    G_R[i,j] = Gamma_R1 exp(i beta_f (z_j - z_i)) and
    V_R[i,j] = -(i/2) Gamma_R1 sgn(z_i - z_j) exp(i beta_f (z_j - z_i));
    the L kernels have beta_f -> -beta_f and the sgn argument reversed.
    Guided self-shifts are absorbed into the transition frequency, so the
    V diagonals vanish (sgn(0) = 0).
    """
    gamma_r1, gamma_l1 = rates
    if gamma_r1 < 0 or gamma_l1 < 0:
        raise ValueError("guided rates must be nonnegative")
    z = chain.positions
    dz = z[None, :] - z[:, None]              # z_j - z_i
    sgn = np.sign(-dz)                        # sgn(z_i - z_j)
    phase_r = np.exp(1j * mode.beta_f * dz)
    phase_l = np.exp(-1j * mode.beta_f * dz)
    G_R = gamma_r1 * phase_r
    G_L = gamma_l1 * phase_l
    V_R = -0.5j * gamma_r1 * sgn * phase_r
    V_L = -0.5j * gamma_l1 * (-sgn) * phase_l
    return V_R, G_R, V_L, G_L


def _free_space_kernel(xi: np.ndarray, w_par: float) -> np.ndarray:
    """K(xi) = V_u - (i/2) G_u for separation xi = k|z_i - z_j| on the axis.

    Standard free-space dyadic contraction with transverse weight 1 - w_par
    and longitudinal weight w_par = |d_hat . z_hat|^2; for the circular
    dipole (1,0,-i)/sqrt(2) this reduces to
    -(3 gamma / 8 xi) e^{i xi} (1 - i/xi + 1/xi^2).
    """
    w_perp = 1.0 - w_par
    transverse = 1.0 + 1j / xi - 1.0 / xi**2
    longitudinal = -2.0j / xi + 2.0 / xi**2
    return -(3.0 * GAMMA / 4.0) * np.exp(1j * xi) / xi * (
        w_perp * transverse + w_par * longitudinal
    )


def build_unguided_kernel(chain: AtomChain, dipole=None) -> tuple[np.ndarray, np.ndarray]:
    """Free-space substitute (V_u, G_u) for the radiation continuum.

    Off-diagonals from the axis dipole-dipole kernel, diagonal G_u[i,i]
    pinned to gamma and V_u[i,i] = 0.
    """
    d = np.asarray(chain.dipole if dipole is None else dipole, dtype=complex)
    w_par = float(abs(d[2]) ** 2)
    z = chain.positions
    n = len(z)
    dz = np.abs(z[None, :] - z[:, None])
    if np.any(dz[~np.eye(n, dtype=bool)] < 1e-9):
        raise CoincidentAtoms("two occupied sites coincide")
    xi = WAVENUMBER * dz + np.eye(n)  # dummy 1 on the diagonal, overwritten
    K = _free_space_kernel(xi, w_par)
    V_u = np.real(K)
    G_u = -2.0 * np.imag(K)
    np.fill_diagonal(V_u, 0.0)
    np.fill_diagonal(G_u, GAMMA)
    return V_u.astype(complex), G_u.astype(complex)


def _check_hermitian(name: str, m: np.ndarray) -> None:
    err = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if err > _HERM_TOL:
        raise HermiticityViolation(f"{name} deviates from Hermitian by {err:.3e}")


def _check_psd(name: str, m: np.ndarray) -> None:
    lo = float(np.min(np.linalg.eigvalsh(m)))
    if lo < -_PSD_TOL:
        raise PSDViolation(f"{name} has eigenvalue {lo:.3e} below -{_PSD_TOL}")


def assemble(
    chain: AtomChain,
    mode: FiberMode,
    rates: tuple[float, float],
    dipole=None,
) -> CouplingKernels:
    """Build, validate and bundle all six kernels.

    Fails loudly (HermiticityViolation / PSDViolation) rather than
    symmetrizing silently.
    """
    V_R, G_R, V_L, G_L = build_guided_kernels(chain, mode, rates)
    V_u, G_u = build_unguided_kernel(chain, dipole)
    kernels = CouplingKernels(V_R=V_R, V_L=V_L, V_u=V_u, G_R=G_R, G_L=G_L, G_u=G_u)
    for name, m in (
        ("V_R", V_R), ("V_L", V_L), ("V_u", V_u),
        ("G_R", G_R), ("G_L", G_L), ("G_u", G_u),
    ):
        _check_hermitian(name, m)
    for name, m in (("G_R", G_R), ("G_L", G_L), ("G_u", G_u)):
        _check_psd(name, m)
    return kernels
