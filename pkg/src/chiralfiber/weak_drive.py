"""Single-excitation (linear response) steady state and the emission line.

Valid to first order in the Rabi frequency; scales to hundreds of atoms
because only an N x N linear system is solved per detuning.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .couplings import CouplingKernels
from .errors import SingularSystem
from .geometry import AtomChain, DriveParams, drive_phases

# Condition number above which the effective matrix is flagged as singular
# rather than silently regularized.
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class LineScan:
    """Fluorescence excitation line over a detuning grid.

    ``rates`` is Gamma_R in units of Omega^2/gamma (the paper's
    normalization); ``rates_gamma`` carries the same curve in raw gamma
    units.  The companion channels and the derived beta/chirality curves
    share the grid.
    """

    detunings: np.ndarray
    rates: np.ndarray
    rates_gamma: np.ndarray
    rates_left: np.ndarray
    rates_unguided: np.ndarray
    beta: np.ndarray
    chi: np.ndarray
    splitting: float | None

    def __post_init__(self):
        if np.any(np.diff(self.detunings) <= 0):
            raise ValueError("detuning grid must be strictly increasing")


def steady_amplitudes(
    kernels: CouplingKernels, chain: AtomChain, drive: DriveParams
) -> np.ndarray:
    """First-order stationary coherences c_j.

    Solves [(Delta + i Gamma_tot/2) delta_ij - V_ij + (i/2) Gamma_ij(i != j)] c = -Omega u,
    which is the single-excitation limit of the full master equation (the
    overall sign convention is pinned by the cross-check against the
    Lindblad solver; all observables are quadratic in c).
    """
    n = kernels.n_atoms
    u = drive_phases(chain, drive)
    m = drive.detuning * np.eye(n) - kernels.V + 0.5j * kernels.G
    if np.linalg.cond(m) > _COND_LIMIT:
        raise SingularSystem("weak-drive system is numerically singular")
    return np.linalg.solve(m, -drive.rabi * u)


def emission_rates(kernels: CouplingKernels, c: np.ndarray) -> tuple[float, float, float]:
    """(Gamma_R, Gamma_L, Gamma_u) for coherence vector c, in gamma units."""
    out = []
    for g in (kernels.G_R, kernels.G_L, kernels.G_u):
        out.append(float(np.real(np.sum(g * np.outer(np.conj(c), c)))))
    return tuple(out)


def emission_line(
    kernels: CouplingKernels,
    chain: AtomChain,
    drive: DriveParams,
    detunings: np.ndarray | None = None,
) -> LineScan:
    """Gamma_R(Delta) and companions over a detuning grid.

    The default grid has 2001 points spanning +-max(10, 1.5 max|v_n|) so
    the window tracks the interaction-shifted peaks as N grows.
    """
    if detunings is None:
        v_n = np.linalg.eigvalsh(kernels.V)
        half = max(10.0, 1.5 * float(np.max(np.abs(v_n))))
        detunings = np.linspace(-half, half, 2001)
    detunings = np.asarray(detunings, dtype=float)

    n_pts = len(detunings)
    g_r = np.empty(n_pts)
    g_l = np.empty(n_pts)
    g_u = np.empty(n_pts)
    for i, delta in enumerate(detunings):
        c = steady_amplitudes(kernels, chain, DriveParams(drive.rabi, delta, drive.laser_angle))
        g_r[i], g_l[i], g_u[i] = emission_rates(kernels, c)
    guided = g_r + g_l
    total = guided + g_u
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = np.where(total > 0, guided / total, 0.0)
        chi = np.where(guided > 0, (g_r - g_l) / guided, 0.0)
    scan = LineScan(
        detunings=detunings,
        rates=g_r / drive.rabi**2,
        rates_gamma=g_r,
        rates_left=g_l,
        rates_unguided=g_u,
        beta=beta,
        chi=chi,
        splitting=None,
    )
    return replace(scan, splitting=line_splitting(scan))


def _refine_peak(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Quadratic refinement of a discrete local maximum at index i."""
    if i == 0 or i == len(x) - 1:
        return float(x[i]), float(y[i])
    x0, x1, x2 = x[i - 1 : i + 2]
    y0, y1, y2 = y[i - 1 : i + 2]
    denom = (y0 - 2.0 * y1 + y2)
    if denom >= 0:
        return float(x1), float(y1)
    shift = 0.5 * (y0 - y2) / denom
    xp = x1 + shift * (x1 - x0)
    yp = y1 - 0.25 * (y0 - y2) * shift
    return float(xp), float(yp)


def line_splitting(scan: LineScan) -> float | None:
    """Distance between the two highest local maxima, or None if single-peaked."""
    y = scan.rates_gamma
    x = scan.detunings
    idx = [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    if len(idx) < 2:
        return None
    peaks = sorted((_refine_peak(x, y, i) for i in idx), key=lambda p: p[1], reverse=True)
    return abs(peaks[0][0] - peaks[1][0])
