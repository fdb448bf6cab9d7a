"""Collective decay/interaction spectra and the phase-matching condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import CouplingKernels
from .errors import DimensionMismatch
from .fiber_modes import FiberMode
from .geometry import WAVENUMBER, AtomChain, DriveParams, drive_phases


@dataclass(frozen=True)
class CollectiveSpectrum:
    """Eigen-data of Gamma and V.

    gamma_n sorted descending with decay eigenmodes as the rows of D
    (D @ G @ D.conj().T diagonal); v_n sorted ascending with interaction
    eigenmodes as the rows of C.
    """

    gamma_n: np.ndarray
    D: np.ndarray
    v_n: np.ndarray
    C: np.ndarray

    @property
    def n_atoms(self) -> int:
        return len(self.gamma_n)


def _fix_phases(rows: np.ndarray) -> np.ndarray:
    """Rotate each eigenvector so its largest-|.| component is real positive."""
    out = rows.copy()
    for i, row in enumerate(out):
        j = int(np.argmax(np.abs(row)))
        ph = row[j] / abs(row[j]) if row[j] != 0 else 1.0
        out[i] = row / ph
    return out


def _sorted_modes(matrix: np.ndarray, descending: bool, reference=None):
    vals, vecs = np.linalg.eigh(matrix)
    order = np.argsort(vals)
    if descending:
        order = order[::-1]
    vals = vals[order]
    # Rows are conjugated eigenvectors, so sum_j rows[n, j] psi_j is the
    # overlap <mode_n|psi> and rows @ M @ rows.conj().T diagonalizes M.
    rows = vecs.conj().T[order]
    if reference is not None:
        # Stable tie-break inside degenerate clusters: descending overlap
        # with the reference vector.
        i = 0
        scale = max(1.0, float(np.max(np.abs(vals))))
        while i < len(vals):
            j = i + 1
            while j < len(vals) and abs(vals[j] - vals[i]) < 1e-10 * scale:
                j += 1
            if j - i > 1:
                ov = -np.abs(rows[i:j] @ reference)
                rows[i:j] = rows[i:j][np.argsort(ov, kind="stable")]
            i = j
    return vals, _fix_phases(rows)


def decay_spectrum(kernels: CouplingKernels, reference=None) -> CollectiveSpectrum:
    """Hermitian eigendecompositions of Gamma (descending) and V (ascending).

    ``reference`` (e.g. the driven spin wave) breaks ordering ties inside
    degenerate eigenvalue clusters.
    """
    gamma_n, D = _sorted_modes(np.asarray(kernels.G), descending=True, reference=reference)
    v_n, C = _sorted_modes(np.asarray(kernels.V), descending=False, reference=reference)
    return CollectiveSpectrum(gamma_n=gamma_n, D=D, v_n=v_n, C=C)


def spin_wave(chain: AtomChain, drive: DriveParams) -> np.ndarray:
    """Normalized laser-imprinted single-excitation amplitudes psi_j."""
    u = drive_phases(chain, drive)
    return u / np.sqrt(len(u))


def effective_decay_rate(spectrum: CollectiveSpectrum, psi: np.ndarray) -> float:
    """Decay rate of the state psi: sum_n gamma_n |sum_j D_nj psi_j|^2."""
    psi = np.asarray(psi)
    if len(psi) != spectrum.n_atoms:
        raise DimensionMismatch(
            f"psi has length {len(psi)}, spectrum is for {spectrum.n_atoms} atoms"
        )
    overlaps = spectrum.D @ psi
    return float(np.sum(spectrum.gamma_n * np.abs(overlaps) ** 2))


def matching_lattice_constants(
    mode: FiberMode,
    laser_angle: float,
    m_max: int = 3,
    a_range: tuple[float, float] = (0.1, 2.0),
) -> list[float]:
    """Lattice constants a/lambda with constructive guided-mode emission.

    a/lambda = m / (cos(phi) + lambda/lambda_f) for integer m, filtered to
    ``a_range`` (half-open: lo < a <= hi).
    """
    denom = np.cos(laser_angle) + mode.beta_f / WAVENUMBER
    out = []
    for m in range(1, m_max + 1):
        if denom <= 0:
            continue
        a = m / denom
        if a_range[0] < a <= a_range[1]:
            out.append(float(a))
    return out
