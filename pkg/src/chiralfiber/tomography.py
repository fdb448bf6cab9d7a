"""Photocurrent statistics of the right-guided output and Wigner reconstruction.

Pipeline: bias the master-equation generator with a counting field s
conjugate to the time-integrated homodyne quadrature at angle alpha, read
off the scaled cumulant generating function theta(s) from the leading
eigenvalue, Legendre-transform to the rate function, collect the marginals
over a grid of angles (a sinogram), and invert the Radon transform by
filtered backprojection to get the Wigner distribution of the quadrature
activities and its negativity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .couplings import CouplingKernels
from .errors import (
    BoundaryMassWarning,
    InsufficientAngles,
    NonConvergence,
    NonConvexInput,
)
from .fiber_modes import FiberMode
from .geometry import AtomChain
from .lindblad import Liouvillian, Register

_DENSE_EIG_CAP = 400          # generator dimension below which dense eig is used
_CONVEXITY_TOL = 1e-8


@dataclass
class TomographyGrids:
    """Default grids; the s range auto-expands until the marginals decay."""

    n_angles: int = 64
    s_max: float = 12.0
    s_points: int = 121
    x_points: int = 257
    wigner_points: int = 257
    hann_fraction: float = 0.8
    integration_time: float = 1.0


def right_jump_operator(
    kernels: CouplingKernels, chain: AtomChain, mode: FiberMode
) -> sp.csr_matrix:
    """Collective jump operator of the right-propagating guided mode.

    J_R = sum_j sqrt(Gamma^R_jj) e^{+i beta_f z_j} sigma_j; the phase sign
    matches the right-kernel convention so that J_R^dag J_R contracts to
    Gamma^R_ij and a phase-matched spin wave adds coherently.
    """
    reg = Register(chain.n_atoms)
    z = chain.positions
    diag = np.real(np.diag(np.asarray(kernels.G_R)))
    op = sp.csr_matrix((reg.dim, reg.dim), dtype=complex)
    for j in range(chain.n_atoms):
        op = op + np.sqrt(diag[j]) * np.exp(1j * mode.beta_f * z[j]) * reg.lowering(j)
    return op.tocsr()


def _deformation_parts(L: Liouvillian, jump: sp.csr_matrix):
    eye = sp.identity(L.dim, format="csr", dtype=complex)
    left = sp.kron(eye, jump).tocsr()          # J_R rho
    right = sp.kron(jump.conj(), eye).tocsr()  # rho J_R^dag
    return left, right


def deform(L: Liouvillian, jump: sp.csr_matrix, alpha: float, s: float) -> sp.csr_matrix:
    """Biased generator; s = 0 returns the base generator unchanged."""
    if s == 0.0:
        return L.matrix
    left, right = _deformation_parts(L, jump)
    dim2 = L.dim**2
    return (
        L.matrix
        - 0.5 * s * (np.exp(-1j * alpha) * left + np.exp(1j * alpha) * right)
        + (s**2 / 8.0) * sp.identity(dim2, format="csr", dtype=complex)
    ).tocsr()


@dataclass
class ScgfCurve:
    """theta(s) samples for one quadrature angle."""

    angle: float
    s: np.ndarray
    theta: np.ndarray
    converged: np.ndarray

    def convexity_violation(self) -> float:
        """Worst negative discrete second difference (0 if convex)."""
        d2 = np.diff(self.theta, 2)
        return float(max(0.0, -np.min(d2))) if len(d2) else 0.0


def _leading_eigenvalue(matrix: sp.csr_matrix, v0: np.ndarray | None):
    """Eigenvalue of largest real part; returns (value, vector, ok)."""
    dim = matrix.shape[0]
    if dim <= _DENSE_EIG_CAP:
        vals, vecs = np.linalg.eig(matrix.toarray())
        idx = int(np.argmax(vals.real))
        return vals[idx], vecs[:, idx], True
    try:
        vals, vecs = spla.eigs(matrix, k=1, which="LR", v0=v0, maxiter=10000)
        return vals[0], vecs[:, 0], True
    except (spla.ArpackNoConvergence, RuntimeError):
        return np.nan + 0j, None, False


def scgf(
    L: Liouvillian,
    jump: sp.csr_matrix,
    alpha: float,
    s_grid: np.ndarray,
    rng: np.random.Generator | None = None,
) -> ScgfCurve:
    """theta(s) over the grid, warm-starting the eigenvector along s.

    The grid must include s = 0.  Non-converged points are flagged instead
    of raising; theta there is NaN.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if not np.any(s_grid == 0.0):
        raise ValueError("s grid must include 0")
    left, right = _deformation_parts(L, jump)
    dim2 = L.dim**2
    eye = sp.identity(dim2, format="csr", dtype=complex)

    theta = np.full(len(s_grid), np.nan)
    converged = np.zeros(len(s_grid), dtype=bool)
    order = np.argsort(np.abs(s_grid), kind="stable")
    v_last: dict[int, np.ndarray | None] = {+1: None, -1: None}
    if rng is not None and dim2 > _DENSE_EIG_CAP:
        v_last = {+1: rng.standard_normal(dim2), -1: rng.standard_normal(dim2)}
    for idx in order:
        s = s_grid[idx]
        mat = (
            L.matrix
            - 0.5 * s * (np.exp(-1j * alpha) * left + np.exp(1j * alpha) * right)
            + (s**2 / 8.0) * eye
        ).tocsr()
        branch = +1 if s >= 0 else -1
        val, vec, ok = _leading_eigenvalue(mat, v_last[branch])
        if ok:
            theta[idx] = val.real
            converged[idx] = True
            if vec is not None:
                v_last[branch] = vec
    return ScgfCurve(angle=alpha, s=s_grid, theta=theta, converged=converged)


@dataclass
class Marginal:
    """Normalized stationary photocurrent density at one quadrature angle."""

    angle: float
    x: np.ndarray
    density: np.ndarray
    phi_rate: np.ndarray = field(default=None, repr=False)

    @property
    def mean(self) -> float:
        return float(np.trapezoid(self.x * self.density, self.x))

    @property
    def std(self) -> float:
        m = self.mean
        return float(np.sqrt(np.trapezoid((self.x - m) ** 2 * self.density, self.x)))


def _lower_hull(s: np.ndarray, theta: np.ndarray):
    """Indices of the lower convex hull of the (s, theta) samples."""
    keep: list[int] = []
    for i in range(len(s)):
        while len(keep) >= 2:
            i0, i1 = keep[-2], keep[-1]
            cross = (s[i1] - s[i0]) * (theta[i] - theta[i0]) - (
                s[i] - s[i0]
            ) * (theta[i1] - theta[i0])
            if cross <= 0:
                keep.pop()
            else:
                break
        keep.append(i)
    return np.array(keep)


def rate_function(
    curve: ScgfCurve, x_grid: np.ndarray, integration_time: float = 1.0
) -> Marginal:
    """Legendre-Fenchel transform phi(x) = -min_s [theta(s) + x s], then
    the normalized marginal Pi ~ exp(-t phi(x)).

    Tiny eigenvalue-noise non-convexities are removed by a convex-hull
    pass; violations beyond tolerance raise NonConvexInput.
    """
    mask = curve.converged & np.isfinite(curve.theta)
    s = curve.s[mask]
    theta = curve.theta[mask]
    if len(s) < 3:
        raise NonConvergence("too few converged SCGF points")
    violation = curve.convexity_violation()
    scale = max(1.0, float(np.max(np.abs(theta))))
    if violation > 1e-6 * scale:
        raise NonConvexInput(f"convexity violated by {violation:.3e}")
    hull = _lower_hull(s, theta)
    s, theta = s[hull], theta[hull]

    x_grid = np.asarray(x_grid, dtype=float)
    vals = theta[None, :] + x_grid[:, None] * s[None, :]
    arg = np.argmin(vals, axis=1)
    phi = -vals[np.arange(len(x_grid)), arg]
    # Quadratic refinement around the interior discrete minimizers.
    for i, j in enumerate(arg):
        if 0 < j < len(s) - 1:
            y0, y1, y2 = vals[i, j - 1 : j + 2]
            denom = y0 - 2.0 * y1 + y2
            if denom > 0:
                shift = 0.5 * (y0 - y2) / denom
                shift = np.clip(shift, -1.0, 1.0)
                phi[i] = -(y1 - 0.25 * (y0 - y2) * shift)
    phi = phi - np.min(phi)
    density = np.exp(-integration_time * phi)
    norm = np.trapezoid(density, x_grid)
    return Marginal(angle=curve.angle, x=x_grid, density=density / norm, phi_rate=phi)


def _interior_slopes(curve: ScgfCurve) -> np.ndarray:
    mask = curve.converged & np.isfinite(curve.theta)
    s, theta = curve.s[mask], curve.theta[mask]
    hull = _lower_hull(s, theta)
    return np.diff(theta[hull]) / np.diff(s[hull])


@dataclass
class Sinogram:
    """Marginals over a uniform angle grid plus the mean-consistency stat."""

    marginals: list[Marginal]
    mean_x: float
    mean_p: float
    mean_residual: float

    @property
    def angles(self) -> np.ndarray:
        return np.array([m.angle for m in self.marginals])

    @property
    def x(self) -> np.ndarray:
        return self.marginals[0].x


def _fit_means(angles: np.ndarray, means: np.ndarray):
    basis = np.column_stack([np.cos(angles), np.sin(angles)])
    coef, *_ = np.linalg.lstsq(basis, means, rcond=None)
    residual = float(np.max(np.abs(means - basis @ coef)))
    return float(coef[0]), float(coef[1]), residual


def sinogram(
    L: Liouvillian,
    jump: sp.csr_matrix,
    grids: TomographyGrids | None = None,
    rng: np.random.Generator | None = None,
) -> Sinogram:
    """Compute theta curves and marginals for all angles on a common x grid.

    The s range is widened (up to 6 doubling-and-a-half steps) until the
    marginal density at the x-grid edges falls below 1e-8 of its peak for
    every angle.
    """
    grids = grids or TomographyGrids()
    angles = np.linspace(0.0, np.pi, grids.n_angles, endpoint=False)

    s_max, s_points = grids.s_max, grids.s_points
    for _ in range(6):
        s_grid = np.linspace(-s_max, s_max, s_points)
        if not np.any(s_grid == 0.0):  # keep 0 on the grid for odd/even counts
            s_grid = np.unique(np.concatenate([s_grid, [0.0]]))
        curves = [scgf(L, jump, a, s_grid, rng=rng) for a in angles]
        # Support of the marginals from the hull slopes: x = -theta'(s).
        lo = min(float(np.min(-_interior_slopes(c))) for c in curves)
        hi = max(float(np.max(-_interior_slopes(c))) for c in curves)
        half = 1.05 * max(abs(lo), abs(hi))
        x_grid = np.linspace(-half, half, grids.x_points)
        marginals = [
            rate_function(c, x_grid, integration_time=grids.integration_time)
            for c in curves
        ]
        edge = max(
            max(m.density[0], m.density[-1]) / np.max(m.density) for m in marginals
        )
        if edge < 1e-8:
            break
        s_max *= 1.5
        s_points = int(s_points * 1.5) | 1
    means = np.array([m.mean for m in marginals])
    mean_x, mean_p, resid = _fit_means(np.array([m.angle for m in marginals]), means)
    return Sinogram(marginals=marginals, mean_x=mean_x, mean_p=mean_p, mean_residual=resid)


@dataclass
class WignerResult:
    """Reconstructed Wigner distribution on a square grid."""

    x: np.ndarray
    p: np.ndarray
    W: np.ndarray           # W[i, j] = W(x_i, p_j)
    negativity: float
    raw_integral: float
    metadata: dict = field(default_factory=dict)


def _ramp_filter(n_padded: int, dx: float, hann_fraction: float) -> np.ndarray:
    freqs = np.fft.fftfreq(n_padded, d=dx)
    ramp = np.abs(freqs)
    f_cut = hann_fraction * 0.5 / dx
    window = np.where(
        np.abs(freqs) <= f_cut, 0.5 * (1.0 + np.cos(np.pi * freqs / f_cut)), 0.0
    )
    return ramp * window


def invert_radon(
    marginals: list[Marginal],
    wigner_points: int = 257,
    hann_fraction: float = 0.8,
) -> WignerResult:
    """Filtered backprojection of the sinogram onto a square (x, p) grid."""
    if len(marginals) < 16:
        raise InsufficientAngles(f"{len(marginals)} angles < 16")
    x = marginals[0].x
    for m in marginals[1:]:
        if len(m.x) != len(x) or not np.allclose(m.x, x):
            raise ValueError("marginals must share a common x grid")
    dx = x[1] - x[0]
    n = len(x)
    # Heavy zero padding keeps the 1/t^2 tails of the filtered projection
    # from wrapping around (circular convolution); with 4x padding the
    # wrap-around alone costs ~1e-2 of spurious negativity.
    n_pad = 1 << int(np.ceil(np.log2(16 * n)))
    filt = _ramp_filter(n_pad, dx, hann_fraction)
    offset = (n_pad - n) // 2
    t_ext = x[0] + (np.arange(n_pad) - offset) * dx

    grid = np.linspace(x[0], x[-1], wigner_points)
    X, P = np.meshgrid(grid, grid, indexing="ij")
    W = np.zeros_like(X)
    for m in marginals:
        padded = np.zeros(n_pad)
        padded[offset : offset + n] = m.density
        q = np.real(np.fft.ifft(np.fft.fft(padded) * filt))
        t = X * np.cos(m.angle) + P * np.sin(m.angle)
        # Interpolate over the padded range so the tails contribute where
        # |t| exceeds the marginal grid (points near the grid corners).
        W += np.interp(t, t_ext, q, left=0.0, right=0.0)
    W *= np.pi / len(marginals)
    # Reconstruction is only valid on the inscribed disc.
    radius = min(abs(x[0]), abs(x[-1]))
    W[X**2 + P**2 > radius**2] = 0.0

    dg = grid[1] - grid[0]
    raw = float(np.trapezoid(np.trapezoid(W, dx=dg, axis=1), dx=dg))
    W_norm = W / raw
    neg = _negativity_on_grid(W_norm, dg)
    return WignerResult(
        x=grid,
        p=grid,
        W=W_norm,
        negativity=neg,
        raw_integral=raw,
        metadata={
            "n_angles": len(marginals),
            "hann_fraction": hann_fraction,
            "x_points": n,
            "wigner_points": wigner_points,
        },
    )


def _negativity_on_grid(W: np.ndarray, dg: float) -> float:
    integrand = np.abs(W) - W
    return float(np.trapezoid(np.trapezoid(integrand, dx=dg, axis=1), dx=dg))


def negativity(result: WignerResult) -> float:
    """delta_W = int (|W| - W) dx dp; warns if boundary mass is visible."""
    peak = float(np.max(np.abs(result.W)))
    boundary = max(
        float(np.max(np.abs(result.W[0, :]))),
        float(np.max(np.abs(result.W[-1, :]))),
        float(np.max(np.abs(result.W[:, 0]))),
        float(np.max(np.abs(result.W[:, -1]))),
    )
    if peak > 0 and boundary > 1e-3 * peak:
        warnings.warn(
            f"boundary |W| is {boundary / peak:.2e} of the peak",
            BoundaryMassWarning,
        )
    dg = result.x[1] - result.x[0]
    return _negativity_on_grid(result.W, dg)


def forward_project(result: WignerResult, angles: np.ndarray) -> np.ndarray:
    """Radon transform of a reconstructed W; rows are x, columns angles."""
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(
        (result.x, result.p), result.W, bounds_error=False, fill_value=0.0
    )
    x = result.x
    du = x[1] - x[0]
    u = x
    out = np.zeros((len(x), len(angles)))
    for k, a in enumerate(angles):
        c, s = np.cos(a), np.sin(a)
        for i, t in enumerate(x):
            pts = np.column_stack([t * c - u * s, t * s + u * c])
            out[i, k] = np.sum(interp(pts)) * du
    return out


def gaussian_marginals(
    angles: np.ndarray,
    x_grid: np.ndarray,
    mean_x: float = 0.0,
    mean_p: float = 0.0,
    variance: float = 0.25,
) -> list[Marginal]:
    """Analytic marginals of an isotropic Gaussian Wigner distribution.

    Bypass path for testing the tomography chain without a generator.
    """
    out = []
    for a in angles:
        mu = mean_x * np.cos(a) + mean_p * np.sin(a)
        dens = np.exp(-((x_grid - mu) ** 2) / (2.0 * variance))
        dens /= np.trapezoid(dens, x_grid)
        out.append(Marginal(angle=float(a), x=x_grid, density=dens))
    return out
