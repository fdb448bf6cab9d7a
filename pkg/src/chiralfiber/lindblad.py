"""Exact many-body master equation: Liouvillian, steady state, observables.

The density operator is column-stacked, so vec(A rho B) = (B^T kron A) vec(rho)
and the generator is a sparse 4^N x 4^N matrix.  Intended for N <= 7 in
routine use (hard cap 12).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .couplings import CouplingKernels
from .errors import DegenerateSteadyState, DimensionCap, NonConvergence
from .geometry import AtomChain, DriveParams, drive_phases

_HARD_CAP = 12
_DENSE_ORACLE_CAP = 3


@dataclass(frozen=True)
class Register:
    """N two-level atoms; caches the embedded lowering operators."""

    n_atoms: int

    def __post_init__(self):
        if not 1 <= self.n_atoms <= _HARD_CAP:
            raise DimensionCap(f"register size {self.n_atoms} outside 1..{_HARD_CAP}")

    @property
    def dim(self) -> int:
        return 2**self.n_atoms

    def lowering(self, i: int) -> sp.csr_matrix:
        return _lowering(self.n_atoms, i)


@lru_cache(maxsize=None)
def _lowering(n: int, i: int) -> sp.csr_matrix:
    sigma = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # |g><e|
    eye2 = sp.identity(2, format="csr")
    op = sp.identity(1, format="csr")
    for j in range(n):
        op = sp.kron(op, sigma if j == i else eye2, format="csr")
    return op


@dataclass(frozen=True)
class Liouvillian:
    """Vectorized generator plus the context it was built from."""

    matrix: sp.csr_matrix
    register: Register
    chain: AtomChain
    drive: DriveParams
    kernels: CouplingKernels
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.register.dim


def hamiltonian(kernels: CouplingKernels, chain: AtomChain, drive: DriveParams) -> sp.csr_matrix:
    """H = H_l + H_int with the laser phases on the raising operators.

    The phase convention makes the weakly driven coherences proportional
    to the laser-imprinted spin wave, so phase matching enhances the
    right-propagating kernel as built in :mod:`couplings`.
    """
    reg = Register(chain.n_atoms)
    u = drive_phases(chain, drive)
    h = sp.csr_matrix((reg.dim, reg.dim), dtype=complex)
    sigmas = [reg.lowering(i) for i in range(chain.n_atoms)]
    for j, s_j in enumerate(sigmas):
        h = h + drive.rabi * (u[j] * s_j.conj().T + np.conj(u[j]) * s_j)
        h = h - drive.detuning * (s_j.conj().T @ s_j)
    V = np.asarray(kernels.V)
    for i, s_i in enumerate(sigmas):
        for j, s_j in enumerate(sigmas):
            if i != j and V[i, j] != 0:
                h = h + V[i, j] * (s_i.conj().T @ s_j)
    return h.tocsr()


def build_liouvillian(
    kernels: CouplingKernels, chain: AtomChain, drive: DriveParams
) -> Liouvillian:
    """Sparse vectorized generator of the master equation."""
    n = chain.n_atoms
    if n > _HARD_CAP:
        raise DimensionCap(f"N={n} exceeds the Liouvillian cap {_HARD_CAP}")
    reg = Register(n)
    dim = reg.dim
    eye = sp.identity(dim, format="csr", dtype=complex)
    h = hamiltonian(kernels, chain, drive)
    L = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    G = np.asarray(kernels.G)
    sigmas = [reg.lowering(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            g = G[i, j]
            if g == 0:
                continue
            s_i, s_j = sigmas[i], sigmas[j]
            # Pairing G_ij sigma_j rho sigma_i^dag makes the coherence
            # damping matrix equal to G itself (not G^T), matching the
            # effective Hamiltonian V - (i/2) G of the weak-drive solver.
            sdag_s = (s_i.conj().T @ s_j).tocsr()
            L = L + g * (
                sp.kron(s_i, s_j)
                - 0.5 * sp.kron(eye, sdag_s)
                - 0.5 * sp.kron(sdag_s.T, eye)
            )
    meta = {
        "n_atoms": n,
        "rabi": drive.rabi,
        "detuning": drive.detuning,
        "laser_angle": drive.laser_angle,
        "kernel_hash": hash(np.round(G, 12).tobytes() + np.round(np.asarray(kernels.V), 12).tobytes()),
    }
    return Liouvillian(matrix=L.tocsr(), register=reg, chain=chain, drive=drive,
                       kernels=kernels, metadata=meta)


@dataclass(frozen=True)
class SteadyState:
    """Stationary density operator and its emission observables."""

    rho: np.ndarray
    gamma_r: float
    gamma_l: float
    gamma_u: float
    beta: float
    chi: float
    residual: float

    @property
    def guided(self) -> float:
        return self.gamma_r + self.gamma_l


def _trace_vector(dim: int) -> np.ndarray:
    t = np.zeros(dim * dim)
    t[:: dim + 1] = 1.0
    return t


def steady_state_dense(L: Liouvillian) -> np.ndarray:
    """Brute-force null-space steady state (oracle path, N <= 3)."""
    if L.register.n_atoms > _DENSE_ORACLE_CAP:
        raise DimensionCap("dense oracle limited to N <= 3")
    m = L.matrix.toarray()
    _, s, vh = np.linalg.svd(m)
    null_dim = int(np.sum(s < 1e-10 * s[0]))
    if null_dim > 1:
        raise DegenerateSteadyState(f"null space dimension {null_dim}")
    vec = vh[-1].conj()
    rho = vec.reshape((L.dim, L.dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho)


def steady_state(L: Liouvillian, *, check_unique: bool = False) -> SteadyState:
    """Stationary state by sparse LU with a trace-constraint row.

    Falls back to shift-inverted Arnoldi iteration if the direct solve does
    not meet the residual tolerance.  The result is Hermitized and
    trace-normalized, and the residual ||L[rho]|| is re-checked.
    """
    dim = L.dim
    mat = L.matrix.tolil(copy=True)
    mat[0, :] = _trace_vector(dim)
    b = np.zeros(dim * dim, dtype=complex)
    b[0] = 1.0
    try:
        x = spla.splu(mat.tocsc()).solve(b)
    except RuntimeError:
        x = None

    def finish(vec: np.ndarray) -> SteadyState:
        rho = vec.reshape((dim, dim), order="F")
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.real(np.trace(rho))
        residual = float(np.linalg.norm(L.matrix @ rho.reshape(-1, order="F")))
        if residual > 1e-9:
            raise NonConvergence(f"steady-state residual {residual:.3e} > 1e-9")
        g_r, g_l, g_u = emission_observables(rho, L.kernels)[:3]
        guided = g_r + g_l
        total = guided + g_u
        return SteadyState(
            rho=rho,
            gamma_r=g_r,
            gamma_l=g_l,
            gamma_u=g_u,
            beta=guided / total if total > 0 else 0.0,
            chi=(g_r - g_l) / guided if guided > 0 else 0.0,
            residual=residual,
        )

    if x is not None:
        try:
            result = finish(x)
        except NonConvergence:
            result = None
        if result is not None:
            if check_unique:
                _assert_unique(L)
            return result

    # Shift-inverse fallback: eigenvector of the near-zero eigenvalue.
    vals, vecs = spla.eigs(L.matrix, k=1, sigma=1e-12, which="LM", maxiter=5000)
    if check_unique:
        _assert_unique(L)
    return finish(vecs[:, 0])


def _assert_unique(L: Liouvillian) -> None:
    vals = spla.eigs(L.matrix, k=2, sigma=1e-12, which="LM", return_eigenvectors=False)
    near_zero = np.sum(np.abs(vals) < 1e-10)
    if near_zero > 1:
        raise DegenerateSteadyState(f"{near_zero} eigenvalues within 1e-10 of zero")


def correlation_matrix(rho: np.ndarray, n_atoms: int) -> np.ndarray:
    """M[i, j] = <sigma_i^dag sigma_j> in the given state."""
    reg = Register(n_atoms)
    sigmas = [reg.lowering(i).toarray() for i in range(n_atoms)]
    m = np.empty((n_atoms, n_atoms), dtype=complex)
    for i in range(n_atoms):
        for j in range(n_atoms):
            m[i, j] = np.trace(rho @ sigmas[i].conj().T @ sigmas[j])
    return m


def emission_observables(
    rho: np.ndarray, kernels: CouplingKernels
) -> tuple[float, float, float, float, float]:
    """(Gamma_R, Gamma_L, Gamma_u, beta, chi) in the state rho."""
    m = correlation_matrix(rho, kernels.n_atoms)
    rates = [float(np.real(np.sum(np.asarray(g) * m)))
             for g in (kernels.G_R, kernels.G_L, kernels.G_u)]
    g_r, g_l, g_u = rates
    guided = g_r + g_l
    total = guided + g_u
    beta = guided / total if total > 0 else 0.0
    chi = (g_r - g_l) / guided if guided > 0 else 0.0
    return g_r, g_l, g_u, beta, chi
