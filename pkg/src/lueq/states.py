"""Bipartite density matrices, local unitaries and test-state generators.

Index convention: the product basis vector |i> (x) |j> (0-based) sits at flat
position ``i * n + j``, i.e. row-major over the first factor.  This is what
``np.kron`` produces and what ``psi.reshape(m, n)`` undoes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    InvalidParams,
    InvalidRank,
    NotHermitianState,
    NotPositiveSemidefinite,
    ShapeMismatch,
    TraceNotOne,
)


@dataclass(frozen=True)
class BipartiteDims:
    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 2 or self.n < 2:
            raise InvalidParams(f"both factor dimensions must be integers >= 2, got ({self.m}, {self.n})")

    @property
    def total(self) -> int:
        return self.m * self.n

    def __iter__(self):
        return iter((self.m, self.n))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: BipartiteDims
    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def eigenvalues(self) -> np.ndarray:
        return linalg.eigh(self.mat).eigenvalues


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name, w in (("u", self.u), ("v", self.v)):
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise ShapeMismatch(f"{name} must be square, got {w.shape}")
            if not linalg.is_unitary(w, 1e-10):
                raise InvalidParams(f"{name} is not unitary to 1e-10")

    @property
    def dims(self) -> BipartiteDims:
        return BipartiteDims(self.u.shape[0], self.v.shape[0])

    def kron(self) -> np.ndarray:
        return np.kron(self.u, self.v)

    @classmethod
    def identity(cls, dims: BipartiteDims) -> "LocalUnitary":
        return cls(np.eye(dims.m, dtype=complex), np.eye(dims.n, dtype=complex))


@dataclass(frozen=True)
class WernerParams:
    e: float
    f: float

    def __post_init__(self):
        if not (self.e >= 0 and 0 <= self.f <= 1 - self.e):
            raise InvalidParams(f"need e >= 0 and 0 <= f <= 1 - e, got e={self.e}, f={self.f}")


def validate(mat, dims: BipartiteDims, tol: float = 1e-10) -> DensityMatrix:
    """Check the density-matrix invariants and wrap ``mat``.

    The input is copied, never modified.  Raises a subclass of
    :class:`~lueq.errors.StateValidationError` naming the violated invariant.
    """
    mat = np.array(mat, dtype=complex)
    size = dims.total
    if mat.shape != (size, size):
        raise ShapeMismatch(f"dims ({dims.m}, {dims.n}) need a {size}x{size} matrix, got {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NotHermitianState("matrix has NaN or Inf entries", float("inf"))
    asym = np.linalg.norm(mat - mat.conj().T)
    if asym >= tol:
        raise NotHermitianState(f"NotHermitian: ||rho - rho^H||_F = {asym:.3e}", asym)
    trace_dev = abs(np.trace(mat) - 1.0)
    if trace_dev >= tol:
        raise TraceNotOne(f"TraceNotOne: |tr(rho) - 1| = {trace_dev:.3e}", trace_dev)
    lowest = linalg.eigh(mat, tol=max(tol, 1e-10)).eigenvalues[-1]
    if lowest <= -tol:
        raise NotPositiveSemidefinite(f"NotPositiveSemidefinite: smallest eigenvalue {lowest:.3e}", lowest)
    return DensityMatrix(dims, mat)


def apply_local_unitary(rho: DensityMatrix, lu: LocalUnitary) -> DensityMatrix:
    """Return (U (x) V) rho (U (x) V)^H."""
    if lu.dims != rho.dims:
        raise ShapeMismatch(f"unitaries act on {tuple(lu.dims)}, state lives on {tuple(rho.dims)}")
    w = lu.kron()
    out = w @ rho.mat @ w.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(rho.dims, out)


def partial_traces(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Reduced states (tr_B rho, tr_A rho)."""
    m, n = rho.dims
    t = np.asarray(rho.mat).reshape(m, n, m, n)
    return np.einsum("ijkj->ik", t), np.einsum("ijil->jl", t)


def werner(params: WernerParams) -> DensityMatrix:
    """Two-qubit modified Werner state; ``e = 0`` is the usual Werner state.

    At ``e = 0`` three eigenvalues coincide, so the state lies on the
    degenerate stratum and equivalence checks go through the optimizer.
    """
    e, f = params.e, params.f
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = (1 - e - f) / 3
    mat[1, 1] = mat[2, 2] = (1 + 2 * f) / 6
    mat[1, 2] = mat[2, 1] = (1 - 4 * f) / 6
    mat[3, 3] = (1 + e - f) / 3
    return DensityMatrix(BipartiteDims(2, 2), mat)


def pure_state(psi, dims: BipartiteDims) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(dims, np.outer(psi, psi.conj()))


def from_spectrum(eigenvalues, eigenvectors, dims: BipartiteDims) -> DensityMatrix:
    """Assemble sum_i lambda_i |e_i><e_i| from orthonormal columns."""
    vecs = np.asarray(eigenvectors, dtype=complex)
    lam = np.asarray(eigenvalues, dtype=float)
    mat = (vecs * lam) @ vecs.conj().T
    return DensityMatrix(dims, 0.5 * (mat + mat.conj().T))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(shape, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal phases removed."""
    q, r = np.linalg.qr(ginibre((dim, dim), rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dims: BipartiteDims, rank: int, seed=0) -> DensityMatrix:
    """Induced (Ginibre) ensemble: rho = G G^H / tr(G G^H), G of shape mn x rank."""
    if not 1 <= rank <= dims.total:
        raise InvalidRank(f"rank must lie in 1..{dims.total}, got {rank}")
    g = ginibre((dims.total, rank), _rng(seed))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix(dims, 0.5 * (mat + mat.conj().T))


def random_local_unitary(dims: BipartiteDims, seed=0) -> LocalUnitary:
    rng = _rng(seed)
    return LocalUnitary(haar_unitary(dims.m, rng), haar_unitary(dims.n, rng))
