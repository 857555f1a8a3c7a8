"""Schmidt decomposition of pure bipartite vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NotNormalized, ShapeMismatch
from .states import BipartiteDims

TOL_RANK = 1e-9


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """psi = sum_j coefficients[j] * left[:, j] (x) right[:, j]."""

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    degeneracy_blocks: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def is_degenerate(self) -> bool:
        return any(len(b) > 1 for b in self.degeneracy_blocks)

    def matrix(self) -> np.ndarray:
        """The m x n coefficient matrix M with psi = vec(M) (row-major)."""
        return (self.left_vectors * self.coefficients) @ self.right_vectors.T

    def vector(self) -> np.ndarray:
        return self.matrix().ravel()


def cluster(values, tol: float) -> tuple[tuple[int, ...], ...]:
    """Group a descending sequence into maximal runs whose neighbours differ by < tol."""
    blocks: list[list[int]] = []
    for i, x in enumerate(values):
        if blocks and values[blocks[-1][-1]] - x < tol:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return tuple(tuple(b) for b in blocks)


def _lex_key(vec: np.ndarray) -> tuple:
    return tuple(np.round(np.column_stack([vec.real, vec.imag]).ravel(), 12))


def schmidt_decompose(psi, dims: BipartiteDims, tol_rank: float = TOL_RANK) -> SchmidtDecomposition:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dims.total:
        raise ShapeMismatch(f"vector of length {psi.size} does not fit dims ({dims.m}, {dims.n})")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalized(f"||psi|| = {norm!r}, expected 1")
    s = linalg.svd(psi.reshape(dims.m, dims.n))
    k = max(int(np.sum(s.singular_values > tol_rank)), 1)
    mu = s.singular_values[:k].copy()
    left = s.u[:, :k].copy()
    # psi = U S V^H = sum mu_j u_j v_j^H, so the right Schmidt vectors are conj(v)
    right = s.v[:, :k].conj()
    blocks = cluster(mu, tol_rank)
    for block in blocks:
        if len(block) < 2:
            continue
        idx = list(block)
        order = sorted(idx, key=lambda j: _lex_key(left[:, j]))
        left[:, idx] = left[:, order]
        right[:, idx] = right[:, order]
    return SchmidtDecomposition(mu, left, right, blocks)


def schmidt_rank(psi, dims: BipartiteDims, tol_rank: float = TOL_RANK) -> int:
    return schmidt_decompose(psi, dims, tol_rank).rank
