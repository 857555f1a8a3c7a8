"""Representations of bipartite mixed states and their residual gauge.

A representation lists, for each nonzero eigenvalue (descending), the
eigenvector's Schmidt coefficients together with the coordinate matrices
``x`` and ``y`` of its Schmidt vectors in two orthonormal bases of the
factor spaces.  Both bases start with the Schmidt vectors of the first
eigenvector, so the first item always has ``x = y = [I; 0]``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import linalg
from .schmidt import SchmidtDecomposition, cluster, schmidt_decompose
from .states import BipartiteDims, DensityMatrix, LocalUnitary
from .tolerances import ToleranceConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RepresentationItem:
    eigenvalue: float
    schmidt: SchmidtDecomposition
    x: np.ndarray  # m x k, left Schmidt vectors in basis_a
    y: np.ndarray  # n x k, right Schmidt vectors in basis_b

    @property
    def coefficients(self) -> np.ndarray:
        return self.schmidt.coefficients

    def coefficient_matrix(self) -> np.ndarray:
        """The eigenvector in the product basis basis_a (x) basis_b, as an m x n array."""
        return (self.x * self.schmidt.coefficients) @ self.y.T


@dataclass(frozen=True, eq=False)
class Representation:
    dims: BipartiteDims
    items: tuple[RepresentationItem, ...]
    basis_a: np.ndarray
    basis_b: np.ndarray
    eigenvalue_blocks: tuple[tuple[int, ...], ...]
    degenerate_anchor: bool = False
    # True when every completion column beyond a one-dimensional leftover is
    # pinned by state data, so the bases are covariant up to column phases.
    gauge_fixed: bool = True
    canonical: bool = True

    @property
    def rank(self) -> int:
        return len(self.items)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([it.eigenvalue for it in self.items])

    @property
    def anchor_rank(self) -> int:
        return self.items[0].schmidt.rank

    @property
    def eigenvalues_degenerate(self) -> bool:
        return any(len(b) > 1 for b in self.eigenvalue_blocks)

    def eigenvector(self, i: int) -> np.ndarray:
        it = self.items[i]
        return (self.basis_a @ it.coefficient_matrix() @ self.basis_b.T).ravel()


@dataclass(frozen=True)
class SchmidtGauge:
    """Residual freedom of one non-anchor eigenvector's Schmidt vectors.

    ``phase_pairs`` counts non-degenerate Schmidt directions: each carries a
    left and a right phase tied by one constraint.  ``blocks`` lists U(d)
    sizes for degenerate coefficients (left rotated by W, right by conj(W)).
    """

    phase_pairs: int
    blocks: tuple[int, ...] = ()


@dataclass(frozen=True)
class GaugeDescriptor:
    left_a_phases: int
    left_b_phases: int
    left_a_blocks: tuple[int, ...]
    left_b_blocks: tuple[int, ...]
    anchor_blocks: tuple[int, ...]
    per_item_phase: int
    schmidt_blocks: tuple[SchmidtGauge, ...]
    eigen_blocks: tuple[int, ...]
    constraint_count: int
    free_parameter_count: int = field(default=-1)

    def __post_init__(self):
        if self.free_parameter_count < 0:
            object.__setattr__(self, "free_parameter_count", self.recount())

    def recount(self) -> int:
        sq = lambda blocks: sum(d * d for d in blocks)  # noqa: E731
        total = self.left_a_phases + self.left_b_phases
        total += sq(self.left_a_blocks) + sq(self.left_b_blocks) + sq(self.anchor_blocks)
        total += self.per_item_phase + sq(self.eigen_blocks)
        total += sum(2 * g.phase_pairs + sq(g.blocks) for g in self.schmidt_blocks)
        return total - self.constraint_count

    @property
    def is_torus(self) -> bool:
        blocks = self.anchor_blocks + self.eigen_blocks
        blocks += tuple(d for g in self.schmidt_blocks for d in g.blocks)
        blocks += tuple(d for d in self.left_a_blocks + self.left_b_blocks if d > 1)
        return not blocks


def _completion_candidates(schmidts, side: str) -> np.ndarray:
    """Data-derived vectors for completing the anchor basis, in canonical order.

    Non-degenerate Schmidt vectors enter directly (they are fixed up to a
    phase).  For a degenerate block only the block projector and the block
    product L R^T are well defined, so the candidates are the projector's
    images of the anchor vectors, followed by the product applied to the
    conjugated phase-fixed vectors of the other factor.
    """
    own, other = (0, 1) if side == "a" else (1, 0)

    def pick(s, which):
        return s.left_vectors if which == 0 else s.right_vectors

    anchor = pick(schmidts[0], own)
    fixed_other = [pick(schmidts[0], other)]
    for s in schmidts[1:]:
        vecs = pick(s, other)
        fixed_other += [vecs[:, [b[0]]] for b in s.degeneracy_blocks if len(b) == 1]
    fixed_other = np.hstack(fixed_other)
    out, cross = [], []
    for s in schmidts[1:]:
        vecs = pick(s, own)
        for block in s.degeneracy_blocks:
            if len(block) == 1:
                out.append(vecs[:, block[0]])
            else:
                sub = vecs[:, list(block)]
                out.extend((sub @ sub.conj().T @ anchor).T)
                partner = pick(s, other)[:, list(block)]
                cross.extend((sub @ partner.T @ fixed_other.conj()).T)
    dim = anchor.shape[0]
    return np.array(out + cross, dtype=complex).T.reshape(dim, -1)


def _complete(schmidts, side: str, tol: ToleranceConfig):
    pick = (lambda s: s.left_vectors) if side == "a" else (lambda s: s.right_vectors)
    anchor = pick(schmidts[0])
    dim = anchor.shape[0]
    partial = linalg.extend_orthonormal(anchor, _completion_candidates(schmidts, side), tol.tol_completion)
    basis = linalg.complete_basis(partial, dim, tol=tol.tol_completion)
    leftover = dim - partial.shape[1]
    fixed = True
    if leftover >= 2:
        spill = max(np.linalg.norm(basis[:, partial.shape[1]:].conj().T @ pick(s)) for s in schmidts)
        fixed = spill < 10 * tol.tol_completion
    return basis, fixed


def _assemble(dims, eigenvalues, schmidts, tol: ToleranceConfig, canonical=True) -> Representation:
    basis_a, fixed_a = _complete(schmidts, "a", tol)
    basis_b, fixed_b = _complete(schmidts, "b", tol)
    items = []
    for idx, (lam, s) in enumerate(zip(eigenvalues, schmidts)):
        if idx == 0:
            x = np.eye(dims.m, s.rank, dtype=complex)
            y = np.eye(dims.n, s.rank, dtype=complex)
        else:
            x = basis_a.conj().T @ s.left_vectors
            y = basis_b.conj().T @ s.right_vectors
        items.append(RepresentationItem(float(lam), s, x, y))
    blocks = cluster(list(eigenvalues), tol.tol_cluster)
    degenerate_anchor = len(blocks[0]) > 1 or schmidts[0].is_degenerate
    if degenerate_anchor:
        log.debug("DegenerateAnchor: first eigenvalue or its Schmidt coefficients are degenerate")
    return Representation(
        dims, tuple(items), basis_a, basis_b, blocks, degenerate_anchor, fixed_a and fixed_b, canonical
    )


def build_representation(rho: DensityMatrix, tol: ToleranceConfig | None = None) -> Representation:
    """Spectral decomposition, Schmidt data per eigenvector, anchored bases, X_i and Y_i."""
    tol = tol or ToleranceConfig()
    eig = linalg.eigh(rho.mat)
    keep = eig.eigenvalues > tol.tol_rank
    lams = eig.eigenvalues[keep]
    vecs = eig.eigenvectors[:, keep]
    schmidts = [schmidt_decompose(vecs[:, i], rho.dims, tol.tol_rank) for i in range(len(lams))]
    return _assemble(rho.dims, lams, schmidts, tol)


def canonical_form(rep: Representation, tol: ToleranceConfig | None = None) -> Representation:
    """Re-derive the completed bases of ``rep`` from its own Schmidt data.

    Representations produced by :func:`build_representation` are returned
    unchanged.  Any other member of the representation class (for instance
    one produced by :func:`apply_gauge`) is brought to the same completion
    convention, which absorbs the U(m - k1) and U(n - k1) freedoms.
    """
    if rep.canonical:
        return rep
    tol = tol or ToleranceConfig()
    schmidts = []
    for it in rep.items:
        s = it.schmidt
        left = rep.basis_a @ it.x
        right = rep.basis_b @ it.y
        schmidts.append(SchmidtDecomposition(s.coefficients, left, right, s.degeneracy_blocks))
    return _assemble(rep.dims, rep.eigenvalues, schmidts, tol)


def reconstruct(rep: Representation) -> DensityMatrix:
    """The density matrix a representation describes."""
    size = rep.dims.total
    mat = np.zeros((size, size), dtype=complex)
    for i, it in enumerate(rep.items):
        e = rep.eigenvector(i)
        mat += it.eigenvalue * np.outer(e, e.conj())
    return DensityMatrix(rep.dims, 0.5 * (mat + mat.conj().T))


def gauge_descriptor(rep: Representation, tol: ToleranceConfig | None = None) -> GaugeDescriptor:
    """Enumerate the residual freedoms that leave the state unchanged.

    Anchor directions with distinct Schmidt coefficients each contribute a
    phase on basis_a and one on basis_b (paired by one constraint); equal
    coefficients contribute a joint U(d) block instead.  Unused basis columns
    contribute U(m - k1) and U(n - k1).  Every eigenvector outside a
    degenerate eigenvalue cluster has a global phase; a cluster of size d
    contributes U(d) mixing.  Non-anchor eigenvectors add their own Schmidt
    freedoms.
    """
    m, n = rep.dims
    anchor = rep.items[0].schmidt
    k1 = anchor.rank
    anchor_singletons = sum(1 for b in anchor.degeneracy_blocks if len(b) == 1)
    anchor_blocks = tuple(len(b) for b in anchor.degeneracy_blocks if len(b) > 1)
    eigen_blocks = tuple(len(b) for b in rep.eigenvalue_blocks if len(b) > 1)
    per_item = sum(1 for b in rep.eigenvalue_blocks if len(b) == 1)
    schmidt_blocks = []
    for it in rep.items[1:]:
        blocks = it.schmidt.degeneracy_blocks
        schmidt_blocks.append(
            SchmidtGauge(sum(1 for b in blocks if len(b) == 1), tuple(len(b) for b in blocks if len(b) > 1))
        )
    constraints = anchor_singletons + sum(g.phase_pairs for g in schmidt_blocks)
    return GaugeDescriptor(
        left_a_phases=anchor_singletons,
        left_b_phases=anchor_singletons,
        left_a_blocks=(m - k1,) if m > k1 else (),
        left_b_blocks=(n - k1,) if n > k1 else (),
        anchor_blocks=anchor_blocks,
        per_item_phase=per_item,
        schmidt_blocks=tuple(schmidt_blocks),
        eigen_blocks=eigen_blocks,
        constraint_count=constraints,
    )


# -- gauge action -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """One element of the residual gauge group of a representation.

    ``item_phases[i]`` multiplies eigenvector i; ``schmidt[i]`` is a k_i x k_i
    unitary, block diagonal along the Schmidt degeneracy blocks, rotating the
    left Schmidt vectors (the right ones get its conjugate).  ``schmidt[0]``
    acts on the anchor columns of both bases.  ``complement_a`` and
    ``complement_b`` rotate the unused basis columns.  Mixing inside
    degenerate eigenvalue clusters is not a coordinate action and is left out.
    """

    item_phases: np.ndarray
    schmidt: tuple[np.ndarray, ...]
    complement_a: np.ndarray
    complement_b: np.ndarray


def _hermitian_from_params(params: np.ndarray, d: int) -> np.ndarray:
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = params[:d]
    pos = d
    for r in range(d):
        for c in range(r + 1, d):
            h[r, c] += params[pos] + 1j * params[pos + 1]
            h[c, r] = np.conj(h[r, c])
            pos += 2
    return h


def _block_unitary(params, blocks) -> tuple[np.ndarray, int]:
    k = sum(len(b) for b in blocks)
    w = np.zeros((k, k), dtype=complex)
    used = 0
    for block in blocks:
        d = len(block)
        idx = np.array(block)
        w[np.ix_(idx, idx)] = expm(1j * _hermitian_from_params(params[used : used + d * d], d))
        used += d * d
    return w, used


def gauge_parameter_count(rep: Representation) -> int:
    """Real dimension of the coordinate gauge action built by :func:`gauge_element_from_params`."""
    m, n = rep.dims
    k1 = rep.anchor_rank
    count = rep.rank + (m - k1) ** 2 + (n - k1) ** 2
    for it in rep.items:
        count += sum(len(b) ** 2 for b in it.schmidt.degeneracy_blocks)
    return count


def gauge_element_from_params(rep: Representation, params) -> GaugeElement:
    """Exponential coordinates: zero parameters give the identity element."""
    params = np.asarray(params, dtype=float)
    if params.size != gauge_parameter_count(rep):
        raise ValueError(f"expected {gauge_parameter_count(rep)} parameters, got {params.size}")
    m, n = rep.dims
    k1 = rep.anchor_rank
    l = rep.rank
    phases = params[:l]
    pos = l
    comp = []
    for d in (m - k1, n - k1):
        w = expm(1j * _hermitian_from_params(params[pos : pos + d * d], d)) if d else np.eye(0, dtype=complex)
        comp.append(w)
        pos += d * d
    schmidt = []
    for it in rep.items:
        w, used = _block_unitary(params[pos:], it.schmidt.degeneracy_blocks)
        schmidt.append(w)
        pos += used
    return GaugeElement(np.exp(1j * phases), tuple(schmidt), comp[0], comp[1])


def random_gauge_element(rep: Representation, rng: np.random.Generator) -> GaugeElement:
    return gauge_element_from_params(rep, rng.uniform(-np.pi, np.pi, gauge_parameter_count(rep)))


def apply_gauge(rep: Representation, g: GaugeElement, lu: LocalUnitary | None = None) -> Representation:
    """Move to another representation of the same state, optionally also transported by ``lu``.

    With ``lu = (U, V)`` the result represents (U (x) V) rho (U (x) V)^H.
    """
    k1 = rep.anchor_rank
    w0 = g.schmidt[0]
    basis_a = rep.basis_a.copy()
    basis_b = rep.basis_b.copy()
    basis_a[:, :k1] = g.item_phases[0] * basis_a[:, :k1] @ w0
    basis_b[:, :k1] = basis_b[:, :k1] @ w0.conj()
    basis_a[:, k1:] = basis_a[:, k1:] @ g.complement_a
    basis_b[:, k1:] = basis_b[:, k1:] @ g.complement_b
    if lu is not None:
        basis_a = lu.u @ basis_a
        basis_b = lu.v @ basis_b
    items = []
    for i, it in enumerate(rep.items):
        s = it.schmidt
        if i == 0:
            left, right = basis_a[:, :k1], basis_b[:, :k1]
            x, y = it.x, it.y
        else:
            left = g.item_phases[i] * rep.basis_a @ it.x @ g.schmidt[i]
            right = rep.basis_b @ it.y @ g.schmidt[i].conj()
            if lu is not None:
                left, right = lu.u @ left, lu.v @ right
            x = basis_a.conj().T @ left
            y = basis_b.conj().T @ right
        new_s = SchmidtDecomposition(s.coefficients, left, right, s.degeneracy_blocks)
        items.append(RepresentationItem(it.eigenvalue, new_s, x, y))
    return Representation(
        rep.dims, tuple(items), basis_a, basis_b, rep.eigenvalue_blocks, rep.degenerate_anchor,
        rep.gauge_fixed, canonical=False,
    )
