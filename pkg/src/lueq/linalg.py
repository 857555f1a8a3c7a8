"""Dense complex linear algebra for small matrices.

Hermitian eigendecomposition and SVD are cyclic Jacobi iterations, so the
output is a pure function of the input (fixed sweep order, fixed phase
convention).  Matrices are plain ``numpy`` complex arrays.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, NotFinite, NotHermitian, NotOrthonormal, RankDeficient, ShapeMismatch

MAX_SWEEPS = 100
_EPS = np.finfo(float).eps


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]


class Svd(NamedTuple):
    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def _as_matrix(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotFinite("matrix has NaN or Inf entries")
    return a


def pivot_index(vec: np.ndarray) -> int:
    """Index of the largest-modulus entry; near-ties go to the lowest index."""
    mod = np.abs(vec)
    top = mod.max()
    return int(np.flatnonzero(mod >= top * (1.0 - 1e-12))[0])


def phase_normalize(cols: np.ndarray, partner: np.ndarray | None = None):
    """Rotate each column so its pivot entry is real-positive.

    If ``partner`` is given, its columns receive the same phase (used for
    singular vector pairs, where ``u_j`` and ``v_j`` share one phase freedom).
    """
    cols = cols.copy()
    partner = None if partner is None else partner.copy()
    for j in range(cols.shape[1]):
        if not np.any(cols[:, j]):
            continue
        p = pivot_index(cols[:, j])
        z = cols[p, j]
        phase = np.conj(z) / abs(z)
        cols[:, j] *= phase
        cols[p, j] = abs(cols[p, j])
        if partner is not None:
            partner[:, j] *= phase
    return cols if partner is None else (cols, partner)


def _rotation(app: float, aqq: float, apq: complex):
    """Unitary 2x2 G with G^H [[app, apq], [conj(apq), aqq]] G diagonal."""
    mag = abs(apq)
    phase = apq / mag
    tau = (aqq - app) / (2.0 * mag)
    sign = 1.0 if tau >= 0 else -1.0
    if abs(tau) > 1e150:
        t = sign / (2.0 * abs(tau))
    else:
        t = sign / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return np.array([[c, s * phase], [-s * np.conj(phase), c]])


def eigh(a, tol: float = 1e-10, max_sweeps: int = MAX_SWEEPS) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues come back in descending order, and every eigenvector has its
    largest-modulus entry real-positive.
    """
    a = _as_matrix(a)
    n, cols = a.shape
    if n != cols:
        raise ShapeMismatch(f"eigh needs a square matrix, got {a.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > tol * max(scale, 1.0):
        raise NotHermitian(f"asymmetry {np.linalg.norm(a - a.conj().T):.3e} exceeds tolerance")
    a = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=complex)
    threshold = _EPS * scale
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold or scale == 0.0:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-3 * threshold:
                    continue
                rotated = True
                g = _rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vecs[:, idx] = vecs[:, idx] @ g
        if not rotated:
            break
    else:
        raise NoConvergence(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    vals = np.diag(a).real.copy()
    # stable sort keeps the sweep order for exact ties
    order = np.argsort(-vals, kind="stable")
    return HermitianEig(vals[order], phase_normalize(vecs[:, order]))


def _one_sided_jacobi(a: np.ndarray, max_sweeps: int):
    """Orthogonalize the columns of ``a`` (rows >= cols).  Returns (W, V) with A V = W."""
    w = a.copy()
    n = w.shape[1]
    v = np.eye(n, dtype=complex)
    # columns this small are numerically zero; rotating them only churns
    negligible = (_EPS * np.linalg.norm(a)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = np.vdot(w[:, p], w[:, p]).real
                beta = np.vdot(w[:, q], w[:, q]).real
                gamma = np.vdot(w[:, p], w[:, q])
                if min(alpha, beta) <= negligible:
                    continue
                if abs(gamma) <= _EPS * np.sqrt(alpha * beta) or abs(gamma) == 0.0:
                    continue
                rotated = True
                g = _rotation(alpha, beta, gamma)
                idx = [p, q]
                w[:, idx] = w[:, idx] @ g
                v[:, idx] = v[:, idx] @ g
        if not rotated:
            return w, v
    raise NoConvergence(f"one-sided Jacobi SVD did not converge in {max_sweeps} sweeps")


def svd(a, tol: float = 1e-12, max_sweeps: int = MAX_SWEEPS) -> Svd:
    """Thin SVD ``A = U diag(s) V^H`` by one-sided Jacobi.

    ``u`` is rows x p and ``v`` is cols x p with p = min(rows, cols).  Left
    vectors for (numerically) zero singular values are filled in by
    :func:`complete_basis`, so ``u`` always has orthonormal columns.
    """
    a = _as_matrix(a)
    rows, cols = a.shape
    if not np.any(a):
        raise ShapeMismatch("svd of the zero matrix is not defined here")
    transposed = rows < cols
    work = a.conj().T if transposed else a
    w, v = _one_sided_jacobi(work, max_sweeps)
    sig = np.linalg.norm(w, axis=0)
    order = np.argsort(-sig, kind="stable")
    sig, w, v = sig[order], w[:, order], v[:, order]
    cutoff = max(tol, _EPS) * sig[0]
    keep = sig > cutoff
    u = np.zeros_like(w)
    u[:, keep] = w[:, keep] / sig[keep]
    nk = int(keep.sum())
    if nk < w.shape[1]:
        full = complete_basis(u[:, :nk], w.shape[0], tol=1e-8)
        u[:, nk:] = full[:, nk : w.shape[1]]
        sig = np.where(keep, sig, 0.0)
    if transposed:
        u, v = v, u
    u, v = phase_normalize(u, v)
    return Svd(u, sig, v)


def _gram_schmidt_extend(out: np.ndarray, filled: int, pool, tol: float) -> int:
    for cand in pool:
        if filled == out.shape[1]:
            break
        r = np.array(cand, dtype=complex)
        for _ in range(2):
            r -= out[:, :filled] @ (out[:, :filled].conj().T @ r)
        norm = np.linalg.norm(r)
        if norm < tol:
            continue
        out[:, filled] = r / norm
        filled += 1
    return filled


def _check_orthonormal(cols, dim: int, tol: float) -> np.ndarray:
    cols = np.array(cols, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[0] != dim or cols.shape[1] > dim:
        raise ShapeMismatch(f"cannot complete {cols.shape} columns in dimension {dim}")
    k = cols.shape[1]
    gram_err = np.linalg.norm(cols.conj().T @ cols - np.eye(k))
    if gram_err >= max(tol, 1e-12):
        raise NotOrthonormal(f"input columns deviate from orthonormal by {gram_err:.3e}")
    return cols


def extend_orthonormal(cols, vectors, tol: float = 1e-10) -> np.ndarray:
    """Append to ``cols`` the Gram-Schmidt residuals of ``vectors`` (columns) that survive ``tol``.

    The result need not be square; its first columns are ``cols`` unchanged.
    """
    dim = np.shape(cols)[0]
    cols = _check_orthonormal(cols, dim, tol)
    vectors = np.asarray(vectors, dtype=complex)
    out = np.zeros((dim, dim), dtype=complex)
    out[:, : cols.shape[1]] = cols
    filled = _gram_schmidt_extend(out, cols.shape[1], list(vectors.reshape(dim, -1).T), tol)
    return out[:, :filled]


def complete_basis(cols, dim: int, tol: float = 1e-10, candidates=None) -> np.ndarray:
    """Extend orthonormal columns to a ``dim x dim`` unitary.

    The input columns are copied unchanged into the first k positions.  The
    remaining columns come from Gram-Schmidt (applied twice) over
    ``candidates`` followed by the standard basis, in order; a candidate whose
    residual norm is below ``tol`` is skipped.
    """
    cols = _check_orthonormal(cols, dim, tol)
    k = cols.shape[1]
    out = np.zeros((dim, dim), dtype=complex)
    out[:, :k] = cols
    pool = [] if candidates is None else list(np.asarray(candidates, dtype=complex).reshape(dim, -1).T)
    pool.extend(np.eye(dim, dtype=complex))
    filled = _gram_schmidt_extend(out, k, pool, tol)
    if filled < dim:
        raise RankDeficient(f"found only {filled - k} of {dim - k} completion vectors")
    return out


def frobenius_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol
