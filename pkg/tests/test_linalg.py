import numpy as np
import pytest
from _oracles import char_poly_roots

from lueq import linalg
from lueq.errors import NotFinite, NotHermitian, NotOrthonormal, RankDeficient, ShapeMismatch


def random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return g + g.conj().T


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6, 9, 12])
def test_eigh_matches_lapack(d):
    rng = np.random.default_rng(d)
    a = random_hermitian(d, rng)
    eig = linalg.eigh(a)
    ref = np.linalg.eigvalsh(a)[::-1]
    assert np.allclose(eig.eigenvalues, ref, atol=1e-12)
    vecs = eig.eigenvectors
    assert np.allclose(vecs.conj().T @ vecs, np.eye(d), atol=1e-12)
    assert np.allclose(a @ vecs, vecs * eig.eigenvalues, atol=1e-11)


@pytest.mark.parametrize("d", [2, 3])
def test_eigh_matches_characteristic_polynomial(d):
    rng = np.random.default_rng(40 + d)
    for _ in range(20):
        a = random_hermitian(d, rng)
        assert np.allclose(linalg.eigh(a).eigenvalues, char_poly_roots(a), atol=1e-9)


def test_eigh_descending_and_phase_convention():
    rng = np.random.default_rng(5)
    eig = linalg.eigh(random_hermitian(5, rng))
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    for col in eig.eigenvectors.T:
        p = linalg.pivot_index(col)
        assert col[p].imag == 0.0 and col[p].real > 0


def test_eigh_is_deterministic():
    a = random_hermitian(6, np.random.default_rng(9))
    e1, e2 = linalg.eigh(a), linalg.eigh(a.copy())
    assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
    assert np.array_equal(e1.eigenvectors, e2.eigenvectors)


def test_eigh_diagonal_and_zero_input():
    eig = linalg.eigh(np.diag([1.0, 3.0, 2.0]))
    assert np.array_equal(eig.eigenvalues, [3.0, 2.0, 1.0])
    assert np.allclose(np.abs(eig.eigenvectors), np.eye(3)[:, [1, 2, 0]])
    assert np.array_equal(linalg.eigh(np.zeros((3, 3))).eigenvalues, np.zeros(3))


def test_eigh_degenerate_spectrum():
    rng = np.random.default_rng(2)
    q = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    a = (q * [2.0, 2.0, 1.0, -1.0]) @ q.conj().T
    eig = linalg.eigh(a)
    assert np.allclose(eig.eigenvalues, [2, 2, 1, -1], atol=1e-12)
    assert np.allclose(eig.eigenvectors.conj().T @ eig.eigenvectors, np.eye(4), atol=1e-12)


def test_eigh_rejects_bad_input():
    with pytest.raises(NotHermitian):
        linalg.eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ShapeMismatch):
        linalg.eigh(np.ones((2, 3)))
    with pytest.raises(NotFinite):
        linalg.eigh(np.array([[np.nan, 0], [0, 1.0]]))


@pytest.mark.parametrize("shape", [(2, 2), (3, 2), (2, 3), (4, 9), (9, 4), (6, 6)])
def test_svd_matches_lapack(shape):
    rng = np.random.default_rng(shape[0] * 10 + shape[1])
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    s = linalg.svd(a)
    assert np.allclose(s.singular_values, np.linalg.svd(a, compute_uv=False), atol=1e-12)
    assert np.allclose((s.u * s.singular_values) @ s.v.conj().T, a, atol=1e-12)
    p = min(shape)
    assert np.allclose(s.u.conj().T @ s.u, np.eye(p), atol=1e-12)
    assert np.allclose(s.v.conj().T @ s.v, np.eye(p), atol=1e-12)


def test_svd_rank_deficient_fills_left_vectors():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1))
    y = rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))
    s = linalg.svd(x @ y)
    assert np.allclose(s.singular_values[1:], 0.0)
    assert np.allclose(s.u.conj().T @ s.u, np.eye(3), atol=1e-12)
    assert np.allclose((s.u * s.singular_values) @ s.v.conj().T, x @ y, atol=1e-12)


def test_svd_wide_low_rank_tangent_map_converges():
    # a commutator map with a large kernel used to stall the one-sided sweep
    rho = np.diag([0.5, 0.3, 0.2, 0.0]).astype(complex)
    cols = []
    for k in range(8):
        g = np.zeros((4, 4), dtype=complex)
        g[k % 4, (k + 1) % 4] = 1
        g = g - g.conj().T
        c = g @ rho - rho @ g
        cols.append(np.concatenate([c.real.ravel(), c.imag.ravel()]))
    a = np.array(cols).T
    s = linalg.svd(a)
    assert np.allclose(s.singular_values, np.linalg.svd(a, compute_uv=False), atol=1e-12)


def test_svd_zero_matrix_rejected():
    with pytest.raises(ShapeMismatch):
        linalg.svd(np.zeros((2, 2)))


def test_svd_pair_phase_shared():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    s = linalg.svd(a)
    for col in s.u.T:
        p = linalg.pivot_index(col)
        assert abs(col[p].imag) < 1e-15 and col[p].real > 0


def test_complete_basis_keeps_input_columns():
    rng = np.random.default_rng(1)
    q = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    full = linalg.complete_basis(q[:, :2], 4)
    assert np.array_equal(full[:, :2], q[:, :2])
    assert linalg.is_unitary(full, 1e-12)


def test_complete_basis_prefers_candidates():
    e = np.eye(3, dtype=complex)
    cand = np.array([0, 1, 1], dtype=complex) / np.sqrt(2)
    full = linalg.complete_basis(e[:, :1], 3, candidates=cand)
    assert np.allclose(full[:, 1], cand)
    assert linalg.is_unitary(full, 1e-12)


def test_complete_basis_from_nothing_is_identity():
    assert np.array_equal(linalg.complete_basis(np.zeros((3, 0)), 3), np.eye(3))


def test_complete_basis_errors():
    with pytest.raises(NotOrthonormal):
        linalg.complete_basis(np.array([[1.0], [1.0]]), 2)
    with pytest.raises(ShapeMismatch):
        linalg.complete_basis(np.eye(3)[:, :1], 2)


def test_extend_orthonormal_skips_dependent_vectors():
    e = np.eye(3, dtype=complex)
    out = linalg.extend_orthonormal(e[:, :1], np.column_stack([e[:, 0], 2 * e[:, 0], e[:, 2]]))
    assert out.shape == (3, 2)
    assert np.allclose(out[:, 1], e[:, 2])


def test_rank_deficient_completion_is_reported():
    # with a huge tolerance nothing survives Gram-Schmidt
    with pytest.raises(RankDeficient):
        linalg.complete_basis(np.eye(2)[:, :1], 2, tol=10.0)


def test_frobenius_distance_and_is_unitary():
    assert linalg.frobenius_distance(np.eye(2), np.zeros((2, 2))) == pytest.approx(np.sqrt(2))
    with pytest.raises(ShapeMismatch):
        linalg.frobenius_distance(np.eye(2), np.eye(3))
    assert linalg.is_unitary(np.array([[0, 1j], [1j, 0]]))
    assert not linalg.is_unitary(np.array([[1, 1], [0, 1]]))
