"""Deciding local-unitary equivalence of two bipartite states.

The decision runs cheap invariant gates first (spectrum, Schmidt
coefficients), then aligns the two canonical representations over their
residual phase torus and turns the alignment into an explicit pair (U, V).
Degenerate strata, where the residual gauge contains U(d) blocks, go to a
multi-start Levenberg-Marquardt search on U(m) x U(n).  Every Equivalent
verdict is re-verified against the input matrices.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import expm
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp
from sympy.polys.domains import ZZ

from . import linalg
from .errors import DimsMismatch, NeedsFallback, ShapeMismatch
from .representation import Representation, build_representation, canonical_form
from .schmidt import cluster
from .states import DensityMatrix, LocalUnitary, haar_unitary, partial_traces, validate
from .tolerances import ToleranceConfig

log = logging.getLogger(__name__)


class WitnessKind(enum.Enum):
    SPECTRUM_MISMATCH = "SpectrumMismatch"
    SCHMIDT_MISMATCH = "SchmidtMismatch"
    MODULUS_MISMATCH = "ModulusMismatch"
    PHASE_OBSTRUCTION = "PhaseObstruction"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Equivalent:
    certificate: LocalUnitary
    residual: float
    method: str = "phase-alignment"

    kind = "Equivalent"


@dataclass(frozen=True)
class Inequivalent:
    witness: WitnessKind
    detail: str

    kind = "Inequivalent"


@dataclass(frozen=True)
class Undecided:
    reason: str
    best_residual: float

    kind = "Undecided"


Verdict = Union[Equivalent, Inequivalent, Undecided]


@dataclass(frozen=True)
class EquivalenceConfig:
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)
    restarts: int = 32
    max_iter: int = 2000
    seed: int = 0


@dataclass(frozen=True, eq=False)
class PhaseSolution:
    """Angles (radians) aligning two canonical representations.

    ``phi_a[r]`` and ``phi_b[c]`` act on the basis columns, ``psi[i]`` on
    eigenvector i.  ``residual`` is the largest angular inconsistency over
    entries carrying reliable phases; ``free_choices`` counts unknowns that
    had to be fixed by hand because propagation stalled.
    """

    phi_a: np.ndarray
    phi_b: np.ndarray
    psi: np.ndarray
    residual: float
    free_choices: int = 0


def _check_dims(rep: Representation, rep2: Representation):
    if rep.dims != rep2.dims:
        raise DimsMismatch(f"dims differ: {tuple(rep.dims)} vs {tuple(rep2.dims)}")


def _padded(values, size):
    out = np.zeros(size)
    out[: len(values)] = values
    return out


def _gaps(values) -> np.ndarray:
    """Distance from each entry of a descending list to its nearest neighbour."""
    values = np.asarray(values, dtype=float)
    gaps = np.full(len(values), np.inf)
    if len(values) > 1:
        d = -np.diff(values)
        gaps[:-1] = d
        gaps[1:] = np.minimum(gaps[1:], d)
    return gaps


def spectral_gate(rep: Representation, rep2: Representation, tol: ToleranceConfig | None = None):
    """Return an Inequivalent verdict if the nonzero spectra differ, else None."""
    tol = tol or ToleranceConfig()
    _check_dims(rep, rep2)
    size = rep.dims.total
    a, b = _padded(rep.eigenvalues, size), _padded(rep2.eigenvalues, size)
    diff = np.abs(a - b)
    if diff.max() >= tol.tol_cluster:
        j = int(np.argmax(diff))
        return Inequivalent(
            WitnessKind.SPECTRUM_MISMATCH,
            f"eigenvalue {j}: {a[j]:.12g} vs {b[j]:.12g} (ranks {rep.rank} vs {rep2.rank})",
        )
    return None


def schmidt_gate(rep: Representation, rep2: Representation, tol: ToleranceConfig | None = None):
    """Compare Schmidt coefficients eigenvector by eigenvector.

    Only eigenvectors that are determined up to phase (isolated,
    well-separated eigenvalues) can produce a rejection.  Inside degenerate
    clusters the multisets of coefficient lists are compared, and a mismatch
    raises :class:`NeedsFallback` because the eigenvectors there depend on a
    basis choice.
    """
    tol = tol or ToleranceConfig()
    _check_dims(rep, rep2)
    width = min(rep.dims.m, rep.dims.n)
    gaps = np.minimum(_gaps(rep.eigenvalues), _gaps(rep2.eigenvalues)[: rep.rank])
    loose = []
    for block in rep.eigenvalue_blocks:
        if len(block) == 1 and gaps[block[0]] >= tol.tol_gap:
            i = block[0]
            mu = _padded(rep.items[i].coefficients, width)
            mu2 = _padded(rep2.items[i].coefficients, width)
            if np.max(np.abs(mu - mu2)) >= tol.tol_schmidt:
                return Inequivalent(
                    WitnessKind.SCHMIDT_MISMATCH,
                    f"eigenvalue {rep.items[i].eigenvalue:.12g}: Schmidt coefficients "
                    f"{np.round(rep.items[i].coefficients, 12).tolist()} vs "
                    f"{np.round(rep2.items[i].coefficients, 12).tolist()}",
                )
        else:
            loose.append(block)
    for block in loose:
        lists = sorted(tuple(_padded(rep.items[i].coefficients, width)) for i in block)
        lists2 = sorted(tuple(_padded(rep2.items[i].coefficients, width)) for i in block)
        if np.max(np.abs(np.array(lists) - np.array(lists2))) >= tol.tol_schmidt:
            raise NeedsFallback(f"Schmidt data differ inside degenerate eigenvalue cluster {block}")
    return None


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % (2 * np.pi) - np.pi


def _propagate(equations, n_unknowns, roots):
    """Solve sum of three angles == target (mod 2 pi) by greedy propagation.

    ``equations`` holds (unknown indices, target, weight); heavier equations
    are used first.  Returns the angle array and the number of unknowns that
    had to be set to zero because no equation pinned them.
    """
    values = np.full(n_unknowns, np.nan)
    for r in roots:
        values[r] = 0.0
    order = sorted(range(len(equations)), key=lambda e: -equations[e][2])
    involved = sorted({u for eq in equations for u in eq[0]})
    free = 0
    while True:
        progress = True
        while progress:
            progress = False
            for e in order:
                unknowns, target, _ = equations[e]
                missing = [u for u in unknowns if np.isnan(values[u])]
                if len(missing) == 1:
                    known = sum(values[u] for u in unknowns if u != missing[0])
                    values[missing[0]] = _wrap(target - known)
                    progress = True
                    break
        pending = [u for u in involved if np.isnan(values[u])]
        if not pending:
            break
        values[pending[0]] = 0.0
        free += 1
    values[np.isnan(values)] = 0.0
    return values, free


def _solve_torus(equations, n_unknowns, roots):
    """Exact solve of A x = b (mod 2 pi) for integer A via the Smith form U A V = D.

    Greedy propagation cannot see cycles that pin an angle only modulo
    2 pi / d (for instance 2 psi = t); in the diagonal system every branch
    is a solution, so taking the principal one is enough.  Returns the
    angles and the dimension of the continuous solution set.
    """
    cols = [u for u in sorted({u for eq in equations for u in eq[0]}) if u not in roots]
    values = np.zeros(n_unknowns)
    if not cols:
        return values, 0
    pos = {u: j for j, u in enumerate(cols)}
    a = [[0] * len(cols) for _ in equations]
    for row, (unknowns, _, _) in zip(a, equations):
        for u in unknowns:
            if u in pos:
                row[pos[u]] += 1
    b = np.array([eq[1] for eq in equations])
    d, u_mat, v_mat = smith_normal_decomp(Matrix(a), domain=ZZ)
    u_np = np.array(u_mat.tolist(), dtype=float)
    v_np = np.array(v_mat.tolist(), dtype=float)
    c = u_np @ b
    diag = [int(d[j, j]) for j in range(min(d.shape))]
    rank = sum(1 for x in diag if x != 0)
    y = np.zeros(len(cols))
    for j in range(rank):
        y[j] = _wrap(c[j]) / diag[j]
    values[cols] = _wrap(v_np @ y)
    return values, len(cols) - rank


def solve_phase_alignment(rep: Representation, rep2: Representation, tol: ToleranceConfig | None = None):
    """Align two representations over their residual phase torus.

    Works on the per-eigenvector coefficient matrices C_i = X_i diag(mu_i) Y_i^T,
    which absorb the Schmidt-pair phases and any U(d) rotation inside a
    degenerate Schmidt block.  For equivalent states

        C2_i[r, c] = exp(i (psi_i + phi_a[r] + phi_b[c])) C_i[r, c].

    Returns a :class:`PhaseSolution`, or an :class:`Inequivalent` verdict
    (ModulusMismatch / PhaseObstruction) when the data rule equivalence out.
    Raises :class:`NeedsFallback` on degenerate strata, where the system
    above does not capture the whole gauge.
    """
    tol = tol or ToleranceConfig()
    _check_dims(rep, rep2)
    if rep.rank != rep2.rank:
        raise NeedsFallback("ranks differ")
    for r in (rep, rep2):
        if r.eigenvalues_degenerate:
            raise NeedsFallback("degenerate eigenvalues")
        if r.degenerate_anchor:
            raise NeedsFallback("degenerate anchor Schmidt coefficients")
    rep, rep2 = canonical_form(rep, tol), canonical_form(rep2, tol)
    if not (rep.gauge_fixed and rep2.gauge_fixed):
        raise NeedsFallback("basis completion not pinned by state data")
    if rep.items[0].schmidt.rank != rep2.items[0].schmidt.rank:
        raise NeedsFallback("anchor Schmidt ranks differ")

    conditioned = all(
        _gaps(r.eigenvalues).min() >= tol.tol_gap and _gaps(r.items[0].coefficients).min() >= tol.tol_gap
        for r in (rep, rep2)
    )

    def reject(kind, detail):
        if conditioned:
            return Inequivalent(kind, detail)
        raise NeedsFallback(f"ill-conditioned spectrum, not rejecting on {kind}: {detail}")

    m, n = rep.dims
    cs = [it.coefficient_matrix() for it in rep.items]
    cs2 = [it.coefficient_matrix() for it in rep2.items]
    for i, (c, c2) in enumerate(zip(cs, cs2)):
        dev = np.abs(np.abs(c) - np.abs(c2))
        if dev.max() > tol.tol_modulus:
            r, col = np.unravel_index(int(np.argmax(dev)), dev.shape)
            return reject(
                WitnessKind.MODULUS_MISMATCH,
                f"eigenvector {i}, entry ({r}, {col}): |C| = {abs(c[r, col]):.12g} vs {abs(c2[r, col]):.12g}",
            )

    equations = []
    for i, (c, c2) in enumerate(zip(cs, cs2)):
        weight = np.minimum(np.abs(c), np.abs(c2))
        for r, col in zip(*np.nonzero(weight > tol.tol_zero)):
            target = np.angle(c2[r, col]) - np.angle(c[r, col])
            equations.append(((int(r), m + int(col), m + n + i), float(target), float(weight[r, col])))
    n_unknowns, roots = m + n + rep.rank, (m + n, 0)

    def check(values):
        phi_a, phi_b, psi = values[:m], values[m : m + n], values[m + n :]
        residual, small, worst = 0.0, 0.0, None
        for i, (c, c2) in enumerate(zip(cs, cs2)):
            theta = psi[i] + phi_a[:, None] + phi_b[None, :]
            weight = np.minimum(np.abs(c), np.abs(c2))
            reliable = weight >= tol.tol_edge
            if reliable.any():
                ang = np.abs(_wrap(np.angle(c2) - np.angle(c) - theta))[reliable]
                if ang.max() > residual:
                    residual, worst = float(ang.max()), i
            faint = (weight > tol.tol_zero) & ~reliable
            if faint.any():
                small = max(small, float(np.abs(c2 - np.exp(1j * theta) * c)[faint].max()))
        ok = residual <= tol.tol_phase and small <= tol.tol_modulus
        detail = f"angular inconsistency {residual:.3e} rad (eigenvector {worst}), faint-entry mismatch {small:.3e}"
        return ok, residual, detail

    # psi_0 and phi_a[0] absorb the two global phases exp(ia) U, exp(ib) V
    values, free = _propagate(equations, n_unknowns, roots)
    ok, residual, detail = check(values)
    if not ok and free:
        # a stuck propagation may have picked the wrong branch of a cycle
        strong = [eq for eq in equations if eq[2] >= tol.tol_edge] or equations
        values, free = _solve_torus(strong, n_unknowns, roots)
        ok, residual, detail = check(values)
    if not ok:
        if free:
            raise NeedsFallback(f"phase system underdetermined ({free} free directions); {detail}")
        return reject(WitnessKind.PHASE_OBSTRUCTION, detail)
    return PhaseSolution(values[:m], values[m : m + n], values[m + n :], residual, free)


def construct_certificate(rep: Representation, rep2: Representation, sol: PhaseSolution) -> LocalUnitary:
    """U = B2_a diag(e^{i phi_a}) B_a^H and V = B2_b diag(e^{i phi_b}) B_b^H."""
    _check_dims(rep, rep2)
    rep, rep2 = canonical_form(rep), canonical_form(rep2)
    u = (rep2.basis_a * np.exp(1j * sol.phi_a)) @ rep.basis_a.conj().T
    v = (rep2.basis_b * np.exp(1j * sol.phi_b)) @ rep.basis_b.conj().T
    return LocalUnitary(u, v)


def verify_certificate(rho: DensityMatrix, rho2: DensityMatrix, lu: LocalUnitary, tol=None) -> float:
    """Frobenius residual ||(U (x) V) rho (U (x) V)^H - rho2||; no thresholding."""
    if rho.mat.shape != rho2.mat.shape or lu.kron().shape != rho.mat.shape:
        raise ShapeMismatch("state and certificate shapes disagree")
    w = lu.kron()
    return linalg.frobenius_distance(w @ rho.mat @ w.conj().T, rho2.mat)


# -- optimizer fallback ------------------------------------------------------


def _antihermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for r in range(d):
        h = np.zeros((d, d), dtype=complex)
        h[r, r] = 1j
        basis.append(h)
    for r in range(d):
        for c in range(r + 1, d):
            h = np.zeros((d, d), dtype=complex)
            h[r, c], h[c, r] = 1.0, -1.0
            basis.append(h)
            h = np.zeros((d, d), dtype=complex)
            h[r, c] = h[c, r] = 1j
            basis.append(h)
    return basis


def _lifted_generators(m: int, n: int):
    ga, gb = _antihermitian_basis(m), _antihermitian_basis(n)
    lifted = [np.kron(h, np.eye(n)) for h in ga] + [np.kron(np.eye(m), h) for h in gb]
    return np.array(ga), np.array(gb), np.array(lifted)


def _tangent_map(rho_mat: np.ndarray, lifted: np.ndarray) -> np.ndarray:
    """Real matrix of (H1, H2) -> [H1 (x) I + I (x) H2, rho]; one column per generator."""
    comm = lifted @ rho_mat - rho_mat @ lifted
    return np.concatenate([comm.real.reshape(len(lifted), -1), comm.imag.reshape(len(lifted), -1)], axis=1).T


def _polar(u: np.ndarray) -> np.ndarray:
    w, _, zh = np.linalg.svd(u)
    return w @ zh


def _levenberg_marquardt(rho, target, u, v, gens, max_iter, goal):
    ga, gb, lifted = gens
    pa = len(ga)
    w = np.kron(u, v)
    cur = w @ rho @ w.conj().T
    diff = cur - target
    f = np.linalg.norm(diff)
    mu = None
    for _ in range(max_iter):
        if f < goal:
            break
        jac = _tangent_map(cur, lifted)
        res = np.concatenate([diff.real.ravel(), diff.imag.ravel()])
        jtj = jac.T @ jac
        grad = jac.T @ res
        if np.linalg.norm(grad) < 1e-15:
            break
        if mu is None:
            mu = 1e-3 * np.max(np.diag(jtj))
        step = np.linalg.solve(jtj + mu * np.eye(len(jtj)), -grad)
        u_new = expm(np.tensordot(step[:pa], ga, axes=1)) @ u
        v_new = expm(np.tensordot(step[pa:], gb, axes=1)) @ v
        w = np.kron(u_new, v_new)
        new = w @ rho @ w.conj().T
        f_new = np.linalg.norm(new - target)
        if f_new < f:
            u, v, cur, diff, f = u_new, v_new, new, new - target, f_new
            mu = max(mu / 3.0, 1e-15)
        else:
            mu *= 4.0
            if mu > 1e12:
                break
    return u, v


def _reduced_seed_frames(rho: DensityMatrix, rho2: DensityMatrix, tol: float = 1e-6):
    """Eigenframes of matching reduced states, or None when their spectra differ.

    A certificate must carry each reduced state of ``rho`` onto that of
    ``rho2``, so U = E2 G E^H with G block-unitary along eigenvalue clusters.
    """
    frames = []
    for r1, r2 in zip(partial_traces(rho), partial_traces(rho2)):
        e1, e2 = linalg.eigh(r1), linalg.eigh(r2)
        if np.max(np.abs(e1.eigenvalues - e2.eigenvalues)) > tol:
            return None
        frames.append((e1.eigenvectors, e2.eigenvectors, cluster(e1.eigenvalues, tol)))
    return frames


def _seeded_unitary(frame, rng) -> np.ndarray:
    vecs, vecs2, blocks = frame
    g = np.zeros((len(vecs), len(vecs)), dtype=complex)
    for block in blocks:
        idx = np.array(block)
        g[np.ix_(idx, idx)] = haar_unitary(len(block), rng)
    return vecs2 @ g @ vecs.conj().T


def optimize_alignment(rho: DensityMatrix, rho2: DensityMatrix, config: EquivalenceConfig | None = None):
    """Search U(m) x U(n) for a pair mapping ``rho`` onto ``rho2``.

    Restart 0 starts at the identity.  Later restarts start from seeded
    random points: three in four are drawn from the set of pairs carrying
    the reduced states of ``rho`` onto those of ``rho2`` (when these have
    equal spectra), the rest are Haar-random.  Returns Equivalent if some
    restart drives the residual below ``tol_accept``, otherwise Undecided.
    Never returns Inequivalent.
    """
    config = config or EquivalenceConfig()
    m, n = rho.dims
    gens = _lifted_generators(m, n)
    goal = config.tol.tol_accept / 10
    frames = _reduced_seed_frames(rho, rho2)
    best = (np.inf, None)
    for k in range(config.restarts):
        rng = np.random.default_rng([config.seed, k])
        if k == 0:
            u0, v0 = np.eye(m, dtype=complex), np.eye(n, dtype=complex)
        elif frames is not None and k % 4:
            u0, v0 = _seeded_unitary(frames[0], rng), _seeded_unitary(frames[1], rng)
        else:
            u0, v0 = haar_unitary(m, rng), haar_unitary(n, rng)
        u, v = _levenberg_marquardt(rho.mat, rho2.mat, u0, v0, gens, config.max_iter, goal)
        lu = LocalUnitary(_polar(u), _polar(v))
        res = verify_certificate(rho, rho2, lu)
        log.debug("restart %d: residual %.3e", k, res)
        if res < best[0]:
            best = (res, lu)
        if res < goal:
            break
    if best[0] < config.tol.tol_accept:
        return Equivalent(best[1], best[0], method="optimizer")
    return Undecided(f"optimizer floor after {config.restarts} restarts", best[0])


# -- top level ---------------------------------------------------------------


def decide_equivalence(rho: DensityMatrix, rho2: DensityMatrix, config: EquivalenceConfig | None = None) -> Verdict:
    """Decide whether rho2 = (U (x) V) rho (U (x) V)^H for some local unitaries."""
    config = config or EquivalenceConfig()
    tol = config.tol
    if rho.dims != rho2.dims:
        raise DimsMismatch(f"dims differ: {tuple(rho.dims)} vs {tuple(rho2.dims)}")
    rho = validate(rho.mat, rho.dims)
    rho2 = validate(rho2.mat, rho2.dims)
    rep, rep2 = build_representation(rho, tol), build_representation(rho2, tol)

    verdict = spectral_gate(rep, rep2, tol)
    if verdict is not None:
        return verdict
    reason = None
    try:
        verdict = schmidt_gate(rep, rep2, tol)
        if verdict is not None:
            return verdict
        sol = solve_phase_alignment(rep, rep2, tol)
        if isinstance(sol, Inequivalent):
            return sol
        lu = construct_certificate(rep, rep2, sol)
        residual = verify_certificate(rho, rho2, lu)
        if residual < tol.tol_accept:
            return Equivalent(lu, residual, method="phase-alignment")
        reason = f"phase certificate residual {residual:.3e} above tolerance"
    except NeedsFallback as exc:
        reason = str(exc)
    log.info("falling back to optimizer: %s", reason)
    return optimize_alignment(rho, rho2, config)


def orbit_dimension(rho: DensityMatrix, tol: float = 1e-9) -> int:
    """Real dimension of the local-unitary orbit through ``rho``.

    Numerical rank of (H1, H2) -> [H1 (x) I + I (x) H2, rho] over
    anti-Hermitian pairs, counting singular values above ``tol`` times the
    largest one.
    """
    m, n = rho.dims
    jac = _tangent_map(np.asarray(rho.mat), _lifted_generators(m, n)[2])
    if not np.any(np.abs(jac) > 1e-14):
        return 0
    sig = linalg.svd(jac).singular_values
    return int(np.sum(sig > tol * sig[0]))
