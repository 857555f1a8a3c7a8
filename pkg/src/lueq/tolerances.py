"""Numerical tolerances, collected in one record that is passed explicitly."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    tol_rank: float = 1e-9  # eigenvalues / Schmidt coefficients below this are zero; Schmidt clustering
    tol_cluster: float = 1e-8  # eigenvalue clustering and the spectral gate
    tol_zero: float = 1e-10  # coordinate entries below this are structural zeros
    tol_accept: float = 1e-8  # certificate residual needed for an Equivalent verdict
    tol_modulus: float = 1e-6  # entrywise modulus agreement of coordinate matrices
    tol_phase: float = 1e-7  # angular inconsistency (radians) tolerated by the phase solver
    tol_schmidt: float = 1e-7  # Schmidt-coefficient agreement in the Schmidt gate
    tol_gap: float = 1e-6  # spectral gaps below this are too ill-conditioned to reject on
    tol_edge: float = 1e-4  # entries at least this large carry reliable phases
    tol_completion: float = 1e-7  # residual needed for a data vector to enter a completed basis
