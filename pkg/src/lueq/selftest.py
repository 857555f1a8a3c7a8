"""Seeded orbit round-trips and perturbed negatives, used by ``lueq orbit-test``."""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .equivalence import EquivalenceConfig, decide_equivalence
from .states import (
    BipartiteDims,
    DensityMatrix,
    WernerParams,
    apply_local_unitary,
    from_spectrum,
    random_density,
    random_local_unitary,
    werner,
)


def perturb_spectrum(rho: DensityMatrix, index: int = 0, delta: float = 1e-3) -> DensityMatrix:
    """Shift eigenvalue ``index`` (descending, zeros included) by ``delta`` and renormalize.

    Eigenvectors are kept.  For a pure state shift a zero eigenvalue
    (``index >= 1``): rescaling the only nonzero one changes nothing.
    """
    eig = linalg.eigh(rho.mat)
    lam = eig.eigenvalues.copy()
    lam[index] += delta
    lam = np.clip(lam, 0.0, None)
    return from_spectrum(lam / lam.sum(), eig.eigenvectors, rho.dims)


def orbit_pair(dims: BipartiteDims, rank: int, seed):
    """(rho, (U (x) V) rho (U (x) V)^H, (U, V)) for a random state and Haar local unitaries."""
    ss = np.random.SeedSequence(seed if isinstance(seed, (list, tuple)) else [seed])
    s_state, s_lu = ss.spawn(2)
    rho = random_density(dims, rank, np.random.default_rng(s_state))
    lu = random_local_unitary(dims, np.random.default_rng(s_lu))
    return rho, apply_local_unitary(rho, lu), lu


@dataclass
class OrbitTestSummary:
    trials: int = 0
    passed: int = 0
    max_residual: float = 0.0
    histogram: Counter = field(default_factory=Counter)
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def record(self, label: str, verdict, expected: tuple[str, ...]) -> None:
        self.trials += 1
        key = verdict.kind
        if verdict.kind == "Inequivalent":
            key = f"Inequivalent/{verdict.witness}"
        self.histogram[f"{label}: {key}"] += 1
        if verdict.kind == "Equivalent":
            self.max_residual = max(self.max_residual, verdict.residual)
        if verdict.kind in expected:
            self.passed += 1
        else:
            self.failures.append((label, key))

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "histogram": dict(sorted(self.histogram.items())),
            "failures": [list(f) for f in self.failures],
            "seconds": round(self.seconds, 3),
            "ok": self.ok,
        }


def run_orbit_test(dims_list, trials: int = 100, seed: int = 0, config: EquivalenceConfig | None = None):
    """Per dims: ``trials`` orbit pairs (ranks cycle over 1..mn) and as many spectrum-perturbed pairs.

    (2, 2) also gets degenerate Werner pairs (e = 0), where only Equivalent or
    Undecided is acceptable.
    """
    config = config or EquivalenceConfig(seed=seed)
    summary = OrbitTestSummary()
    start = time.perf_counter()
    for dims in dims_list:
        dims = BipartiteDims(*dims)
        tag = f"{dims.m}x{dims.n}"
        for t in range(trials):
            rank = 1 + t % dims.total
            rho, rho2, _ = orbit_pair(dims, rank, [seed, dims.m, dims.n, t])
            summary.record(f"{tag} orbit", decide_equivalence(rho, rho2, config), ("Equivalent",))
            shifted = perturb_spectrum(rho2, index=(t + 1) % dims.total)
            summary.record(f"{tag} perturbed", decide_equivalence(rho, shifted, config), ("Inequivalent",))
        if (dims.m, dims.n) == (2, 2):
            rng = np.random.default_rng([seed, 22])
            for t in range(max(1, trials // 10)):
                w = werner(WernerParams(0.0, float(rng.uniform(0, 1))))
                w2 = apply_local_unitary(w, random_local_unitary(dims, rng))
                summary.record(f"{tag} werner", decide_equivalence(w, w2, config), ("Equivalent", "Undecided"))
    summary.seconds = time.perf_counter() - start
    return summary
