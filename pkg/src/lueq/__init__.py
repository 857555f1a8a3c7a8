"""Local-unitary equivalence of bipartite mixed states.

A state's representation (spectrum, Schmidt data of each eigenvector, and
coordinates of the Schmidt vectors in bases anchored on the first
eigenvector) is an LU invariant up to a residual gauge group.  This package
computes representations, enumerates the gauge, and decides whether two
states are related by U (x) V, returning a certificate or a witness.
"""
from .equivalence import (
    Equivalent,
    EquivalenceConfig,
    Inequivalent,
    PhaseSolution,
    Undecided,
    WitnessKind,
    construct_certificate,
    decide_equivalence,
    optimize_alignment,
    orbit_dimension,
    schmidt_gate,
    solve_phase_alignment,
    spectral_gate,
    verify_certificate,
)
from .representation import (
    GaugeDescriptor,
    Representation,
    RepresentationItem,
    apply_gauge,
    build_representation,
    canonical_form,
    gauge_descriptor,
    random_gauge_element,
    reconstruct,
)
from .schmidt import SchmidtDecomposition, schmidt_decompose, schmidt_rank
from .states import (
    BipartiteDims,
    DensityMatrix,
    LocalUnitary,
    WernerParams,
    apply_local_unitary,
    partial_traces,
    random_density,
    random_local_unitary,
    validate,
    werner,
)
from .tolerances import ToleranceConfig

__version__ = "0.1.0"
