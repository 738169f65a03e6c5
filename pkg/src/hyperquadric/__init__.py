"""Harmonic sequences of exponential-polynomial curves in complex hyperquadrics.

Exact arithmetic on sums ``sum_k c_k exp(lambda z - conj(lambda) zbar)``, the
moduli of linearly full curves of constant curvature, the symmetric unitary
``W`` matrices that place them into a quadric, and mechanized classification
reports for small quadrics.
"""

from .catalog import CatalogEntry, InvalidParameters, UnknownCatalogEntry, catalog
from .classify import (
    ClassificationReport, clifford_theorem, q2_classification, q3_impossibility, q4_families,
    vandermonde_obstruction,
)
from .curves import Curve, apply_frame, build_v0, frame_fields, harmonic_sequence, verify_curve
from .exppoly import ExpPoly, bilinear_pair, hermitian_inner
from .kernels import BACKEND
from .moduli import ModuliSolution, SolverOptions, clifford, solve, solve_weights
from .quadric import (
    WMatrix, analyze_pattern, derive_constraints, frequency_classes, orthogonal_link, takagi,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CatalogEntry", "ClassificationReport", "Curve", "ExpPoly", "InvalidParameters",
    "ModuliSolution", "SolverOptions", "UnknownCatalogEntry", "WMatrix", "analyze_pattern",
    "apply_frame", "bilinear_pair", "build_v0", "catalog", "clifford", "clifford_theorem",
    "derive_constraints", "frame_fields", "frequency_classes", "harmonic_sequence",
    "hermitian_inner", "orthogonal_link", "q2_classification", "q3_impossibility", "q4_families",
    "solve", "solve_weights", "takagi", "vandermonde_obstruction", "verify_curve",
]
