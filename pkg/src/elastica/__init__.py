"""Verification toolkit: universal eigenvalue bounds for the vector operator
Δu + α grad(div u) on boxes, and sharp biharmonic lower bounds on spherical
caps, checked against self-computed spectra."""

__version__ = "0.1.0"

from .bounds import (BoundRecord, DomainGeometry, Spectrum, VerifyTolerance,
                     evaluate_all, yang_coefficient)
from .assembly import ElasticityProblem, assemble, reference_spectrum_alpha0
from .cap1d import CapProblem, solve_cap
from .eigensolve import EigenResult, banded_smallest, smallest_eigenpairs
from .sparse import BandedSymMatrix, SparseSymMatrix

__all__ = [
    "__version__",
    "BoundRecord", "DomainGeometry", "Spectrum", "VerifyTolerance",
    "evaluate_all", "yang_coefficient",
    "ElasticityProblem", "assemble", "reference_spectrum_alpha0",
    "CapProblem", "solve_cap",
    "EigenResult", "banded_smallest", "smallest_eigenpairs",
    "BandedSymMatrix", "SparseSymMatrix",
]
