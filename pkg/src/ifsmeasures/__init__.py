"""Measures induced by Cuntz-algebra representations built from filter banks.

The package computes the depth-k atomic approximants of the scalar measures
``mu_f(E) = ||P(E) f||^2`` attached to an N-channel filter bank, together with
certified error bounds, classical Hutchinson fixed-point measures for affine
IFS on the line, and a finite-resolution cyclicity test.
"""

from .errors import (
    ChannelOutOfRange,
    DepthMismatch,
    DepthOverflow,
    IFSMeasureError,
    MalformedBank,
    NotUnitVector,
    WindowTooSmall,
)
from .filterbank import (
    FilterBank,
    LaurentPolynomial,
    ValidationReport,
    fourier_basis_bank,
    monomial_bank,
    random_paraunitary_bank,
    validate_filterbank,
)
from .cuntz import (
    CoeffVector,
    CuntzReport,
    EigenSolution,
    apply_s,
    apply_s_star,
    solve_joint_eigenproblem,
    verify_cuntz_relations,
)
from .nadic_measure import (
    AtomicMeasure,
    AtomTree,
    NAdicAddress,
    atom_tree,
    cdf,
    fourier_error_bound,
    fourier_of_atoms,
    fourier_transfer,
    integrate,
    refine,
    refinement_residual,
    word_projection_gram,
)
from .hutchinson import (
    AffineIFS,
    AffineMap,
    PointMassCloud,
    attractor_cover,
    cascade,
    chaos_game,
    invariant_interval,
    self_similarity_residual,
    solve_moments,
)
from .diagnostics import (
    CyclicityReport,
    RadonNikodymProfile,
    convergence_profile,
    cyclicity_test,
    eigen_cross_check,
    pushforward_measure,
    radon_nikodym_profile,
)

__version__ = "0.1.0"
