"""Finite-resolution cyclicity test and cross-module consistency checks.

A unit vector f is cyclic for the algebra generated by the word projections
iff every channel pushforward ``mu_f o sigma_j^-1 = mu_{S_j f}`` is absolutely
continuous with respect to ``mu_f`` (given that the algebra is maximal
abelian).  At depth k only one direction is decidable: an N-adic cell that
carries pushforward mass but no ``mu_f`` mass is a conclusive violation, while
the absence of such cells is only evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuntz import CoeffVector, EigenSolution, apply_s, solve_joint_eigenproblem
from .errors import DepthMismatch, NotUnitVector
from .filterbank import FilterBank
from .hutchinson import AffineIFS, cascade
from .nadic_measure import NODE_CAP, AtomicMeasure, NAdicAddress, atom_tree, build_tree, cdf

AC_TOL = 1e-12

NO_VIOLATION = "NO_VIOLATION_AT_LEVEL"
VIOLATION = "VIOLATION"
CAVEAT = (
    "valid under the standing hypothesis that the von Neumann algebra generated by the "
    "word projections is maximal abelian; a VIOLATION is conclusive (f is not cyclic), "
    "NO_VIOLATION_AT_LEVEL is evidence at this depth only, never a proof of cyclicity"
)


def pushforward_measure(fb: FilterBank, f: CoeffVector, j: int, k: int, cap: int = NODE_CAP) -> AtomicMeasure:
    """``mu_f o sigma_j^-1`` at depth k, computed as ``mu_{S_j f}^(k)``."""
    return atom_tree(fb, apply_s(fb, j, f), k, cap=cap)


def pushforward_by_prepend(fb: FilterBank, f: CoeffVector, j: int, k: int, cap: int = NODE_CAP) -> AtomicMeasure:
    """Same measure from ``mu_f^(k-1)`` by prefixing digit j to every address."""
    if k < 1:
        raise ValueError("depth must be >= 1")
    return atom_tree(fb, f, k - 1, cap=cap).prepend_digit(j)


@dataclass(frozen=True)
class Witness:
    channel: int
    address: NAdicAddress
    push_mass: float
    base_mass: float

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "numerator": self.address.numerator,
            "depth": self.address.depth,
            "push_mass": self.push_mass,
            "base_mass": self.base_mass,
        }


@dataclass
class CyclicityReport:
    level: int
    violations: list[Witness]
    ac_tol: float = AC_TOL
    caveat: str = CAVEAT

    @property
    def verdict(self) -> str:
        return VIOLATION if self.violations else NO_VIOLATION

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "level": self.level,
            "witnesses": [w.to_dict() for w in self.violations],
            "ac_tol": self.ac_tol,
            "caveat": self.caveat,
        }


def cyclicity_test(fb: FilterBank, f: CoeffVector, k: int, ac_tol: float = AC_TOL, cap: int = NODE_CAP) -> CyclicityReport:
    """Look for depth-k cells where some ``mu_f o sigma_j^-1`` lives but ``mu_f`` does not.

    Raises
    ------
    NotUnitVector
        If ``| ||f|| - 1 | > 1e-10``.
    """
    if abs(f.norm() - 1) > 1e-10:
        raise NotUnitVector(f"||f|| = {f.norm()!r}")
    base = atom_tree(fb, f, k, cap=cap)
    witnesses = []
    for j in range(fb.n_channels):
        push = pushforward_measure(fb, f, j, k, cap=cap)
        union, pm, bm = push.aligned(base)
        bad = (pm > ac_tol) & (bm <= ac_tol)
        for num, a, b in zip(union[bad].tolist(), pm[bad].tolist(), bm[bad].tolist()):
            witnesses.append(Witness(j, NAdicAddress(fb.n_channels, k, num), a, b))
    return CyclicityReport(k, witnesses, ac_tol)


@dataclass
class RadonNikodymProfile:
    base: int
    depth: int
    ratios: list[tuple[NAdicAddress, float]]
    singular: list[tuple[NAdicAddress, float]] = field(default_factory=list)

    def ratio_values(self) -> np.ndarray:
        return np.array([r for _, r in self.ratios])

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "depth": self.depth,
            "ratios": [[a.numerator, r] for a, r in self.ratios],
            "singular": [[a.numerator, m] for a, m in self.singular],
        }


def radon_nikodym_profile(mu1: AtomicMeasure, mu2: AtomicMeasure, ac_tol: float = AC_TOL) -> RadonNikodymProfile:
    """Per-cell ratio ``mu1 / mu2``, the depth-k discretization of ``d mu1 / d mu2``.

    Ratios are listed where both masses are positive and ``mu2 > ac_tol``;
    cells with ``mu1 > ac_tol >= mu2`` are reported as singular-part witnesses.
    """
    if mu1.base != mu2.base or mu1.depth != mu2.depth:
        raise DepthMismatch(f"({mu1.base}, {mu1.depth}) vs ({mu2.base}, {mu2.depth})")
    union, a, b = mu1.aligned(mu2)
    ratios = []
    singular = []
    for num, m1, m2 in zip(union.tolist(), a.tolist(), b.tolist()):
        addr = NAdicAddress(mu1.base, mu1.depth, num)
        if m2 > ac_tol and m1 > 0:
            ratios.append((addr, m1 / m2))
        elif m1 > ac_tol and m2 <= ac_tol:
            singular.append((addr, m1))
    return RadonNikodymProfile(mu1.base, mu1.depth, ratios, singular)


@dataclass
class CrossCheckReport:
    found: bool
    depth: int
    eigen: EigenSolution
    max_mass_discrepancy: float | None = None
    positions_match: bool | None = None
    n_atoms: int | None = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "depth": self.depth,
            "eigen": self.eigen.to_dict(),
            "max_mass_discrepancy": self.max_mass_discrepancy,
            "positions_match": self.positions_match,
            "n_atoms": self.n_atoms,
            "message": self.message,
        }


def eigen_cross_check(fb: FilterBank, k: int, window: int | None = None, eigen_tol: float = 1e-8) -> CrossCheckReport:
    """Compare ``mu_f^(k)`` for a joint eigenvector f with the weighted N-adic cascade.

    If ``S_j* f = lambda_j f`` then ``mu_f`` is the Hutchinson measure of the
    maps ``(x + j)/N`` with weights ``|lambda_j|^2``; at depth k both sides are
    finite atomic measures on the same N-adic grid.  Cascade positions are
    snapped to the grid and must land within 1e-12 of it.
    """
    sol = solve_joint_eigenproblem(fb, window=window, eigen_tol=eigen_tol)
    if not sol.found:
        return CrossCheckReport(False, k, sol, message="no eigenvector found")
    n = fb.n_channels
    w = sol.weights()
    w = w / w.sum()
    cloud = cascade(AffineIFS.nadic(n, w.tolist()), k, seed=0.0)
    scaled = cloud.positions * float(n**k)
    nums = np.rint(scaled).astype(np.int64)
    on_grid = bool(np.all(np.abs(scaled - nums) <= 1e-12 * n**k))
    keep = cloud.masses > 0
    nums, masses = nums[keep], cloud.masses[keep]
    tree = atom_tree(fb, sol.vector, k)
    casc = AtomicMeasure(n, k, nums, masses)
    positions_match = on_grid and np.array_equal(
        tree.numerators[tree.masses > 1e-9], casc.numerators[casc.masses > 1e-9]
    )
    return CrossCheckReport(
        True,
        k,
        sol,
        max_mass_discrepancy=tree.max_mass_difference(casc),
        positions_match=bool(positions_match),
        n_atoms=len(tree),
        message="eigenvector found",
    )


@dataclass
class ConvergenceRow:
    depth: int
    sup_diff: float
    bound: float


def convergence_profile(fb: FilterBank, f: CoeffVector, k_min: int, k_max: int, grid: Sequence[float],
                        cap: int = NODE_CAP) -> list[ConvergenceRow]:
    """``sup_grid |F^(k) - F^(k_max)|`` for ``k = k_min .. k_max - 1``.

    Each row also carries ``N^-k``, the uniform-atom reference scale.
    """
    if not 0 <= k_min < k_max:
        raise ValueError("need 0 <= k_min < k_max")
    grid = np.asarray(grid, dtype=np.float64)
    tree = build_tree(fb, f, k_min, cap=cap)
    levels = {k_min: tree.measure}
    for k in range(k_min + 1, k_max + 1):
        tree = tree.refine()
        levels[k] = tree.measure
    ref = cdf(levels[k_max], grid)
    return [
        ConvergenceRow(k, float(np.max(np.abs(cdf(levels[k], grid) - ref), initial=0.0)), float(fb.n_channels) ** (-k))
        for k in range(k_min, k_max)
    ]
