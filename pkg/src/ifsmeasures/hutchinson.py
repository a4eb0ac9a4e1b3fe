"""Scalar-weight affine IFS on the real line and their invariant measures.

The fixed point ``mu = sum_i p_i mu o sigma_i^-1`` is approximated three ways:
by the deterministic cascade (k-fold push of a point mass), by the chaos
game, and through its moments, which satisfy a triangular linear recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import wasserstein_distance

from .errors import DepthOverflow

NODE_CAP = 10**7
MERGE_TOL = 1e-14


@dataclass(frozen=True)
class AffineMap:
    """``x -> a*x + b`` with ``|a| < 1``."""

    a: float
    b: float

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise ValueError(f"map is not contractive: |a| = {abs(self.a)}")

    def __call__(self, x):
        return self.a * x + self.b

    @property
    def fixed_point(self):
        return self.b / (1 - self.a)


@dataclass(frozen=True)
class AffineIFS:
    maps: tuple[AffineMap, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "weights", tuple(self.weights))
        if not self.maps:
            raise ValueError("IFS needs at least one map")
        if len(self.maps) != len(self.weights):
            raise ValueError("one weight per map required")
        if any(p < 0 for p in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(float(p) for p in self.weights) - 1) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)}, not 1")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], weights: Sequence[float]) -> "AffineIFS":
        return cls(tuple(AffineMap(a, b) for a, b in pairs), tuple(weights))

    @classmethod
    def nadic(cls, n: int, weights: Sequence[float] | None = None) -> "AffineIFS":
        """``sigma_j(x) = (x + j)/N`` with the given (default uniform) weights."""
        if weights is None:
            weights = [1.0 / n] * n
        return cls(tuple(AffineMap(1.0 / n, j / n) for j in range(n)), tuple(weights))

    def __len__(self):
        return len(self.maps)

    @property
    def contraction(self) -> float:
        return max(abs(float(m.a)) for m in self.maps)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([float(m.a) for m in self.maps])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([float(m.b) for m in self.maps])


@dataclass
class PointMassCloud:
    positions: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).ravel()
        self.masses = np.asarray(self.masses, dtype=np.float64).ravel()
        if self.positions.shape != self.masses.shape:
            raise ValueError("positions and masses differ in length")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("non-finite position")
        if np.any(self.masses < 0):
            raise ValueError("negative mass")

    def __len__(self):
        return self.positions.size

    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def moment(self, r: int) -> float:
        return float(np.sum(self.masses * self.positions**r))

    def push(self, ifs: AffineIFS) -> "PointMassCloud":
        """One application of the Hutchinson operator ``sum_i p_i (. o sigma_i^-1)``."""
        pos, mass = [], []
        for m, p in zip(ifs.maps, ifs.weights):
            if p == 0:
                continue
            pos.append(float(m.a) * self.positions + float(m.b))
            mass.append(float(p) * self.masses)
        return merge_atoms(np.concatenate(pos), np.concatenate(mass))


def merge_atoms(positions: np.ndarray, masses: np.ndarray, tol: float = MERGE_TOL) -> PointMassCloud:
    """Sort atoms and add together masses of neighbours closer than ``tol``."""
    order = np.argsort(positions, kind="stable")
    pos, mass = positions[order], masses[order]
    if pos.size == 0:
        return PointMassCloud(pos, mass)
    new_group = np.concatenate([[True], np.diff(pos) > tol])
    starts = np.flatnonzero(new_group)
    return PointMassCloud(pos[starts], np.add.reduceat(mass, starts))


def cascade(ifs: AffineIFS, k: int, seed: float = 0.0, cap: int = NODE_CAP) -> PointMassCloud:
    """The k-th Hutchinson iterate of ``delta_seed``.

    Atoms sit at ``sigma_{a_1} o ... o sigma_{a_k}(seed)`` with mass
    ``prod p_{a_i}``; zero-weight branches are pruned and coincident atoms
    merged.

    Raises
    ------
    DepthOverflow
        If a level would hold more than ``cap`` atoms.
    """
    if k < 0:
        raise ValueError("depth must be >= 0")
    live = sum(1 for p in ifs.weights if p > 0)
    cloud = PointMassCloud(np.array([float(seed)]), np.array([1.0]))
    for level in range(k):
        if len(cloud) * live > cap:
            raise DepthOverflow(f"{len(cloud) * live} atoms at depth {level + 1} exceed cap {cap}")
        cloud = cloud.push(ifs)
    return cloud


@dataclass
class ChaosGameResult:
    n_samples: int
    mean: float
    variance: float
    samples: np.ndarray | None = field(default=None, repr=False)
    histogram: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def moment(self, r: int) -> float:
        if self.samples is None:
            raise ValueError("samples were not kept")
        return float(np.mean(self.samples**r))

    def moment_stderr(self, r: int) -> float:
        if self.samples is None:
            raise ValueError("samples were not kept")
        return float(np.std(self.samples**r) / math.sqrt(self.n_samples))


def chaos_game(
    ifs: AffineIFS,
    n_samples: int,
    burn_in: int = 100,
    rng_seed: int = 0,
    start: float | None = None,
    keep_samples: bool = True,
    bins: int | None = None,
) -> ChaosGameResult:
    """Random iteration ``x <- sigma_J(x)`` with ``J`` drawn from the weights.

    The stream is reproducible for a fixed ``rng_seed`` (numpy PCG64).  The
    walk starts at ``start`` (default: fixed point of the first map with
    positive weight) and the first ``burn_in`` iterates are discarded.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    p = np.array([float(w) for w in ifs.weights])
    if not np.any(p > 0):
        raise ValueError("at least one weight must be positive")
    rng = np.random.default_rng(rng_seed)
    total = n_samples + burn_in
    idx = rng.choice(len(p), size=total, p=p / p.sum())
    a = ifs.slopes[idx].tolist()
    b = ifs.offsets[idx].tolist()
    if start is None:
        start = float(ifs.maps[int(np.flatnonzero(p > 0)[0])].fixed_point)
    x = float(start)
    out = np.empty(total)
    for i in range(total):
        x = a[i] * x + b[i]
        out[i] = x
    samples = out[burn_in:]
    hist = np.histogram(samples, bins=bins) if bins else None
    return ChaosGameResult(
        n_samples=n_samples,
        mean=float(np.mean(samples)),
        variance=float(np.var(samples)),
        samples=samples if keep_samples else None,
        histogram=hist,
    )


def solve_moments(ifs: AffineIFS, max_order: int) -> list:
    """Moments ``m_r = int x^r dmu`` of the invariant measure, r = 0..max_order.

    Integrating ``x^r`` against both sides of the fixed-point identity gives

        m_r (1 - sum_i p_i a_i^r) = sum_i p_i sum_{s<r} C(r,s) a_i^s b_i^(r-s) m_s.

    Arithmetic follows the input number type, so ``Fraction`` maps and weights
    give exact rational moments.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    m = [1]
    for r in range(1, max_order + 1):
        rhs = 0
        denom = 1
        for mp, p in zip(ifs.maps, ifs.weights):
            if p == 0:
                continue
            denom -= p * mp.a**r
            rhs += p * sum(math.comb(r, s) * mp.a**s * mp.b ** (r - s) * m[s] for s in range(r))
        m.append(rhs / denom)
    return m


def self_similarity_residual(ifs: AffineIFS, cloud: PointMassCloud) -> float:
    """W1 distance between the cloud and its image under the Hutchinson operator."""
    if len(cloud) == 0:
        return 0.0
    image = cloud.push(ifs)
    return float(wasserstein_distance(cloud.positions, image.positions, cloud.masses, image.masses))


def invariant_interval(ifs: AffineIFS, tol: float = 1e-15, max_iter: int = 100_000) -> tuple[float, float]:
    """Convex hull of the attractor, the smallest interval ``I`` with ``hull(U sigma_i(I)) = I``.

    Iterates the interval map from the hull of the fixed points, which lies
    inside the attractor hull, so the iterates increase to it.
    """
    fps = [float(m.fixed_point) for m in ifs.maps]
    lo, hi = min(fps), max(fps)
    a, b = ifs.slopes, ifs.offsets
    for _ in range(max_iter):
        ends = np.concatenate([a * lo + b, a * hi + b])
        new_lo, new_hi = float(ends.min()), float(ends.max())
        if abs(new_lo - lo) <= tol * max(1.0, abs(lo)) and abs(new_hi - hi) <= tol * max(1.0, abs(hi)):
            return new_lo, new_hi
        lo, hi = new_lo, new_hi
    return lo, hi


@dataclass
class AttractorCover:
    interval: tuple[float, float]
    depth: int
    intervals: np.ndarray  # shape (N^k, 2), rows in word order
    max_diameter: float
    diameter_bound: float
    non_overlapping: bool
    overlaps: list[tuple[int, int]]

    @property
    def complete(self) -> bool:
        return self.max_diameter <= self.diameter_bound * (1 + 1e-12) + 1e-15


def attractor_cover(ifs: AffineIFS, k: int, touch_tol: float = 1e-12) -> AttractorCover:
    """Images ``sigma_{i_1} o ... o sigma_{i_k}([L, U])`` of the attractor hull.

    Intervals that only share an endpoint count as non-overlapping.
    """
    if k < 1:
        raise ValueError("depth must be >= 1")
    n = len(ifs)
    if n**k > NODE_CAP:
        raise DepthOverflow(f"{n**k} intervals exceed cap {NODE_CAP}")
    lo, hi = invariant_interval(ifs)
    a, b = ifs.slopes, ifs.offsets
    ivs = np.array([[lo, hi]])
    for _ in range(k):
        # sigma_{i_1} o ... : the newest map is applied to the outside
        left = a[:, None] * ivs[None, :, 0] + b[:, None]
        right = a[:, None] * ivs[None, :, 1] + b[:, None]
        ivs = np.stack([np.minimum(left, right), np.maximum(left, right)], axis=-1).reshape(-1, 2)
    diam = ivs[:, 1] - ivs[:, 0]
    order = np.argsort(ivs[:, 0], kind="stable")
    overlaps = []
    reach_end, reach_idx = -np.inf, -1
    for i in order:
        if ivs[i, 0] < reach_end - touch_tol:
            overlaps.append((int(reach_idx), int(i)))
        if ivs[i, 1] > reach_end:
            reach_end, reach_idx = ivs[i, 1], i
    return AttractorCover(
        interval=(lo, hi),
        depth=k,
        intervals=ivs,
        max_diameter=float(diam.max()),
        diameter_bound=ifs.contraction**k * (hi - lo),
        non_overlapping=not overlaps,
        overlaps=overlaps,
    )
