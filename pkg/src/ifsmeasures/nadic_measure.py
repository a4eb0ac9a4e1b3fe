"""Depth-k atomic approximants of ``mu_f(E) = ||P(E) f||^2`` on [0, 1).

For a word ``alpha = (a_1, ..., a_k)`` the cylinder ``[x_k(alpha), x_k(alpha) + N^-k)``
with ``x_k(alpha) = sum_i a_i N^-i`` carries mass ``||S_{a_k}* ... S_{a_1}* f||^2``.
The approximant ``mu_f^(k)`` places that mass at the left endpoint.

Atom positions are kept as exact integer numerators over ``N^k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .cuntz import CoeffVector, adjoint_support, adjoint_window_matrix, apply_s, apply_s_star
from .errors import DepthMismatch, DepthOverflow
from .filterbank import COEFF_ZERO_TOL, FilterBank

NODE_CAP = 10**7
_MAX_NUMERATOR = 2**62


@dataclass(frozen=True, order=True)
class NAdicAddress:
    """The point ``numerator / base**depth`` with digits ``a_1 .. a_k``."""

    base: int
    depth: int
    numerator: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.numerator < self.base**self.depth:
            raise ValueError(f"numerator {self.numerator} out of range for {self.base}^{self.depth}")

    @classmethod
    def from_digits(cls, base: int, digits: Sequence[int]) -> "NAdicAddress":
        num = 0
        for d in digits:
            if not 0 <= d < base:
                raise ValueError(f"digit {d} outside 0..{base - 1}")
            num = num * base + int(d)
        return cls(base, len(digits), num)

    @property
    def digits(self) -> tuple[int, ...]:
        out = []
        num = self.numerator
        for _ in range(self.depth):
            num, d = divmod(num, self.base)
            out.append(d)
        return tuple(reversed(out))

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.base**self.depth)

    def __float__(self):
        return self.numerator / self.base**self.depth

    def prepend(self, digit: int) -> "NAdicAddress":
        """Address of ``sigma_digit(x) = (x + digit) / N``."""
        return NAdicAddress(self.base, self.depth + 1, digit * self.base**self.depth + self.numerator)


class AtomicMeasure:
    """Finite measure on N-adic points of a fixed depth.

    Atoms are stored as two parallel arrays, numerators (sorted, distinct) and
    masses (all positive).
    """

    def __init__(self, base: int, depth: int, numerators, masses, discarded_mass: float = 0.0):
        num = np.asarray(numerators, dtype=np.int64).ravel()
        mass = np.asarray(masses, dtype=np.float64).ravel()
        if num.shape != mass.shape:
            raise ValueError("numerators and masses differ in length")
        if np.any(mass < 0):
            raise ValueError("negative atom mass")
        keep = mass > 0
        num, mass = num[keep], mass[keep]
        order = np.argsort(num, kind="stable")
        num, mass = num[order], mass[order]
        if num.size and (num[0] < 0 or num[-1] >= base**depth):
            raise ValueError("numerator outside [0, N^k)")
        if np.any(np.diff(num) == 0):
            raise ValueError("duplicate atom address")
        self.base = int(base)
        self.depth = int(depth)
        self.numerators = num
        self.masses = mass
        self.discarded_mass = float(discarded_mass)

    def __len__(self):
        return self.numerators.size

    def __iter__(self) -> Iterator[tuple[NAdicAddress, float]]:
        for n, m in zip(self.numerators.tolist(), self.masses.tolist()):
            yield NAdicAddress(self.base, self.depth, n), m

    def __repr__(self):
        return f"AtomicMeasure(base={self.base}, depth={self.depth}, atoms={len(self)}, mass={self.total_mass():.12g})"

    @property
    def atoms(self) -> list[tuple[NAdicAddress, float]]:
        return list(self)

    @property
    def positions(self) -> np.ndarray:
        return self.numerators / float(self.base**self.depth)

    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def mass_at(self, numerator: int) -> float:
        i = np.searchsorted(self.numerators, numerator)
        if i < self.numerators.size and self.numerators[i] == numerator:
            return float(self.masses[i])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.numerators.tolist(), self.masses.tolist()))

    def aggregate(self, depth: int) -> "AtomicMeasure":
        """Coarsen to a smaller depth by summing atoms with a common prefix."""
        if depth > self.depth or depth < 0:
            raise DepthMismatch(f"cannot aggregate depth {self.depth} to {depth}")
        parents = self.numerators // self.base ** (self.depth - depth)
        uniq, inv = np.unique(parents, return_inverse=True)
        mass = np.bincount(inv, weights=self.masses, minlength=uniq.size)
        return AtomicMeasure(self.base, depth, uniq, mass, self.discarded_mass)

    def prepend_digit(self, digit: int) -> "AtomicMeasure":
        """Pushforward under ``sigma_digit(x) = (x + digit)/N``, exact on addresses."""
        if not 0 <= digit < self.base:
            raise ValueError(f"digit {digit} outside 0..{self.base - 1}")
        shift = digit * self.base**self.depth
        return AtomicMeasure(self.base, self.depth + 1, self.numerators + shift, self.masses, self.discarded_mass)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        _check_same_grid(self, other)
        num = np.concatenate([self.numerators, other.numerators])
        uniq, inv = np.unique(num, return_inverse=True)
        mass = np.bincount(inv, weights=np.concatenate([self.masses, other.masses]), minlength=uniq.size)
        return AtomicMeasure(self.base, self.depth, uniq, mass, self.discarded_mass + other.discarded_mass)

    def aligned(self, other: "AtomicMeasure") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Numerators in the union of supports and both mass vectors on it."""
        _check_same_grid(self, other)
        union = np.union1d(self.numerators, other.numerators)
        a = np.zeros(union.size)
        b = np.zeros(union.size)
        a[np.searchsorted(union, self.numerators)] = self.masses
        b[np.searchsorted(union, other.numerators)] = other.masses
        return union, a, b

    def total_variation(self, other: "AtomicMeasure") -> float:
        """``sum |self - other|`` over the union of atoms."""
        _, a, b = self.aligned(other)
        return float(np.sum(np.abs(a - b)))

    def max_mass_difference(self, other: "AtomicMeasure") -> float:
        _, a, b = self.aligned(other)
        return float(np.max(np.abs(a - b), initial=0.0))


def _check_same_grid(a: AtomicMeasure, b: AtomicMeasure):
    if a.base != b.base or a.depth != b.depth:
        raise DepthMismatch(f"base/depth ({a.base}, {a.depth}) vs ({b.base}, {b.depth})")


class AtomTree:
    """Leaves of the adjoint-word tree at one depth.

    Row ``r`` of ``vectors`` holds the coefficients of ``S_alpha* f`` on the
    integer window ``window``; ``numerators[r]`` is the address of ``alpha``.
    Rows appear in increasing address order (depth first, digit ascending).
    """

    def __init__(self, fb: FilterBank, depth: int, window: tuple[int, int], vectors: np.ndarray,
                 numerators: np.ndarray, prune_eps: float, discarded_mass: float, cap: int):
        self.fb = fb
        self.depth = depth
        self.window = window
        self.vectors = vectors
        self.numerators = numerators
        self.prune_eps = prune_eps
        self.discarded_mass = discarded_mass
        self.cap = cap
        self.masses = np.sum(vectors.real**2 + vectors.imag**2, axis=1)

    @classmethod
    def root(cls, fb: FilterBank, f: CoeffVector, prune_eps: float = 0.0, cap: int = NODE_CAP) -> "AtomTree":
        if not 0 <= prune_eps < 1:
            raise ValueError("prune_eps must lie in [0, 1)")
        if f.is_zero:
            return cls(fb, 0, (0, 0), np.zeros((0, 1), dtype=np.complex128), np.zeros(0, dtype=np.int64), prune_eps, 0.0, cap)
        vec = f.values[None, :].copy()
        tree = cls(fb, 0, (f.min_index, f.max_index), vec, np.zeros(1, dtype=np.int64), prune_eps, 0.0, cap)
        return tree._pruned()

    def _pruned(self) -> "AtomTree":
        drop = self.masses <= self.prune_eps
        if not np.any(drop):
            return self
        self.discarded_mass += float(np.sum(self.masses[drop]))
        self.vectors = self.vectors[~drop]
        self.numerators = self.numerators[~drop]
        self.masses = self.masses[~drop]
        return self

    @property
    def measure(self) -> AtomicMeasure:
        return AtomicMeasure(self.fb.n_channels, self.depth, self.numerators, self.masses, self.discarded_mass)

    def residual(self, digits: Sequence[int]) -> CoeffVector:
        """``S_alpha* f`` for a live leaf (zero vector if pruned)."""
        addr = NAdicAddress.from_digits(self.fb.n_channels, digits)
        if addr.depth != self.depth:
            raise DepthMismatch("word length differs from tree depth")
        i = np.searchsorted(self.numerators, addr.numerator)
        if i < self.numerators.size and self.numerators[i] == addr.numerator:
            return CoeffVector(self.window[0], self.vectors[i])
        return CoeffVector.zero()

    def refine(self) -> "AtomTree":
        """Extend every live leaf by one digit."""
        fb = self.fb
        n = fb.n_channels
        rows = self.numerators.size
        if rows * n > self.cap:
            raise DepthOverflow(f"{rows * n} nodes at depth {self.depth + 1} exceed cap {self.cap}")
        if n ** (self.depth + 1) >= _MAX_NUMERATOR:
            raise DepthOverflow(f"addresses at depth {self.depth + 1} overflow 64-bit numerators")
        lo, hi = self.window
        live = [j for j in range(n) if not fb.filters[j].is_zero]
        ranges = [adjoint_support(fb, j, lo, hi) for j in live]
        new_lo = min(a for a, _ in ranges) if ranges else 0
        new_hi = max(b for _, b in ranges) if ranges else 0
        if new_lo > new_hi:
            new_lo = new_hi = 0
        width = new_hi - new_lo + 1
        children = np.zeros((rows, n, width), dtype=np.complex128)
        for j in live:
            a = adjoint_window_matrix(fb, j, (lo, hi), (new_lo, new_hi))
            children[:, j, :] = self.vectors @ a.T
        children[np.abs(children) <= COEFF_ZERO_TOL] = 0.0
        nums = (self.numerators[:, None] * n + np.arange(n)[None, :]).ravel()
        tree = AtomTree(fb, self.depth + 1, (new_lo, new_hi), children.reshape(rows * n, width),
                        nums, self.prune_eps, self.discarded_mass, self.cap)
        return tree._pruned()


def build_tree(fb: FilterBank, f: CoeffVector, k: int, prune_eps: float = 0.0, cap: int = NODE_CAP) -> AtomTree:
    if k < 0:
        raise ValueError("depth must be >= 0")
    tree = AtomTree.root(fb, f, prune_eps, cap)
    for _ in range(k):
        tree = tree.refine()
    return tree


def atom_tree(fb: FilterBank, f: CoeffVector, k: int, prune_eps: float = 0.0, cap: int = NODE_CAP) -> AtomicMeasure:
    """The approximant ``mu_f^(k) = sum_alpha ||S_alpha* f||^2 delta_{x_k(alpha)}``.

    Subtrees whose root mass is ``<= prune_eps`` are skipped; their mass is
    reported in ``discarded_mass``.  With ``prune_eps = 0`` only exactly-zero
    branches are dropped.

    Raises
    ------
    DepthOverflow
        If a level would hold more than ``cap`` live nodes.
    """
    return build_tree(fb, f, k, prune_eps, cap).measure


def refine(tree: AtomTree) -> AtomTree:
    return tree.refine()


def _word_adjoint(fb: FilterBank, digits: Sequence[int], f: CoeffVector) -> CoeffVector:
    g = f
    for d in digits:
        g = apply_s_star(fb, d, g)
    return g


def word_projection(fb: FilterBank, digits: Sequence[int], f: CoeffVector) -> CoeffVector:
    """``S_{a_1} ... S_{a_k} S_{a_k}* ... S_{a_1}* f``, the cylinder projection of f."""
    g = _word_adjoint(fb, digits, f)
    for d in reversed(digits):
        g = apply_s(fb, d, g)
    return g


def word_projection_gram(fb: FilterBank, f: CoeffVector, k: int) -> tuple[np.ndarray, list[NAdicAddress]]:
    """Gram matrix of the vectors ``S_alpha S_alpha* f`` over all ``N^k`` words."""
    n = fb.n_channels
    addrs = [NAdicAddress(n, k, i) for i in range(n**k)]
    vecs = [word_projection(fb, a.digits, f) for a in addrs]
    gram = np.array([[u.vdot(v) for v in vecs] for u in vecs])
    return gram, addrs


def fourier_of_atoms(mu: AtomicMeasure, ts) -> np.ndarray:
    """``sum_atoms mass * exp(i t x)`` for each t (no 2 pi in the exponent)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    x = mu.positions
    out = np.empty(ts.size, dtype=np.complex128)
    chunk = max(1, 2**22 // max(1, x.size))
    for s in range(0, ts.size, chunk):
        t = ts[s : s + chunk]
        out[s : s + chunk] = np.exp(1j * np.outer(t, x)) @ mu.masses
    return out


def fourier_error_bound(t, k: int, n: int):
    """Certified ``|mu_f^(t) - mu_f^(k)^(t)| <= |t| N^-k`` for unit f."""
    if k < 0:
        raise ValueError("depth must be >= 0")
    return np.abs(t) * float(n) ** (-k)


def fourier_transfer(fb: FilterBank, f: CoeffVector, ts, k: int) -> np.ndarray:
    """``mu_f^(k)^(t)`` through the quadratic-form recursion, without enumerating words.

    With ``A_j`` the matrix of ``S_j*`` between successive coefficient windows,
    ``G_l(s) = sum_j exp(i j s / N) A_j^H G_{l+1}(s / N) A_j`` and ``G_k = I``
    give ``mu_f^(k)^(t) = f^H G_0(t) f``.  Cost is linear in k, so this route
    reaches depths the tree cannot.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if f.is_zero:
        return np.zeros(ts.size, dtype=np.complex128)
    n = fb.n_channels
    live = [j for j in range(n) if not fb.filters[j].is_zero]
    windows = [(f.min_index, f.max_index)]
    for _ in range(k):
        lo, hi = windows[-1]
        ranges = [adjoint_support(fb, j, lo, hi) for j in live]
        windows.append((min(a for a, _ in ranges), max(b for _, b in ranges)))
    width = windows[-1][1] - windows[-1][0] + 1
    g = np.broadcast_to(np.eye(width, dtype=np.complex128), (ts.size, width, width))
    for level in range(k - 1, -1, -1):
        src, dst = windows[level], windows[level + 1]
        s = ts / float(n) ** level
        acc = np.zeros((ts.size, src[1] - src[0] + 1, src[1] - src[0] + 1), dtype=np.complex128)
        for j in live:
            a = adjoint_window_matrix(fb, j, src, dst)
            phase = np.exp(1j * j * s / n)
            acc += phase[:, None, None] * (a.conj().T @ g @ a)
        g = acc
    v = f.values
    return np.einsum("i,tij,j->t", v.conj(), g, v)


def cdf(mu: AtomicMeasure, xs) -> np.ndarray:
    """Right-continuous ``F(x) = mu([0, x])``; zero for ``x < 0``."""
    xs = np.asarray(xs, dtype=np.float64)
    cum = np.concatenate([[0.0], np.cumsum(mu.masses)])
    idx = np.searchsorted(mu.positions, xs, side="right")
    return cum[idx]


def integrate(mu: AtomicMeasure, psi: Callable | np.ndarray, l1_fourier_moment: float | None = None):
    """``sum mass * psi(x)`` over the atoms, with the optional certified bound.

    ``psi`` is either a vectorized callable or its values at ``mu.positions``.
    When ``l1_fourier_moment = int |t psi^(t)| dt`` is supplied, the returned
    bound ``N^-k * l1_fourier_moment`` dominates the error against ``mu_f``.
    """
    vals = psi(mu.positions) if callable(psi) else np.asarray(psi)
    if np.shape(vals) != mu.masses.shape:
        raise ValueError("psi must provide one value per atom")
    value = np.sum(mu.masses * vals)
    bound = None
    if l1_fourier_moment is not None:
        if l1_fourier_moment < 0:
            raise ValueError("l1_fourier_moment must be nonnegative")
        bound = float(mu.base) ** (-mu.depth) * l1_fourier_moment
    return value, bound


def refinement_residual(fb: FilterBank, f: CoeffVector, k: int, cap: int = NODE_CAP) -> float:
    """Total variation between ``mu_f^(k)`` and ``sum_j (mu_{S_j* f}^(k-1) o sigma_j^-1)``.

    The two sides come from independent trees, so this checks the
    self-similarity of the measure family at depth k.
    """
    if k < 1:
        raise ValueError("refinement needs k >= 1")
    lhs = atom_tree(fb, f, k, cap=cap)
    rhs = AtomicMeasure(fb.n_channels, k, [], [])
    for j in range(fb.n_channels):
        rhs = rhs + atom_tree(fb, apply_s_star(fb, j, f), k - 1, cap=cap).prepend_digit(j)
    return lhs.total_variation(rhs)
