"""The isometries S_j, their adjoints, and the joint eigenvalue problem.

Vectors of L^2(T) are held by their Fourier coefficients.  For a filter with
coefficients ``h(d)`` the operators act by

    (S_j f)^(n)  = sum_m h(n - N m) f^(m)            (upsample, then convolve)
    (S_j* f)^(m) = sum_n conj(h(n - N m)) f^(n)      (correlate, then decimate)

so both preserve finite support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ChannelOutOfRange, WindowTooSmall
from .filterbank import FilterBank, FiniteSequence, LaurentPolynomial

EIGEN_TOL = 1e-8


class CoeffVector(FiniteSequence):
    """A vector of L^2(T) given by finitely many Fourier coefficients."""

    __slots__ = ()

    @classmethod
    def basis(cls, n: int) -> "CoeffVector":
        """The exponential ``e_n(z) = z^n``."""
        return cls(n, [1.0])

    @classmethod
    def from_entries(cls, entries) -> "CoeffVector":
        """Build from ``[(n, re, im), ...]`` triples (repeated indices add)."""
        acc: dict[int, complex] = {}
        for n, re, im in entries:
            acc[int(n)] = acc.get(int(n), 0j) + complex(re, im)
        return cls.from_dict(acc)

    def norm_sq(self) -> float:
        return float(np.sum(self.values.real**2 + self.values.imag**2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def normalized(self) -> "CoeffVector":
        return self / self.norm()

    def vdot(self, other: "CoeffVector") -> complex:
        """``<self, other>``, conjugate-linear in ``self``."""
        if self.is_zero or other.is_zero:
            return 0j
        lo = max(self.min_index, other.min_index)
        hi = min(self.max_index, other.max_index)
        if lo > hi:
            return 0j
        return complex(np.vdot(self.dense(lo, hi), other.dense(lo, hi)))

    def entries(self) -> list[tuple[int, float, float]]:
        return [(n, c.real, c.imag) for n, c in self.coeffs.items()]


def _filter(fb: FilterBank, j: int) -> LaurentPolynomial:
    if not 0 <= j < fb.n_channels:
        raise ChannelOutOfRange(f"channel {j} outside 0..{fb.n_channels - 1}")
    return fb.filters[j]


def apply_s(fb: FilterBank, j: int, f: CoeffVector) -> CoeffVector:
    """``S_j f(z) = m_j(z) f(z^N)``."""
    h = _filter(fb, j)
    if f.is_zero or h.is_zero:
        return CoeffVector.zero()
    n = fb.n_channels
    up = np.zeros(n * (f.values.size - 1) + 1, dtype=np.complex128)
    up[::n] = f.values
    return CoeffVector(n * f.offset + h.offset, np.convolve(up, h.values))


def adjoint_support(fb: FilterBank, j: int, lo: int, hi: int) -> tuple[int, int]:
    """Index range that ``S_j*`` can reach from vectors supported in ``lo..hi``.

    ``ceil((lo - max deg)/N) .. floor((hi - min deg)/N)``; may be empty.
    """
    h = _filter(fb, j)
    n = fb.n_channels
    return -((h.max_degree - lo) // n), (hi - h.min_degree) // n


def apply_s_star(fb: FilterBank, j: int, f: CoeffVector) -> CoeffVector:
    """Adjoint of :func:`apply_s`: correlate with ``m_j`` and keep every N-th term."""
    h = _filter(fb, j)
    if f.is_zero or h.is_zero:
        return CoeffVector.zero()
    n = fb.n_channels
    # c(p) = sum_n f(n) conj(h(n - p)), starting at p0 = min supp f - max deg h
    c = np.convolve(f.values, np.conj(h.values[::-1]))
    p0 = f.offset - h.max_degree
    m_lo, m_hi = adjoint_support(fb, j, f.min_index, f.max_index)
    if m_lo > m_hi:
        return CoeffVector.zero()
    return CoeffVector(m_lo, c[n * m_lo - p0 : n * m_hi - p0 + 1 : n])


@dataclass(frozen=True)
class CuntzReport:
    """Worst defects of the two Cuntz relations over a set of probes."""

    isometry_defect: float  # max_{f,j,k} ||S_j* S_k f - delta_jk f||
    completeness_defect: float  # max_f ||sum_j S_j S_j* f - f||
    n_probes: int

    def passed(self, tol: float) -> bool:
        return max(self.isometry_defect, self.completeness_defect) <= tol

    def to_dict(self) -> dict:
        return {
            "isometry_defect": self.isometry_defect,
            "completeness_defect": self.completeness_defect,
            "n_probes": self.n_probes,
        }


def verify_cuntz_relations(fb: FilterBank, probes: Sequence[CoeffVector], tol: float = 1e-10) -> CuntzReport:
    if not probes:
        raise ValueError("need at least one probe vector")
    n = fb.n_channels
    iso = 0.0
    comp = 0.0
    for f in probes:
        s_f = [apply_s(fb, k, f) for k in range(n)]
        for j in range(n):
            for k in range(n):
                g = apply_s_star(fb, j, s_f[k])
                if j == k:
                    g = g - f
                iso = max(iso, g.norm())
        total = CoeffVector.zero()
        for j in range(n):
            total = total + apply_s(fb, j, apply_s_star(fb, j, f))
        comp = max(comp, (total - f).norm())
    return CuntzReport(iso, comp, len(probes))


def adjoint_window_matrix(fb: FilterBank, j: int, src: tuple[int, int], dst: tuple[int, int]) -> np.ndarray:
    """Matrix of ``S_j*`` from coefficients on ``src`` to coefficients on ``dst``.

    Entry ``[m - dst_lo, n - src_lo] = conj(h(n - N m))``.  Exact whenever
    ``dst`` contains :func:`adjoint_support` of ``src``.
    """
    h = _filter(fb, j)
    n = fb.n_channels
    rows = np.arange(dst[0], dst[1] + 1)
    cols = np.arange(src[0], src[1] + 1)
    d = cols[None, :] - n * rows[:, None]
    out = np.zeros(d.shape, dtype=np.complex128)
    if h.is_zero:
        return out
    inside = (d >= h.min_degree) & (d <= h.max_degree)
    out[inside] = np.conj(h.values[d[inside] - h.offset])
    return out


def invariant_window(fb: FilterBank, lo: int, hi: int) -> tuple[int, int]:
    """Smallest window containing ``lo..hi`` and mapped into itself by all adjoints."""
    while True:
        new_lo, new_hi = lo, hi
        for j in range(fb.n_channels):
            if fb.filters[j].is_zero:
                continue
            a, b = adjoint_support(fb, j, lo, hi)
            new_lo, new_hi = min(new_lo, a), max(new_hi, b)
        if (new_lo, new_hi) == (lo, hi):
            return lo, hi
        lo, hi = new_lo, new_hi


def default_window(fb: FilterBank) -> int:
    return max(8, 2 * max(abs(fb.min_degree), abs(fb.max_degree)))


@dataclass(frozen=True)
class EigenSolution:
    found: bool
    vector: CoeffVector | None
    lambdas: tuple[complex, ...]
    residual: float
    window: int
    candidates: int = 0
    note: str = ""

    def weights(self) -> np.ndarray:
        """``|lambda_j|^2``, the Hutchinson weights of the eigenvector measure."""
        return np.abs(np.asarray(self.lambdas)) ** 2

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "window": self.window,
            "lambdas": [[z.real, z.imag] for z in self.lambdas],
            "residual": self.residual,
            "vector": None if self.vector is None else [list(e) for e in self.vector.entries()],
            "candidates": self.candidates,
            "note": self.note,
        }


def _null_space(a: np.ndarray, tol: float) -> np.ndarray:
    if a.shape[1] == 0:
        return np.zeros((0, 0))
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=np.complex128)
    _, s, vh = np.linalg.svd(a)
    scale = max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def _cluster(values: np.ndarray, tol: float) -> list[complex]:
    """Single-linkage clusters of eigenvalues, each represented by its mean.

    A defective eigenvalue of multiplicity m scatters by ~eps^(1/m) around the
    true value, but the cluster mean (a trace) stays accurate.
    """
    remaining = list(values)
    clusters = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for v in list(remaining):
                if min(abs(v - g) for g in group) <= tol:
                    group.append(v)
                    remaining.remove(v)
                    grew = True
        clusters.append(complex(np.mean(group)))
    return clusters


def _joint_subspaces(mats: list[np.ndarray], q: np.ndarray, j: int, null_tol: float, cluster_tol: float, out: list):
    """Branch over eigenvalues of each channel in turn, shrinking the subspace."""
    if q.shape[1] == 0:
        return
    if j == len(mats):
        out.append(q)
        return
    a = mats[j]
    aq = a @ q
    # keep the part of span(q) that a maps back into span(q)
    leak = aq - q @ (q.conj().T @ aq)
    k = _null_space(leak, null_tol)
    if k.shape[1] == 0:
        return
    q2 = q @ k
    b = q2.conj().T @ a @ q2
    eig = np.linalg.eigvals(b)
    for lam in sorted(_cluster(eig, cluster_tol), key=lambda z: (-z.real, -z.imag)):
        v = _null_space(b - lam * np.eye(b.shape[0]), null_tol)
        if v.shape[1]:
            basis, _ = np.linalg.qr(q2 @ v)
            _joint_subspaces(mats, basis, j + 1, null_tol, cluster_tol, out)


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-9)))
    return v * (abs(v[i]) / v[i])


def solve_joint_eigenproblem(
    fb: FilterBank,
    window: int | None = None,
    eigen_tol: float = EIGEN_TOL,
    null_tol: float = 1e-9,
    cluster_tol: float = 1e-3,
) -> EigenSolution:
    """Search ``span{e_n : |n| <= W}`` for ``f`` with ``S_j* f = lambda_j f`` for all j.

    The adjoints are restricted to the window (exact because the window maps
    into itself), and the solution set is found by iterated intersection of
    eigenspaces: for channel 0, 1, ... in turn keep the subspace mapped into
    itself, split it into eigenspaces, and recurse.  Candidates are ranked by
    the real parts of ``(lambda_0, lambda_1, ...)`` in decreasing order.

    A failed search means "no joint eigenvector supported in this window"; it
    is not a proof of nonexistence in L^2(T).

    Raises
    ------
    WindowTooSmall
        If some adjoint maps the window outside itself.
    """
    w = default_window(fb) if window is None else int(window)
    if w < 1:
        raise ValueError("window must be >= 1")
    lo, hi = -w, w
    for j in range(fb.n_channels):
        if fb.filters[j].is_zero:
            continue
        a, b = adjoint_support(fb, j, lo, hi)
        if a < lo or b > hi:
            raise WindowTooSmall(f"S_{j}* maps [-{w}, {w}] onto [{a}, {b}]")
    mats = [adjoint_window_matrix(fb, j, (lo, hi), (lo, hi)) for j in range(fb.n_channels)]
    subspaces: list[np.ndarray] = []
    _joint_subspaces(mats, np.eye(hi - lo + 1, dtype=np.complex128), 0, null_tol, cluster_tol, subspaces)

    best = None
    for q in subspaces:
        v = _canonical_phase(q[:, 0] / np.linalg.norm(q[:, 0]))
        f = CoeffVector(lo, v)
        f = f / f.norm()
        lams = tuple(f.vdot(apply_s_star(fb, j, f)) for j in range(fb.n_channels))
        res = max((apply_s_star(fb, j, f) - lams[j] * f).norm() for j in range(fb.n_channels))
        if res <= eigen_tol:
            best = (f, lams, res)
            break
        if best is None or res < best[2]:
            best = (f, lams, res)
    if best is None:
        return EigenSolution(False, None, (), float("inf"), w, 0, "no joint eigenvector found in window")
    f, lams, res = best
    if res > eigen_tol:
        return EigenSolution(False, None, (), res, w, len(subspaces), "no joint eigenvector found in window")
    return EigenSolution(True, f, lams, res, w, len(subspaces))
