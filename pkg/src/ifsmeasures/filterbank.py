"""N-channel filter banks stored as Laurent polynomials.

A bank ``(m_j)_{0<=j<N}`` defines isometries ``S_j f(z) = m_j(z) f(z^N)`` on
L^2(T).  They form a representation of the Cuntz algebra exactly when the
matrix ``(1/sqrt(N)) m_j(z exp(2 pi i k / N))`` is unitary for every z on the
unit circle; :func:`validate_filterbank` certifies this by dense sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MalformedBank

COEFF_ZERO_TOL = 1e-15
UNITARITY_TOL = 1e-10


class FiniteSequence:
    """Finitely supported map Z -> C, stored densely from its lowest index.

    Entries with modulus <= ``COEFF_ZERO_TOL`` are dropped at construction, so
    the stored range always starts and ends on a nonzero entry (the zero
    sequence has an empty range).
    """

    __slots__ = ("_offset", "_values")

    def __init__(self, offset: int, values: Iterable[complex] = ()):
        arr = np.array(values, dtype=np.complex128).ravel()
        arr[np.abs(arr) <= COEFF_ZERO_TOL] = 0.0
        nz = np.flatnonzero(arr)
        if nz.size == 0:
            self._offset = 0
            self._values = np.zeros(0, dtype=np.complex128)
        else:
            self._offset = int(offset) + int(nz[0])
            self._values = arr[nz[0] : nz[-1] + 1].copy()
        self._values.flags.writeable = False

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex]):
        items = {int(k): complex(v) for k, v in coeffs.items()}
        if not items:
            return cls(0, ())
        lo, hi = min(items), max(items)
        arr = np.zeros(hi - lo + 1, dtype=np.complex128)
        for k, v in items.items():
            arr[k - lo] = v
        return cls(lo, arr)

    @classmethod
    def zero(cls):
        return cls(0, ())

    @property
    def offset(self) -> int:
        return self._offset

    @property
    def values(self) -> np.ndarray:
        """Dense coefficients for indices ``offset .. offset + len - 1``."""
        return self._values

    @property
    def is_zero(self) -> bool:
        return self._values.size == 0

    @property
    def min_index(self) -> int:
        return self._offset

    @property
    def max_index(self) -> int:
        return self._offset + self._values.size - 1

    @property
    def coeffs(self) -> dict[int, complex]:
        return {
            self._offset + i: complex(c)
            for i, c in enumerate(self._values)
            if c != 0
        }

    def __getitem__(self, n: int) -> complex:
        i = n - self._offset
        if 0 <= i < self._values.size:
            return complex(self._values[i])
        return 0j

    def __len__(self) -> int:
        return int(np.count_nonzero(self._values))

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on the integer window ``lo..hi`` (inclusive)."""
        out = np.zeros(hi - lo + 1, dtype=np.complex128)
        if self.is_zero:
            return out
        a = max(lo, self.min_index)
        b = min(hi, self.max_index)
        if a <= b:
            out[a - lo : b - lo + 1] = self._values[a - self._offset : b - self._offset + 1]
        return out

    def _binary(self, other, op):
        if self.is_zero and other.is_zero:
            return type(self).zero()
        ranges = [s for s in (self, other) if not s.is_zero]
        lo = min(s.min_index for s in ranges)
        hi = max(s.max_index for s in ranges)
        return type(self)(lo, op(self.dense(lo, hi), other.dense(lo, hi)))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return type(self)(self._offset, self._values * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __truediv__(self, scalar):
        return type(self)(self._offset, self._values / complex(scalar))

    def __eq__(self, other):
        if not isinstance(other, FiniteSequence):
            return NotImplemented
        return self._offset == other._offset and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self._offset, self._values.tobytes()))

    def allclose(self, other: "FiniteSequence", atol: float = 1e-12) -> bool:
        return float(np.max(np.abs((self - other).values), initial=0.0)) <= atol

    def __repr__(self):
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self.coeffs.items())
        return f"{type(self).__name__}({{{body}}})"


class LaurentPolynomial(FiniteSequence):
    """A filter ``m(z) = sum_d c_d z^d`` with finitely many nonzero ``c_d``."""

    __slots__ = ()

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "LaurentPolynomial":
        return cls(degree, [coeff])

    @property
    def min_degree(self) -> int:
        return self.min_index

    @property
    def max_degree(self) -> int:
        return self.max_index

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if self.is_zero:
            return np.zeros_like(z)
        # Horner on the reversed coefficients, then shift by z^offset
        acc = np.zeros_like(z)
        for c in self._values[::-1]:
            acc = acc * z + c
        return acc * z ** self._offset


@dataclass(frozen=True)
class FilterBank:
    n_channels: int
    filters: tuple[LaurentPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        check_bank_shape(self)

    def __len__(self):
        return self.n_channels

    def __getitem__(self, j):
        return self.filters[j]

    @property
    def min_degree(self) -> int:
        return min(m.min_degree for m in self.filters if not m.is_zero)

    @property
    def max_degree(self) -> int:
        return max(m.max_degree for m in self.filters if not m.is_zero)

    @property
    def span(self) -> int:
        """Max degree minus min degree across all filters."""
        return self.max_degree - self.min_degree

    def scaled(self, j: int, factor: complex) -> "FilterBank":
        """Copy of the bank with filter ``j`` multiplied by ``factor``."""
        filters = list(self.filters)
        filters[j] = filters[j] * factor
        return FilterBank(self.n_channels, filters)

    def parseval_sum(self) -> float:
        """``sum_j sum_d |c_{j,d}|^2``; equals N for a unitary bank."""
        return float(sum(np.sum(np.abs(m.values) ** 2) for m in self.filters))


def check_bank_shape(fb: FilterBank) -> None:
    if not isinstance(fb.n_channels, (int, np.integer)) or fb.n_channels < 2:
        raise MalformedBank(f"channel count must be an integer >= 2, got {fb.n_channels!r}")
    if len(fb.filters) != fb.n_channels:
        raise MalformedBank(
            f"bank declares {fb.n_channels} channels but has {len(fb.filters)} filters"
        )
    if all(m.is_zero for m in fb.filters):
        raise MalformedBank("all filters are zero")


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    max_defect: float
    worst_z: float
    samples_checked: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_defect": self.max_defect,
            "worst_z": self.worst_z,
            "samples_checked": self.samples_checked,
        }


def modulation_matrices(fb: FilterBank, z: np.ndarray) -> np.ndarray:
    """Stack of matrices ``M(z)[j, k] = m_j(z w^k) / sqrt(N)``, ``w = exp(2 pi i / N)``.

    Returns an array of shape ``(len(z), N, N)``.
    """
    n = fb.n_channels
    z = np.asarray(z, dtype=np.complex128)
    rot = np.exp(2j * np.pi * np.arange(n) / n)
    pts = z[:, None] * rot[None, :]
    out = np.empty((z.size, n, n), dtype=np.complex128)
    for j, m in enumerate(fb.filters):
        out[:, j, :] = m(pts)
    return out / np.sqrt(n)


def default_sample_count(fb: FilterBank) -> int:
    return 4 * fb.span + 1


def validate_filterbank(
    fb: FilterBank,
    n_samples: int | None = None,
    unitarity_tol: float = UNITARITY_TOL,
) -> ValidationReport:
    """Check that the modulation matrix of ``fb`` is unitary on the circle.

    Every entry of ``M(z)^* M(z) - I`` is a Laurent polynomial with degrees in
    ``[-span, span]``, so it vanishes identically iff it vanishes on
    ``2*span + 1`` equispaced points.  The default sample count is
    ``4*span + 1``.

    Raises
    ------
    MalformedBank
        If the filter count differs from ``n_channels`` or ``n_channels < 2``.
    ValueError
        If ``n_samples`` is below the certifying density or the tolerance is
        not positive.
    """
    check_bank_shape(fb)
    if unitarity_tol <= 0:
        raise ValueError("unitarity_tol must be positive")
    minimum = 2 * fb.span + 1
    if n_samples is None:
        n_samples = default_sample_count(fb)
    if n_samples < max(minimum, 1):
        raise ValueError(f"need at least {minimum} samples for span {fb.span}, got {n_samples}")

    angles = 2 * np.pi * np.arange(n_samples) / n_samples
    M = modulation_matrices(fb, np.exp(1j * angles))
    gram = np.conj(np.transpose(M, (0, 2, 1))) @ M
    defect = np.abs(gram - np.eye(fb.n_channels)).reshape(n_samples, -1).max(axis=1)
    worst = int(np.argmax(defect))
    max_defect = float(defect[worst])
    return ValidationReport(
        passed=max_defect <= unitarity_tol,
        max_defect=max_defect,
        worst_z=float(angles[worst]),
        samples_checked=int(n_samples),
    )


def fourier_basis_bank(n: int) -> FilterBank:
    """Bank with ``m_j(z) = N^{-1/2} sum_k exp(2 pi i j k / N) z^k`` (Haar for N=2)."""
    if n < 2:
        raise MalformedBank("N must be >= 2")
    k = np.arange(n)
    filters = []
    for j in range(n):
        c = np.exp(2j * np.pi * j * k / n) / np.sqrt(n)
        # exact values at the real/imaginary axes keep the Haar bank free of 1e-17 noise
        c = np.where(np.abs(c.imag) < 1e-15, c.real + 0j, c)
        c = np.where(np.abs(c.real) < 1e-15, 1j * c.imag, c)
        filters.append(LaurentPolynomial(0, c))
    return FilterBank(n, filters)


def monomial_bank(n: int) -> FilterBank:
    """Bank ``m_j(z) = z^j``; for N=2 this is the pair ``f(z^2), z f(z^2)``."""
    if n < 2:
        raise MalformedBank("N must be >= 2")
    return FilterBank(n, [LaurentPolynomial.monomial(j) for j in range(n)])


def bank_from_polyphase(poly: np.ndarray) -> FilterBank:
    """Build a bank from a polyphase matrix polynomial.

    ``poly[q, j, k]`` is the coefficient of ``w^q`` in entry ``(j, k)`` of the
    polyphase matrix H(w); the filters are ``m_j(z) = sum_k z^k H_jk(z^N)``.
    The bank is unitary iff H(w) is unitary on the circle.
    """
    n_terms, n, _ = poly.shape
    filters = []
    for j in range(n):
        c = np.zeros(n_terms * n, dtype=np.complex128)
        for q in range(n_terms):
            c[q * n : (q + 1) * n] = poly[q, j, :]
        filters.append(LaurentPolynomial(0, c))
    return FilterBank(n, filters)


def random_paraunitary_bank(
    n: int, n_factors: int = 2, rng: np.random.Generator | int | None = None
) -> FilterBank:
    """Random unitary bank from a product of degree-one paraunitary factors.

    ``H(w) = U0 * prod_i (I - v_i v_i^* + w v_i v_i^*)`` with a Haar-random
    unitary ``U0`` and random unit vectors ``v_i``.
    """
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    u0 = q * (np.diag(r) / np.abs(np.diag(r)))
    poly = u0[None, :, :]
    eye = np.eye(n)
    for _ in range(n_factors):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        p = np.outer(v, v.conj())
        factor = np.stack([eye - p, p])
        out = np.zeros((poly.shape[0] + 1, n, n), dtype=np.complex128)
        for a in range(poly.shape[0]):
            for b in range(2):
                out[a + b] += poly[a] @ factor[b]
        poly = out
    return bank_from_polyphase(poly)


def daubechies4_bank() -> FilterBank:
    """Two-channel Daubechies-4 bank, scaled so that ``m_0(1) = sqrt(2)``."""
    s3 = np.sqrt(3.0)
    h = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2.0))
    g = np.array([(-1) ** k * h[3 - k] for k in range(4)])
    return FilterBank(2, [LaurentPolynomial(0, h), LaurentPolynomial(0, g)])


def degenerate_bank() -> FilterBank:
    """``m_0 = m_1 = 1/sqrt(2)``: rank-deficient, never unitary."""
    c = 1 / np.sqrt(2.0)
    return FilterBank(2, [LaurentPolynomial(0, [c]), LaurentPolynomial(0, [c])])


def bank_from_coefficients(n: int, filters: Sequence[tuple[int, Sequence[complex]]]) -> FilterBank:
    return FilterBank(n, [LaurentPolynomial(d0, c) for d0, c in filters])
