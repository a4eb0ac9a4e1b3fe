"""Named example systems and the files shipped under ``fixtures/``.

Run ``python -m ifsmeasures.fixtures DIR`` to regenerate the files.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cuntz import CoeffVector
from .filterbank import (
    FilterBank,
    daubechies4_bank,
    degenerate_bank,
    fourier_basis_bank,
    monomial_bank,
)
from .hutchinson import AffineIFS, AffineMap
from .io import atomic_write, bank_to_json, ifs_to_json, json_text, vector_to_json

BANKS = {
    "shift": lambda: monomial_bank(2),
    "monomial3": lambda: monomial_bank(3),
    "haar": lambda: fourier_basis_bank(2),
    "fourier3": lambda: fourier_basis_bank(3),
    "fourier4": lambda: fourier_basis_bank(4),
    "d4": daubechies4_bank,
}
INVALID_BANKS = {"degenerate": degenerate_bank}


def bank(name: str) -> FilterBank:
    return {**BANKS, **INVALID_BANKS}[name]()


def cantor_ifs(exact: bool = False) -> AffineIFS:
    """``x/3`` and ``(x+2)/3`` with equal weights."""
    if exact:
        third, half = Fraction(1, 3), Fraction(1, 2)
        return AffineIFS((AffineMap(third, Fraction(0)), AffineMap(third, 2 * third)), (half, half))
    return AffineIFS.from_pairs([(1 / 3, 0.0), (1 / 3, 2 / 3)], [0.5, 0.5])


def dyadic_ifs(exact: bool = False) -> AffineIFS:
    """``x/2`` and ``(x+1)/2`` with equal weights; invariant measure is Lebesgue on [0,1]."""
    if exact:
        half = Fraction(1, 2)
        return AffineIFS((AffineMap(half, Fraction(0)), AffineMap(half, half)), (half, half))
    return AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.5)], [0.5, 0.5])


IFS = {"cantor": cantor_ifs, "dyadic": dyadic_ifs}


def vectors() -> dict[str, CoeffVector]:
    e0, e1, e2 = (CoeffVector.basis(n) for n in range(3))
    return {"e0": e0, "e1": e1, "e0_e2": (e0 + e2) / np.sqrt(2.0)}


def write_fixtures(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, make in {**BANKS, **INVALID_BANKS}.items():
        p = directory / f"{name}_bank.json"
        atomic_write(p, json_text(bank_to_json(make())))
        written.append(p)
    for name, make in IFS.items():
        p = directory / f"{name}_ifs.json"
        atomic_write(p, json_text(ifs_to_json(make())))
        written.append(p)
    for name, f in vectors().items():
        p = directory / f"{name}.json"
        atomic_write(p, json_text(vector_to_json(f)))
        written.append(p)
    return written


if __name__ == "__main__":
    for path in write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(path)
