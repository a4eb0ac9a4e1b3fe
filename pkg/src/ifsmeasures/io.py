"""JSON/CSV readers and writers for banks, vectors, IFS and results.

Floats are written with ``repr`` (shortest round-trip form, at most 17
significant digits), and every file is written atomically, so identical
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cuntz import CoeffVector
from .filterbank import FilterBank, LaurentPolynomial
from .hutchinson import AffineIFS, AffineMap, PointMassCloud
from .nadic_measure import AtomicMeasure


class InputError(ValueError):
    """A file does not match its schema."""


def fmt(x) -> str:
    return repr(float(x))


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"{where}: {key!r} must be {kind}")
    return val


def _reject_extra(obj: dict, allowed: set, where: str):
    extra = set(obj) - allowed
    if extra:
        raise InputError(f"{where}: unknown keys {sorted(extra)}")


def _complex_pair(pair, where) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, (int, float)) for v in pair)):
        raise InputError(f"{where}: coefficient must be [re, im]")
    return complex(pair[0], pair[1])


def bank_from_json(data) -> FilterBank:
    n = _require(data, "n", int, "bank")
    filters = _require(data, "filters", list, "bank")
    _reject_extra(data, {"n", "filters"}, "bank")
    polys = []
    for i, item in enumerate(filters):
        where = f"bank.filters[{i}]"
        d0 = _require(item, "min_degree", int, where)
        coeffs = _require(item, "coeffs", list, where)
        _reject_extra(item, {"min_degree", "coeffs"}, where)
        polys.append(LaurentPolynomial(d0, [_complex_pair(c, where) for c in coeffs]))
    return FilterBank(n, polys)


def bank_to_json(fb: FilterBank) -> dict:
    return {
        "n": fb.n_channels,
        "filters": [
            {"min_degree": m.min_degree if not m.is_zero else 0,
             "coeffs": [[float(c.real), float(c.imag)] for c in m.values]}
            for m in fb.filters
        ],
    }


def vector_from_json(data) -> CoeffVector:
    entries = _require(data, "entries", list, "vector")
    _reject_extra(data, {"entries"}, "vector")
    triples = []
    for e in entries:
        if not (isinstance(e, list) and len(e) == 3 and isinstance(e[0], int)
                and all(isinstance(v, (int, float)) for v in e[1:])):
            raise InputError("vector: entries must be [n, re, im]")
        triples.append(tuple(e))
    return CoeffVector.from_entries(triples)


def vector_to_json(f: CoeffVector) -> dict:
    return {"entries": [[n, float(re), float(im)] for n, re, im in f.entries()]}


def ifs_from_json(data) -> AffineIFS:
    maps = _require(data, "maps", list, "ifs")
    weights = _require(data, "weights", list, "ifs")
    _reject_extra(data, {"maps", "weights"}, "ifs")
    out = []
    for i, m in enumerate(maps):
        where = f"ifs.maps[{i}]"
        a = _require(m, "a", (int, float), where)
        b = _require(m, "b", (int, float), where)
        _reject_extra(m, {"a", "b"}, where)
        out.append(AffineMap(float(a), float(b)))
    if not all(isinstance(w, (int, float)) for w in weights):
        raise InputError("ifs: weights must be numbers")
    return AffineIFS(tuple(out), tuple(float(w) for w in weights))


def ifs_to_json(ifs: AffineIFS) -> dict:
    return {
        "maps": [{"a": float(m.a), "b": float(m.b)} for m in ifs.maps],
        "weights": [float(w) for w in ifs.weights],
    }


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def load_bank(path) -> FilterBank:
    return bank_from_json(read_json(path))


def load_vector(path) -> CoeffVector:
    return vector_from_json(read_json(path))


def load_ifs(path) -> AffineIFS:
    return ifs_from_json(read_json(path))


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else str(v) if isinstance(v, (int, np.integer)) else fmt(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def atoms_csv(mu: AtomicMeasure) -> str:
    scale = mu.base**mu.depth
    rows = ((int(n), mu.depth, mu.base, fmt(int(n) / scale), fmt(m))
            for n, m in zip(mu.numerators.tolist(), mu.masses.tolist()))
    return csv_text(["numerator", "depth", "base", "position_float", "mass"], rows)


def atoms_from_csv(text: str) -> AtomicMeasure:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != "numerator,depth,base,position_float,mass":
        raise InputError("atoms CSV: bad header")
    nums, masses, base, depth = [], [], None, None
    for ln in lines[1:]:
        n, d, b, _, m = ln.split(",")
        base, depth = int(b), int(d)
        nums.append(int(n))
        masses.append(float(m))
    if base is None:
        raise InputError("atoms CSV: no rows, base/depth unknown")
    return AtomicMeasure(base, depth, nums, masses)


def cloud_csv(cloud: PointMassCloud) -> str:
    return csv_text(["position", "mass"], zip(cloud.positions.tolist(), cloud.masses.tolist()))
