"""Batch command-line front end.

    ifsmeasures <command> [--bank FILE] [--vector FILE] [--ifs FILE] [--k INT]
                [--t-grid a:b:n] [--x-grid a:b:n] [--prune-eps R] [--seed INT]
                [--out FILE] [--config FILE] ...

Options may also come from a JSON config file (``--config``); flags given on
the command line override it.  Exit status: 0 success, 1 malformed input,
2 validation failure (non-unitary bank), 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import ast
import logging
import math
import sys

import numpy as np

from . import __version__
from .cuntz import CoeffVector, solve_joint_eigenproblem, verify_cuntz_relations
from .diagnostics import (
    convergence_profile,
    cyclicity_test,
    eigen_cross_check,
    pushforward_measure,
    radon_nikodym_profile,
)
from .errors import DepthOverflow, IFSMeasureError
from .filterbank import UNITARITY_TOL, FilterBank, validate_filterbank
from .hutchinson import attractor_cover, cascade, chaos_game, self_similarity_residual, solve_moments
from .io import (
    InputError,
    atomic_write,
    atoms_csv,
    cloud_csv,
    csv_text,
    fmt,
    json_text,
    load_bank,
    load_ifs,
    load_vector,
    read_json,
)
from .nadic_measure import NODE_CAP, atom_tree, cdf, fourier_error_bound, fourier_of_atoms, integrate, refinement_residual

log = logging.getLogger("ifsmeasures")

EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_CAP = 0, 1, 2, 3

COMMANDS = (
    "validate", "atoms", "fourier", "cdf", "integrate", "cyclicity", "hutchinson-cascade",
    "hutchinson-chaos", "moments", "eigen-check", "cross-check", "convergence",
)

# dest -> (type, default)
OPTIONS = {
    "bank": (str, None),
    "vector": (str, None),
    "ifs": (str, None),
    "k": (int, None),
    "t_grid": (str, None),
    "x_grid": (str, None),
    "prune_eps": (float, 0.0),
    "seed": (int, 0),
    "out": (str, None),
    "tol": (float, UNITARITY_TOL),
    "samples": (int, None),
    "window": (int, None),
    "eigen_tol": (float, 1e-8),
    "ac_tol": (float, 1e-12),
    "psi": (str, None),
    "moment": (float, None),
    "with_bound": (bool, False),
    "n_samples": (int, 1_000_000),
    "burn_in": (int, 100),
    "bins": (int, None),
    "max_order": (int, 6),
    "k_min": (int, None),
    "k_max": (int, None),
    "origin": (float, 0.0),
    "summary": (str, None),
    "cap": (int, NODE_CAP),
}


class CliError(Exception):
    def __init__(self, message: str, status: int = EXIT_INPUT):
        super().__init__(message)
        self.status = status


def parse_grid(spec: str) -> np.ndarray:
    """``a:b:n`` (n points from a to b inclusive) or a comma-separated list."""
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise CliError(f"bad grid {spec!r}: {exc}") from exc


_PSI_NAMES = {
    "pi": math.pi, "e": math.e, "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "tan": np.tan, "floor": np.floor,
}
_PSI_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Mod,
)


def parse_psi(expr: str):
    """Compile an arithmetic expression in ``x`` into a vectorized function."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise CliError(f"bad psi expression: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _PSI_NODES):
            raise CliError(f"psi: {type(node).__name__} not allowed")
        if isinstance(node, ast.Name) and node.id != "x" and node.id not in _PSI_NAMES:
            raise CliError(f"psi: unknown name {node.id!r}")
    code = compile(tree, "<psi>", "eval")

    def psi(x):
        return np.broadcast_to(eval(code, {"__builtins__": {}}, {**_PSI_NAMES, "x": x}), np.shape(x))

    return psi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifsmeasures", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values")
    for dest, (kind, _) in OPTIONS.items():
        flag = "--" + dest.replace("_", "-")
        if kind is bool:
            common.add_argument(flag, dest=dest, action="store_const", const=True, default=None)
        else:
            common.add_argument(flag, dest=dest, type=kind, default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common])
    return parser


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = {dest: default for dest, (_, default) in OPTIONS.items()}
    if ns.config:
        data = read_json(ns.config)
        if not isinstance(data, dict):
            raise CliError("config must be a JSON object")
        for key, val in data.items():
            dest = key.replace("-", "_")
            if dest not in OPTIONS:
                raise CliError(f"config: unknown key {key!r}")
            kind = OPTIONS[dest][0]
            if kind is float and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            if val is not None and (not isinstance(val, kind) or (kind is int and isinstance(val, bool))):
                raise CliError(f"config: {key!r} must be {kind.__name__}")
            cfg[dest] = val
    for dest in OPTIONS:
        val = getattr(ns, dest)
        if val is not None:
            cfg[dest] = val
    if cfg["cap"] < 1:
        raise CliError("--cap must be positive")
    if cfg["k"] is not None and cfg["k"] < 0:
        raise CliError("--k must be >= 0")
    if not 0 <= cfg["prune_eps"] < 1:
        raise CliError("--prune-eps must lie in [0, 1)")
    return cfg


def need(cfg: dict, key: str):
    if cfg[key] is None:
        raise CliError(f"--{key.replace('_', '-')} is required for this command")
    return cfg[key]


def validated_bank(cfg: dict) -> FilterBank:
    fb = load_bank(need(cfg, "bank"))
    report = validate_filterbank(fb, cfg["samples"], cfg["tol"])
    if not report.passed:
        raise CliError(f"bank is not unitary (max defect {report.max_defect:.3g})", EXIT_VALIDATION)
    return fb


def vector(cfg: dict) -> CoeffVector:
    return load_vector(cfg["vector"]) if cfg["vector"] else CoeffVector.basis(0)


def cmd_validate(cfg):
    fb = load_bank(need(cfg, "bank"))
    report = validate_filterbank(fb, cfg["samples"], cfg["tol"])
    probes = [CoeffVector.basis(n) for n in range(-2, 3)]
    if cfg["vector"]:
        probes.append(load_vector(cfg["vector"]))
    cuntz = verify_cuntz_relations(fb, probes)
    out = {**report.to_dict(), "parseval_sum": fb.parseval_sum(), "cuntz": cuntz.to_dict()}
    return json_text(out), EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_atoms(cfg):
    fb = validated_bank(cfg)
    mu = atom_tree(fb, vector(cfg), need(cfg, "k"), cfg["prune_eps"], cfg["cap"])
    if mu.discarded_mass:
        log.info("pruned mass %s", fmt(mu.discarded_mass))
    return atoms_csv(mu), EXIT_OK


def cmd_fourier(cfg):
    fb = validated_bank(cfg)
    k = need(cfg, "k")
    ts = parse_grid(need(cfg, "t_grid"))
    mu = atom_tree(fb, vector(cfg), k, cfg["prune_eps"], cfg["cap"])
    vals = fourier_of_atoms(mu, ts)
    if cfg["with_bound"]:
        bounds = fourier_error_bound(ts, k, fb.n_channels)
        rows = zip(ts.tolist(), vals.real.tolist(), vals.imag.tolist(), bounds.tolist())
        return csv_text(["t", "re", "im", "bound"], rows), EXIT_OK
    return csv_text(["t", "re", "im"], zip(ts.tolist(), vals.real.tolist(), vals.imag.tolist())), EXIT_OK


def cmd_cdf(cfg):
    fb = validated_bank(cfg)
    xs = parse_grid(need(cfg, "x_grid"))
    mu = atom_tree(fb, vector(cfg), need(cfg, "k"), cfg["prune_eps"], cfg["cap"])
    return csv_text(["x", "F"], zip(xs.tolist(), cdf(mu, xs).tolist())), EXIT_OK


def cmd_integrate(cfg):
    fb = validated_bank(cfg)
    psi = parse_psi(need(cfg, "psi"))
    mu = atom_tree(fb, vector(cfg), need(cfg, "k"), cfg["prune_eps"], cfg["cap"])
    value, bound = integrate(mu, psi, cfg["moment"])
    value = complex(value)
    out = {"psi": cfg["psi"], "depth": mu.depth, "re": value.real, "im": value.imag, "bound": bound}
    return json_text(out), EXIT_OK


def cmd_cyclicity(cfg):
    fb = validated_bank(cfg)
    f = vector(cfg)
    k = need(cfg, "k")
    report = cyclicity_test(fb, f, k, cfg["ac_tol"], cfg["cap"])
    base = atom_tree(fb, f, k, cap=cfg["cap"])
    profiles = [
        {"channel": j, **radon_nikodym_profile(pushforward_measure(fb, f, j, k, cfg["cap"]), base, cfg["ac_tol"]).to_dict()}
        for j in range(fb.n_channels)
    ]
    return json_text({**report.to_dict(), "radon_nikodym": profiles}), EXIT_OK


def cmd_hutchinson_cascade(cfg):
    ifs = load_ifs(need(cfg, "ifs"))
    k = need(cfg, "k")
    cloud = cascade(ifs, k, cfg["origin"], cfg["cap"])
    if cfg["summary"]:
        summary = {"depth": k, "residual": self_similarity_residual(ifs, cloud), "atoms": len(cloud)}
        if k >= 1:
            cover = attractor_cover(ifs, k)
            summary.update(
                interval=list(cover.interval),
                max_diameter=cover.max_diameter,
                diameter_bound=cover.diameter_bound,
                non_overlapping=cover.non_overlapping,
            )
        atomic_write(cfg["summary"], json_text(summary))
    return cloud_csv(cloud), EXIT_OK


def cmd_hutchinson_chaos(cfg):
    ifs = load_ifs(need(cfg, "ifs"))
    res = chaos_game(ifs, cfg["n_samples"], cfg["burn_in"], cfg["seed"], keep_samples=False, bins=cfg["bins"])
    out = {"n_samples": res.n_samples, "burn_in": cfg["burn_in"], "seed": cfg["seed"],
           "mean": res.mean, "variance": res.variance}
    if res.histogram is not None:
        counts, edges = res.histogram
        out["histogram"] = {"counts": counts.tolist(), "edges": edges.tolist()}
    return json_text(out), EXIT_OK


def cmd_moments(cfg):
    ifs = load_ifs(need(cfg, "ifs"))
    return json_text({"moments": [float(m) for m in solve_moments(ifs, cfg["max_order"])]}), EXIT_OK


def cmd_eigen_check(cfg):
    fb = validated_bank(cfg)
    return json_text(solve_joint_eigenproblem(fb, cfg["window"], cfg["eigen_tol"]).to_dict()), EXIT_OK


def cmd_cross_check(cfg):
    fb = validated_bank(cfg)
    k = need(cfg, "k")
    out = eigen_cross_check(fb, k, cfg["window"], cfg["eigen_tol"]).to_dict()
    if k >= 1:
        out["refinement_residual"] = refinement_residual(fb, vector(cfg), k, cfg["cap"])
    return json_text(out), EXIT_OK


def cmd_convergence(cfg):
    fb = validated_bank(cfg)
    xs = parse_grid(need(cfg, "x_grid"))
    rows = convergence_profile(fb, vector(cfg), need(cfg, "k_min"), need(cfg, "k_max"), xs, cfg["cap"])
    return csv_text(["k", "sup_diff", "reference"], ((r.depth, r.sup_diff, r.bound) for r in rows)), EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "atoms": cmd_atoms,
    "fourier": cmd_fourier,
    "cdf": cmd_cdf,
    "integrate": cmd_integrate,
    "cyclicity": cmd_cyclicity,
    "hutchinson-cascade": cmd_hutchinson_cascade,
    "hutchinson-chaos": cmd_hutchinson_chaos,
    "moments": cmd_moments,
    "eigen-check": cmd_eigen_check,
    "cross-check": cmd_cross_check,
    "convergence": cmd_convergence,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(ns)
        text, status = HANDLERS[ns.command](cfg)
    except CliError as exc:
        log.error("%s", exc)
        return exc.status
    except DepthOverflow as exc:
        log.error("%s", exc)
        return EXIT_CAP
    except (InputError, IFSMeasureError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    if cfg["out"]:
        atomic_write(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
