"""
Command-line front end.

Exit codes: 0 success (all checks pass), 1 a verification check failed,
2 usage, input or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import SingularCError, TruncationWarning, WeilkitError
from .gaussian import GaussianState, PolyGaussian
from .grid import evolution_apply, evolution_apply_general, load_grid, save_grid
from .propagator import build_kernel, kernel_evaluate
from .siegel import (MetaplecticElement, SiegelPoint, branch_continue, cocycle_det,
                     maslov_boundary_phase, mp_flow, siegel_action)
from .symplectic import QuadraticHamiltonian
from .transform import (TransformSampler, boundary_path, fit_growth, growth_probe, radial_path,
                        siegel_norm_n1)
from .verify import SUITES, run_suite

COMMANDS = ("verify", "evolve", "transform", "kernel", "cocycle", "norm42")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Validated command-line configuration."""
    command: str
    suite: str = "all"
    seed: int = 0
    n: int | None = None
    grid_R: float | None = None
    grid_N: int | None = None
    tol: float | None = None
    inputs: list = field(default_factory=list)
    out: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.n is not None and self.n not in (1, 2, 3):
            raise UsageError("--n must be 1, 2 or 3")
        if self.grid_N is not None and (self.grid_N < 2 or self.grid_N & (self.grid_N - 1)):
            raise UsageError("--grid-N must be a power of two")
        if self.grid_R is not None and not self.grid_R > 0:
            raise UsageError("--grid-R must be positive")
        # tolerance 0 is allowed: it makes every check fail, which is useful
        # for listing all residuals
        if self.tol is not None and not self.tol >= 0:
            raise UsageError("--tol must be non-negative")
        if self.command == "verify" and self.suite != "all" and self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from all, {', '.join(SUITES)}")
        if self.fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")


def _parser():
    p = argparse.ArgumentParser(prog="weilkit", description=__doc__.split("\n")[1])
    p.add_argument("--version", action="version", version=f"weilkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--n", type=int)
        sp.add_argument("--grid-R", type=float, dest="grid_R")
        sp.add_argument("--grid-N", type=int, dest="grid_N")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--in", dest="inputs", action="append", default=[],
                        help="input file (repeat for commands taking several)")
        sp.add_argument("--out")
        sp.add_argument("--format", dest="fmt", default="json", choices=("json", "csv"))
        return sp

    v = common(sub.add_parser("verify", help="run verification suites"))
    v.add_argument("--suite", default="all", help=f"all or one of: {', '.join(SUITES)}")
    e = common(sub.add_parser("evolve", help="apply an evolution operator to a grid function"))
    e.add_argument("--element", help="metaplectic element JSON")
    e.add_argument("--hamiltonian", help="Hamiltonian JSON {a, b, c}; use with --t")
    e.add_argument("--t", type=float)
    t = common(sub.add_parser("transform", help="sample Gaussian transforms"))
    t.add_argument("--points", help="JSON list of Siegel points {n, re, im}")
    t.add_argument("--odd", action="store_true", help="odd transform instead of even")
    t.add_argument("--path", choices=("boundary", "radial"), help="growth-probe path")
    t.add_argument("--anchor", help="JSON matrix: boundary point a or radial base Z (re part)")
    t.add_argument("--bound", help="C,M,N for the growth probe (default: fitted)")
    k = common(sub.add_parser("kernel", help="exact propagator kernel of a quadratic Hamiltonian"))
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--x", type=float, nargs="*", default=[])
    k.add_argument("--y", type=float, nargs="*", default=[])
    c = common(sub.add_parser("cocycle", help="branch of sqrt det(CZ+D) for an element"))
    c.add_argument("--z", help="JSON Siegel point {n, re, im}")
    c.add_argument("--a", help="JSON real symmetric matrix for the boundary phase")
    common(sub.add_parser("norm42", help="invariant Siegel-space norm (n = 1)"))
    return p


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})")


def load_source(path):
    """
    Transform source from JSON: a grid function file, one Gaussian state
    ``{"lambda", "Z"}``, a list of them, or ``{"hermite": [[alpha, [re, im]], ...]}``.
    """
    data = _read_json(path)
    if isinstance(data, dict) and "N" in data:
        return load_grid(path)
    if isinstance(data, dict) and "hermite" in data:
        out = None
        for alpha, coeff in data["hermite"]:
            term = complex(*coeff) * PolyGaussian.hermite(alpha)
            out = term if out is None else out + term
        return out
    if isinstance(data, dict):
        return GaussianState.from_dict(data)
    if isinstance(data, list):
        return [GaussianState.from_dict(d) for d in data]
    raise UsageError(f"{path}: unrecognized source format")


def _complex_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _emit(cfg, payload, rows=None, header=None):
    """Write JSON (default) or CSV to ``--out`` or stdout."""
    if cfg.fmt == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(cfg):
    options = {"tol": cfg.tol}
    if cfg.n:
        options.update(n=cfg.n, grid_R=cfg.grid_R, grid_N=cfg.grid_N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        records = run_suite(cfg.suite, seed=cfg.seed, **options)
    ok = all(r["pass"] for r in records)
    report = {"suite": cfg.suite, "seed": cfg.seed, "pass": ok, "checks": records,
              "timestamp": datetime.now(timezone.utc).isoformat()}
    rows = [[r["check"], repr(r["residual"]), repr(r["tolerance"]), int(r["pass"])]
            for r in records]
    _emit(cfg, report, rows, ["check", "residual", "tolerance", "pass"])
    return 0 if ok else 1


def _load_element(args, n):
    if args.element:
        return MetaplecticElement.from_dict(_read_json(args.element))
    if args.hamiltonian and args.t is not None:
        return mp_flow(QuadraticHamiltonian.from_dict(_read_json(args.hamiltonian)), args.t)
    raise UsageError("evolve needs --element, or --hamiltonian with --t")


def cmd_evolve(cfg, args):
    if len(cfg.inputs) != 1 or not cfg.out:
        raise UsageError("evolve needs one --in grid function and --out")
    try:
        f = load_grid(cfg.inputs[0])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{cfg.inputs[0]}: {exc}")
    m = _load_element(args, f.n)
    note = None
    try:
        out = evolution_apply(m, f)
        path = "direct"
    except SingularCError as exc:
        note = f"{exc}; factored through an oscillator rotation"
        out = evolution_apply_general(m, f)
        path = "factorized"
    save_grid(out, cfg.out)
    meta = {"norm_in": f.norm(), "norm_out": out.norm(), "path": path,
            "eps0": _complex_pair(m.eps0), "truncation_ratio": out.truncation_ratio()}
    if note:
        meta["note"] = note
    sys.stdout.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


def _parse_bound(text):
    try:
        C, M, N = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError("--bound expects C,M,N")
    return C, M, N


def cmd_transform(cfg, args):
    if len(cfg.inputs) != 1:
        raise UsageError("transform needs exactly one --in source")
    u = TransformSampler(load_source(cfg.inputs[0]))
    if args.path:
        anchor = np.zeros((u.n, u.n))
        if args.anchor:
            anchor = np.atleast_2d(np.asarray(_read_json(args.anchor), dtype=float))
            if anchor.shape != (u.n, u.n):
                raise UsageError(f"--anchor must be a {u.n}x{u.n} matrix")
        if args.path == "boundary":
            path = boundary_path(anchor)
        else:
            path = radial_path(anchor + 1j * np.eye(u.n))
        C, M, N = _parse_bound(args.bound) if args.bound else fit_growth(u, [path])
        rep = growth_probe(u, path, C, M, N)
        if cfg.fmt == "csv":
            text = rep.to_csv()
            if cfg.out:
                with open(cfg.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        else:
            _emit(cfg, rep.to_dict())
        return 0
    if not args.points:
        raise UsageError("transform needs --points or --path")
    pts = [SiegelPoint.from_dict(d) for d in _read_json(args.points)]
    rows, values = [], []
    for i, Z in enumerate(pts):
        if args.odd:
            val = [_complex_pair(v) for v in u.odd(Z)]
            rows.append([i] + [x for v in val for x in v])
        else:
            val = _complex_pair(u(Z))
            rows.append([i] + val)
        values.append({"Z": Z.to_dict(), "u": val})
    header = ["index"] + ([f"{p}{l}" for l in range(u.n) for p in ("re", "im")] if args.odd
                          else ["re", "im"])
    _emit(cfg, {"parity": u.parity, "odd": bool(args.odd), "values": values}, rows, header)
    return 0


def cmd_kernel(cfg, args):
    if len(cfg.inputs) != 1:
        raise UsageError("kernel needs one --in Hamiltonian JSON {a, b, c}")
    H = QuadraticHamiltonian.from_dict(_read_json(cfg.inputs[0]))
    K = build_kernel(H, args.t)
    payload = K.to_dict()
    if args.x or args.y:
        if len(args.x) != len(args.y) or H.n != 1:
            raise UsageError("--x and --y need equal lengths (n = 1 spot values)")
        payload["values"] = [{"x": xv, "y": yv, "K": _complex_pair(kernel_evaluate(K, xv, yv))}
                             for xv, yv in zip(args.x, args.y)]
    _emit(cfg, payload)
    return 0


def cmd_cocycle(cfg, args):
    if len(cfg.inputs) != 1:
        raise UsageError("cocycle needs one --in metaplectic element JSON")
    m = MetaplecticElement.from_dict(_read_json(cfg.inputs[0]))
    payload = {"element": m.to_dict()}
    if args.z:
        Z = SiegelPoint.from_dict(_read_json(args.z))
        payload.update(det=_complex_pair(cocycle_det(m.g, Z)),
                       branch=_complex_pair(branch_continue(m, Z)),
                       image=siegel_action(m.g, Z).to_dict())
    if args.a:
        ph = maslov_boundary_phase(m, np.atleast_2d(np.asarray(_read_json(args.a), float)))
        payload["maslov"] = {"modulus": ph.modulus, "k": ph.k,
                             "snap_residual": ph.snap_residual, "phase": ph.phase}
    _emit(cfg, payload)
    return 0


def cmd_norm42(cfg, args):
    if len(cfg.inputs) != 1:
        raise UsageError("norm42 needs one --in source (n = 1, Gaussian type)")
    src = load_source(cfg.inputs[0])
    u = TransformSampler(src)
    res = siegel_norm_n1(u)
    norm2 = u.source.norm() ** 2
    _emit(cfg, {"value": res.value, "norm_squared": norm2, "ratio": res.value / norm2,
                "y0": list(res.y0_values), "y0_estimates": list(res.y0_estimates),
                "x_tail": res.x_tail})
    return 0


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = RunConfig(command=args.command, suite=getattr(args, "suite", "all"),
                        seed=args.seed, n=args.n, grid_R=args.grid_R, grid_N=args.grid_N,
                        tol=args.tol, inputs=args.inputs, out=args.out, fmt=args.fmt)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        handler = {"evolve": cmd_evolve, "transform": cmd_transform, "kernel": cmd_kernel,
                   "cocycle": cmd_cocycle, "norm42": cmd_norm42}[cfg.command]
        return handler(cfg, args)
    except (UsageError, WeilkitError, OSError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"weilkit: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
