"""Command line front end.

Exit codes: 0 all requested checks pass, 1 a verification failed,
2 malformed invocation or input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import classify as cl
from .catalog import InvalidParameters, UnknownCatalogEntry, catalog
from .curves import Curve, DegenerateMetric, apply_frame, build_v0, verify_curve
from .moduli import InvalidDimension, ModuliSolution, NoConvergence, SolverOptions, clifford, solve
from .quadric import (
    NotSymmetricUnitary, WMatrix, analyze_pattern, derive_constraints, frequency_classes,
    quadric_residual, takagi,
)
from .report import SCHEMA_VERSION, dumps

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class GridSpec:
    nx: int = 1
    ny: int = 1
    box: tuple = (-1.0, 1.0, -1.0, 1.0)

    @classmethod
    def parse(cls, grid, box):
        try:
            parts = [int(p) for p in str(grid).lower().split("x")]
        except ValueError:
            raise ConfigError(f"bad grid {grid!r}; expected NX or NXxNY")
        if len(parts) == 1:
            parts = parts * 2
        if len(parts) != 2 or min(parts) < 1:
            raise ConfigError(f"grid counts must be >= 1, got {grid!r}")
        try:
            b = tuple(float(x) for x in str(box).split(","))
        except ValueError:
            raise ConfigError(f"bad box {box!r}")
        if len(b) != 4:
            raise ConfigError("box needs x0,x1,y0,y1")
        return cls(parts[0], parts[1], b)

    def points(self):
        def axis(lo, hi, k):
            return np.array([(lo + hi) / 2.0]) if k == 1 else np.linspace(lo, hi, k)

        xs = axis(self.box[0], self.box[1], self.nx)
        ys = axis(self.box[2], self.box[3], self.ny)
        return [complex(x, y) for y in ys for x in xs]


@dataclass
class JobConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    tol_identity: float = 1e-10
    tol_numeric: float = 1e-8
    seed: int = 0
    grid: GridSpec | None = None

    def __post_init__(self):
        if not (self.tol_identity > 0 and self.tol_numeric > 0):
            raise ConfigError("tolerances must be positive")


# -- helpers ------------------------------------------------------------------------


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}")


def _load_moduli(path):
    data = _load_json(path)
    if isinstance(data, dict) and "moduli" in data:
        data = data["moduli"]
    return ModuliSolution.from_json(data)


def _load_w(path, check=True):
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("W", data.get("w"))
    return WMatrix.from_json(data, check=check)


def _params(text):
    if not text:
        return {}
    try:
        params = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--params is not valid JSON: {exc}")
    if not isinstance(params, dict):
        raise ConfigError("--params must be a JSON object")
    if isinstance(params.get("t"), list):
        params["t"] = complex(*params["t"])
    return params


def _emit(obj, out):
    text = dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _curve_from_inputs(args):
    if getattr(args, "catalog", None):
        return catalog(args.catalog, **_params(args.params)).curve
    if getattr(args, "curve", None):
        return Curve.from_json(_load_json(args.curve))
    if getattr(args, "w", None) and getattr(args, "moduli", None):
        W = _load_w(args.w)
        sol = _load_moduli(args.moduli)
        return apply_frame(takagi(W), build_v0(sol, pad_to=W.dim), name="takagi")
    raise ConfigError("need --catalog, --curve, or --w with --moduli")


# -- subcommands ------------------------------------------------------------------


def cmd_moduli(args, cfg):
    if args.action == "clifford":
        sol = clifford(args.n)
    else:
        sol = solve(args.n, seed=cfg.seed, options=SolverOptions(tol=args.tol or 1e-11))
    _emit({"moduli": sol.to_json(), "valid": sol.is_valid()}, args.out)
    return EXIT_OK


def cmd_verify(args, cfg):
    curve = _curve_from_inputs(args)
    try:
        rep = verify_curve(curve, tol=cfg.tol_identity)
    except DegenerateMetric as exc:
        _emit({"pass": False, "error": str(exc), "failing": ["metric"]}, args.out)
        return EXIT_FAIL
    rep["failing"] = sorted(k for k, ok in rep["checks"].items() if not ok)
    rep["curve"] = curve.name
    _emit(rep, args.out)
    if not rep["pass"]:
        print("failing residuals: " + ", ".join(rep["failing"]), file=sys.stderr)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_quadric(args, cfg):
    if args.action == "catalog":
        if not args.name:
            raise ConfigError("quadric catalog needs --name")
        entry = catalog(args.name, **_params(args.params))
        _emit({"name": entry.name, "W": entry.w.to_json(), "curve": entry.curve.to_json(),
               "meta": entry.meta}, args.out)
        return EXIT_OK
    if not (args.w and args.moduli):
        raise ConfigError("quadric check needs --w and --moduli")
    W = _load_w(args.w, check=False)
    sol = _load_moduli(args.moduli)
    if W.dim < sol.n + 1:
        raise ConfigError(f"W of size {W.dim} is too small for n = {sol.n}")
    fc = frequency_classes(sol)
    ledger = derive_constraints(fc, sol)
    resid = quadric_residual(W, build_v0(sol, pad_to=W.dim)).max_coeff()
    valid = W.is_valid(cfg.tol_identity)
    lres = ledger.residuals(W)
    out = {
        "symmetry_error": W.symmetry_error(),
        "unitarity_error": W.unitarity_error(),
        "case": fc.case_label().to_json(),
        "ledger": ledger.to_json(),
        "ledger_residuals": lres,
        "quadric_residual": resid,
        "pattern": analyze_pattern(ledger, W.dim).to_json(),
    }
    out["pass"] = bool(valid and max(lres.values()) <= cfg.tol_identity
                       and resid <= cfg.tol_identity)
    _emit(out, args.out)
    return EXIT_OK if out["pass"] else EXIT_FAIL


def cmd_classify(args, cfg):
    if args.scenario == "clifford":
        if args.n is None:
            raise ConfigError("classify clifford needs --n")
        rep = cl.clifford_theorem(args.n)
    elif args.scenario == "q3":
        rep = cl.q3_impossibility(search=not args.no_search, starts=args.starts, seed=cfg.seed)
    else:
        rep = cl.SCENARIOS[args.scenario]()
    print(rep.summary_table(), file=sys.stderr)
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _fmt(x):
    return format(float(x) + 0.0, ".17g")


def export_samples(curve: Curve, grid: GridSpec):
    """CSV text: one header row, then ``Re z, Im z, Re f_k, Im f_k, ...`` per point."""
    cols = ["re_z", "im_z"]
    for k in range(curve.dim):
        cols += [f"re_f{k}", f"im_f{k}"]
    lines = [",".join(cols)]
    for z in grid.points():
        vals = curve.evaluate(z)
        row = [_fmt(z.real), _fmt(z.imag)]
        for v in vals:
            row += [_fmt(v.real), _fmt(v.imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_export(args, cfg):
    curve = _curve_from_inputs(args)
    text = export_samples(curve, cfg.grid)
    meta = {"curve": curve.name, "dim": curve.dim, "grid": [cfg.grid.nx, cfg.grid.ny],
            "box": list(cfg.grid.box), "meta": curve.meta}
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(args.out + ".meta.json", "w", encoding="utf-8") as fh:
            fh.write(dumps(meta) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="hyperquadric", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"schema {SCHEMA_VERSION}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=None, help="identity tolerance")

    sp = sub.add_parser("moduli", help="moduli points")
    sp.add_argument("action", choices=["solve", "clifford"])
    sp.add_argument("--n", type=int, required=True)
    common(sp)

    for name, hlp in (("verify", "run every curve verifier"), ("export", "sample a curve on a grid")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--catalog", help="catalog entry name")
        sp.add_argument("--params", help="catalog parameters as a JSON object")
        sp.add_argument("--curve", help="curve JSON file")
        sp.add_argument("--w", help="W matrix JSON (with --moduli)")
        sp.add_argument("--moduli", help="moduli JSON (with --w)")
        if name == "export":
            sp.add_argument("--grid", default="1", help="NX or NXxNY")
            sp.add_argument("--box", default="-1,1,-1,1", help="x0,x1,y0,y1 (use --box=-1,1,-1,1 for negative values)")
        common(sp)

    sp = sub.add_parser("quadric", help="W matrices")
    sp.add_argument("action", choices=["catalog", "check"])
    sp.add_argument("--name")
    sp.add_argument("--params")
    sp.add_argument("--w")
    sp.add_argument("--moduli")
    common(sp)

    sp = sub.add_parser("classify", help="classification reports")
    sp.add_argument("scenario", choices=["q2", "q3", "q4", "clifford"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--starts", type=int, default=cl.SEARCH_STARTS)
    sp.add_argument("--no-search", action="store_true", help="skip the heuristic search (q3)")
    common(sp)
    return p


_COMMANDS = {
    "moduli": cmd_moduli,
    "verify": cmd_verify,
    "quadric": cmd_quadric,
    "classify": cmd_classify,
    "export": cmd_export,
}


def run(config: JobConfig, args):
    return _COMMANDS[config.command](args, config)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        grid = GridSpec.parse(args.grid, args.box) if args.command == "export" else None
        cfg = JobConfig(
            args.command,
            inputs={k: v for k, v in vars(args).items() if k in ("catalog", "curve", "w", "moduli")},
            tol_identity=1e-10 if args.tol is None else args.tol,
            seed=args.seed,
            grid=grid,
        )
        return run(cfg, args)
    except (ConfigError, UnknownCatalogEntry, InvalidParameters, InvalidDimension,
            NotSymmetricUnitary, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL

