"""Command-line entry point: one subcommand per verification experiment.

Every run prints a JSON report (sorted keys) carrying the effective
configuration, its SHA-256 hash and the tolerances applied.  ``--out DIR``
additionally writes ``<command>.json`` and, where rows exist,
``<experiment>.csv``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage/config error,
3 numeric domain error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from typing import List, Sequence

from . import __version__, experiments as E
from ._accel import BACKEND
from .errors import HigherIndexError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


def parse_range(text: str) -> List[float]:
    """``"1:10"`` -> 1..10 inclusive, ``"1:10:0.5"`` with a step, or a comma list."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from None


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def write_csv(path: str, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not serializable: {type(o).__name__}")


# each runner maps the effective config to a list of experiment reports
def _growth(cfg):
    return [E.growth_experiment(model=cfg["model"], degree=cfg["degree"], radii=cfg["radii"],
                                samples=cfg["samples"], seed=cfg["seed"], order=cfg["order"])]


def _simplex(cfg):
    return [E.simplex_volume_experiment(model=cfg["model"], samples=cfg["samples"], radius=cfg["radius"],
                                        order=cfg["order"] or 120, seed=cfg["seed"])]


def _cocycle_eval(cfg):
    return [E.area_bound_experiment(samples=cfg["samples"], radius=cfg["radius"],
                                    order=cfg["order"] or 120, seed=cfg["seed"])]


def _cocycle_check(cfg):
    return [E.cocycle_check_experiment(model=cfg["model"], samples=cfg["samples"], radius=cfg["radius"],
                                       order=cfg["order"], seed=cfg["seed"])]


def _vanest(cfg):
    return [E.vanest_experiment(points=cfg["points"], eps=cfg["eps"],
                                points_per_axis=cfg["points_per_axis"], seed=cfg["seed"]),
            E.cutoff_experiment(seed=cfg["seed"])]


def _conv_pairing(cfg):
    return [E.cyclic_experiment(seed=cfg["seed"]), E.chern_experiment(seed=cfg["seed"], steps=cfg["steps"])]


def _fourier(cfg):
    return [E.fourier_experiment(trios=cfg["trios"], box=cfg["box"], spacing=cfg["spacing"], seed=cfg["seed"])]


def _morita(cfg):
    if cfg["n"] != 2:
        raise ConfigError("morita-check fixtures are defined on the planar lattice (--n 2)")
    return [E.morita_experiment(fixtures=cfg["fixtures"], box=cfg["box"], slice_size=cfg["slice"],
                                seed=cfg["seed"])]


def _fredholm(cfg):
    return [E.fredholm_experiment(trials=cfg["trials"], seed=cfg["seed"], p=cfg["p"], q=cfg["q"])]


def _index(cfg):
    return [E.index_experiment(Bs=cfg["B"], eps=cfg["eps"])]


COMMANDS = {
    "simplex-volume": (_simplex, "volumes of random geodesic triangles against closed-form areas"),
    "cocycle-eval": (_cocycle_eval, "evaluate the hyperbolic area cocycle against Gauss-Bonnet"),
    "cocycle-check": (_cocycle_check, "cocycle identity of the area cocycle at random 4-tuples"),
    "growth-profile": (_growth, "growth of the area cocycle on word-length shells"),
    "vanest-roundtrip": (_vanest, "van Est round trip and the cut-off contract"),
    "conv-pairing": (_conv_pairing, "cyclic bicomplex identities and Chern pairings"),
    "fourier-check": (_fourier, "Fourier-side identity for the convolution area cocycle"),
    "morita-check": (_morita, "Morita compatibility of the kernel and group pairings"),
    "fredholm-demo": (_fredholm, "index projectors versus the SVD index"),
    "index-rhs": (_index, "topological side of the higher index formula"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="higherindex", description="Higher index verification experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="JSON file with the same keys as the flags (flags win)")
        p.add_argument("--out", help="directory for <experiment>.json and .csv")
        return p

    ap.subparsers = {}

    def mk(name):
        ap.subparsers[name] = common(sub.add_parser(name, help=COMMANDS[name][1]))
        return ap.subparsers[name]

    p = mk("simplex-volume")
    p.add_argument("--model", choices=["euclidean", "hyperbolic"], default="hyperbolic")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--order", type=int, default=None)

    p = mk("cocycle-eval")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--order", type=int, default=None)

    p = mk("cocycle-check")
    p.add_argument("--model", choices=["euclidean", "hyperbolic"], default="euclidean")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--order", type=int, default=None)

    p = mk("growth-profile")
    p.add_argument("--model", choices=["euclidean", "hyperbolic"], default="hyperbolic")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--radii", type=parse_range, default=parse_range("1:10"))
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--order", type=int, default=None)

    p = mk("vanest-roundtrip")
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--points-per-axis", type=int, default=7)

    p = mk("conv-pairing")
    p.add_argument("--steps", type=int, default=20)

    p = mk("fourier-check")
    p.add_argument("--trios", type=int, default=10)
    p.add_argument("--box", type=int, default=64)
    p.add_argument("--spacing", type=float, default=0.25)

    p = mk("morita-check")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--box", type=int, default=6)
    p.add_argument("--slice", type=int, default=3)
    p.add_argument("--fixtures", type=int, default=2)

    p = mk("fredholm-demo")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--trials", type=int, default=50)

    p = mk("index-rhs")
    p.add_argument("--B", type=float, nargs="+", default=[1.0, 2 * math.pi, 10.0])
    p.add_argument("--eps", type=float, default=0.7)
    return ap


def _parse(ap, argv):
    """Parse flags; values from ``--config`` become defaults so explicit flags win."""
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(loaded) - set(vars(args)) | ({"config", "command"} & set(loaded))
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(loaded.get("radii"), str):
            loaded["radii"] = parse_range(loaded["radii"])
        ap.subparsers[args.command].set_defaults(**loaded)
        args = ap.parse_args(argv)
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out", "command")}
    return args, cfg


def main(argv: Sequence[str] = None) -> int:
    ap = build_parser()
    try:
        args, cfg = _parse(ap, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": EXIT_USAGE},
                         sort_keys=True))
        return EXIT_USAGE
    try:
        reports = COMMANDS[args.command][0](cfg)
    except (ConfigError, ValueError, TypeError) as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc),
                          "exit_code": EXIT_USAGE}, sort_keys=True))
        return EXIT_USAGE
    except HigherIndexError as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc),
                          "exit_code": exc.exit_code}, sort_keys=True))
        return exc.exit_code

    passed = all(r.passed for r in reports)
    doc = {
        "command": args.command,
        "version": __version__,
        "backend": BACKEND,
        "workers": E.worker_count(),
        "config": cfg,
        "config_hash": config_hash(cfg),
        "tolerances": {f"{r.experiment}.{k}": v for r in reports for k, v in r.tolerances.items()},
        "reports": [{"experiment": r.experiment, "params": r.params, "results": r.results,
                     "checks": [c.as_dict() for c in r.checks], "passed": r.passed} for r in reports],
        "passed": passed,
    }
    text = json.dumps(doc, sort_keys=True, indent=2, default=_json_default)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.command}.json"), "w") as fh:
            fh.write(text + "\n")
        for r in reports:
            if r.rows:
                name = r.experiment.replace(":", "-")
                write_csv(os.path.join(args.out, f"{name}.csv"), r.columns, r.rows)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
