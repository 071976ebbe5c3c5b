"""Command-line entry point ``rkcontract``.

Exit codes: 0 success, 2 input error, 3 numerical error, 4 infeasible regime.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from rkcontract import __version__
from rkcontract.certify import check_psd, contractivity_interval
from rkcontract.core import load_tableau, mbar_matrix
from rkcontract.counterexample import (
    check_constraints,
    dilation,
    expanding_configuration,
    figure_data,
    figure_svg,
    fit_cubic_coefficient,
    growth_formula,
    maximize_dilation,
)
from rkcontract.errors import DomainError, RKContractError
from rkcontract.potential import build_counterexample_potential, witness_noncontractivity

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4

FIGURE_CSV_HELP = "figure CSV columns: kind,name,x,y,dx,dy (arrows scaled by 0.8, drawn from their evaluation point)"


class InputError(Exception):
    pass


class InfeasibleError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    artifacts: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "artifacts": sorted(self.artifacts),
            "version": self.version,
            "created": datetime.now(timezone.utc).isoformat(),
        }

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _positive(name: str, value):
    if value is None:
        raise InputError(f"--{name} is required")
    if not (value > 0 and math.isfinite(value)):
        raise InputError(f"--{name} must be a positive finite number, got {value}")
    return value


def _tableau(source):
    if source is None:
        raise InputError("--tableau is required")
    try:
        return load_tableau(source)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read tableau {source!r}: {exc}") from exc


def cmd_tableau_check(args) -> tuple[dict, dict]:
    t = _tableau(args.tableau)
    L = _positive("L", args.L)
    h = _positive("h", args.h)
    M = mbar_matrix(t, h, L)
    verdict = check_psd(M)
    doc = {
        "command": "tableau-check",
        "tableau": t.name or str(args.tableau),
        "L": L,
        "h": h,
        "mbar": M.entries.tolist(),
        "min_eigenvalue": verdict.min_eigenvalue,
        "psd": verdict.is_psd,
        "tolerance": verdict.tolerance_used,
    }
    return doc, {}


def cmd_interval(args) -> tuple[dict, dict]:
    t = _tableau(args.tableau)
    L = _positive("L", args.L)
    res = contractivity_interval(t, L, seed=args.seed)
    d = res.to_dict()
    doc = {
        "command": "interval",
        "tableau": t.name or str(args.tableau),
        "L": L,
        "h_max": d["h_max"],
        "empty": d["empty"],
        "disconnected": d["disconnected"],
    }
    return doc, {}


def _figure_csv(rows) -> str:
    from io import StringIO

    buf = StringIO()
    writer = csv.DictWriter(buf, fieldnames=["kind", "name", "x", "y", "dx", "dy"], lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def cmd_counterexample(args) -> tuple[dict, dict]:
    L = _positive("L", args.L)
    h = _positive("h", args.h)
    c = expanding_configuration(L, h)
    rows = figure_data(c)
    doc = {
        "command": "counterexample",
        "L": L,
        "h": h,
        "smooth": bool(args.smooth),
        "configuration": c.to_dict(),
        "figure": rows,
    }
    if args.smooth:
        try:
            m = build_counterexample_potential(L, h)
        except DomainError as exc:
            raise InfeasibleError(str(exc)) from exc
        w = witness_noncontractivity(L, h, potential=m)
        doc["witness"] = {
            "ratio": w.ratio,
            "excess": w.excess,
            "lam": w.lam,
            "mu": w.mu,
            "nu": w.nu,
            "L_prime": w.L_prime,
            "alpha": w.alpha,
            "ell": w.ell,
        }
    else:
        rep = check_constraints(c)
        doc["constraints"] = {"slacks": list(rep.slacks), "all_satisfied": rep.all_satisfied}
        doc["dilation"] = dilation(c)
        doc["closed_form"] = growth_formula(L, h)
    artifacts = {"figure.csv": _figure_csv(rows), "figure.svg": figure_svg(c)}
    return doc, artifacts


def cmd_search(args) -> tuple[dict, dict]:
    L = _positive("L", args.L)
    h = _positive("h", args.h)
    if args.dim < 1:
        raise InputError("--dim must be at least 1")
    res = maximize_dilation(L, h, args.dim, args.seed, starts=args.starts)
    fit = fit_cubic_coefficient(L, args.dim, args.seed, starts=args.starts)
    doc = {
        "command": "search",
        "L": L,
        "h": h,
        "dim": args.dim,
        "seed": args.seed,
        "best_ratio": res.ratio,
        "excess": res.excess,
        "max_violation": res.max_violation,
        "configuration": res.configuration.to_dict(),
        "fit": {
            "coefficient": fit.coefficient,
            "slope": fit.slope,
            "products": [L * s for s in fit.steps],
            "quotients": list(fit.quotients),
        },
    }
    artifacts = {}
    if args.dim == 2:
        rows = figure_data(res.configuration)
        artifacts = {"figure.csv": _figure_csv(rows), "figure.svg": figure_svg(res.configuration)}
    return doc, artifacts


COMMANDS = {
    "tableau-check": cmd_tableau_check,
    "interval": cmd_interval,
    "counterexample": cmd_counterexample,
    "search": cmd_search,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--L", type=float, default=None, help="Lipschitz constant of the gradient")
    common.add_argument("--h", type=float, default=None, help="step size")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", type=Path, default=None,
                        help="directory for result.json, figure files and manifest.json")
    common.add_argument("--format", choices=("json", "csv", "svg"), default="json",
                        help="what to print on stdout (csv/svg print the figure data)")

    parser = argparse.ArgumentParser(
        prog="rkcontract",
        description="Contractivity certificates and counterexamples for Runge-Kutta methods on convex gradients.",
        epilog="exit codes: 0 ok, 2 input error, 3 numerical error, 4 infeasible regime",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tableau-check", parents=[common], help="PSD check of mbar(h) for one step size")
    p.add_argument("--tableau", required=True, help="JSON file {'a': [[...]], 'b': [...]} or a builtin name")

    p = sub.add_parser("interval", parents=[common], help="largest certified step interval")
    p.add_argument("--tableau", required=True, help="JSON file or builtin name")

    p = sub.add_parser("counterexample", parents=[common], help="closed-form or smoothed counterexample",
                       epilog=FIGURE_CSV_HELP)
    p.add_argument("--smooth", action="store_true", help="build the smooth potential and run the witness")

    p = sub.add_parser("search", parents=[common], help="numerical maximization of the dilation",
                       epilog=FIGURE_CSV_HELP)
    p.add_argument("--dim", type=int, default=2, help="space dimension")
    p.add_argument("--starts", type=int, default=20, help="random starts per search")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        doc, artifacts = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, NotImplementedError) as exc:
        # ValueError covers the input-validation errors of the library
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RKContractError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if args.format == "json":
        print(_dumps(doc))
    else:
        key = f"figure.{args.format}"
        if key not in artifacts:
            print(f"error: --format {args.format} is not available for {args.command}", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(artifacts[key])

    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(
            args.command,
            {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k != "out"},
        )
        (out / "result.json").write_text(_dumps(doc) + "\n")
        manifest.artifacts.append("result.json")
        for name, text in artifacts.items():
            (out / name).write_text(text)
            manifest.artifacts.append(name)
        manifest.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
