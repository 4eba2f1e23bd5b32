"""Command-line front end.

Subcommands: ``validate``, ``simulate``, ``price``, ``bsde``, ``check``.
Exit codes: 0 success, 1 validation/configuration failure, 2 numerical
failure, 3 I/O error. Reports carry no timestamps so that identical inputs
and seed produce byte-identical outputs, whatever the worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bsde import BsdeConfig, solve_endogenous
from .collateral import CollateralSpec, build_exogenous_path
from .contracts import Contract
from .diagnostics import run_martingale_suite
from .errors import ConfigError, ModelValidationError, NumericalError
from .model import load_model, validate_model
from .pricing import price_exogenous, price_fully_collateralized
from .simulation import TimeGrid, dump_paths_csv, simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

RESULTS_HEADER = "trade_id,convention,k2,k3,price,std_error,n_paths,seed\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; keep 2 for numerics
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_common(p, trade=True):
    p.add_argument("--model", required=True, help="model JSON document")
    if trade:
        p.add_argument("--trade", required=True, help="trade JSON document")
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory (created if missing)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xccy", description="multi-currency collateralized pricing engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a model document")
    p.add_argument("--model", required=True)

    p = sub.add_parser("simulate", help="generate scenario paths")
    _add_common(p, trade=False)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--dump-paths", action="store_true")

    p = sub.add_parser("price", help="price a collateralized trade by Monte Carlo")
    _add_common(p)
    p.add_argument(
        "--mode",
        choices=["exogenous", "full-collateral"],
        default="exogenous",
        help="full-collateral uses the closed form instead of Monte Carlo",
    )

    p = sub.add_parser("bsde", help="solve the endogenous-collateral valuation")
    _add_common(p)
    p.add_argument("--delta1", type=float, default=None, help="override trade haircut above the mark")
    p.add_argument("--delta2", type=float, default=None, help="override trade haircut below the mark")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--dump-surface", action="store_true")

    p = sub.add_parser("check", help="run the martingale certification suite")
    _add_common(p, trade=False)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--checkpoints", type=int, default=4)
    p.add_argument("--threshold", type=float, default=3.0)
    return parser


def _load_trade(path: str) -> tuple[str, Contract, CollateralSpec]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    contract = Contract.from_dict(doc["contract"])
    spec = CollateralSpec.from_dict(doc["collateral"]) if "collateral" in doc else None
    return str(doc.get("trade_id", "trade")), contract, spec


def _write_report(out_dir: str | None, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_dir is None:
        print(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _append_results(out_dir: str, row: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "results.csv")
    fresh = not os.path.exists(path)
    with open(path, "a", encoding="utf-8", newline="") as fh:
        if fresh:
            fh.write(RESULTS_HEADER)
        fh.write(
            f"{row['trade_id']},{row['convention']},{row['k2']},{row['k3']},"
            f"{row['price']!r},{row['std_error']!r},{row['n_paths']},{row['seed']}\n"
        )


def _grid_for(contract: Contract | None, horizon: float | None, steps: int) -> TimeGrid:
    if contract is not None and contract.flows:
        h = horizon if horizon is not None else contract.maturity
        return TimeGrid.regular(h, steps, include=contract.flow_times)
    return TimeGrid.regular(horizon if horizon is not None else 1.0, steps)


def _cmd_validate(args) -> int:
    model = validate_model(load_model(args.model))
    drivers = ", ".join(model.driver_labels) or "none"
    print(f"OK: {len(model.currencies)} currencies, {len(model.assets)} assets, drivers: {drivers}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    model = validate_model(load_model(args.model))
    grid = TimeGrid.regular(args.horizon, args.steps)
    scenario = simulate(model, grid, args.paths, args.seed, n_workers=args.workers)
    report = {
        "command": "simulate",
        "n_paths": scenario.n_paths,
        "seed": scenario.seed,
        "horizon": grid.horizon,
        "n_steps": grid.n_steps,
        "measure": scenario.measure_tag,
        "drivers": list(model.driver_labels),
        "terminal_means": {
            lab: float(np.mean(scenario.fx(lab[3:])[:, -1]))
            if lab.startswith("fx:")
            else float(np.mean(scenario.asset(lab)[:, -1]))
            for lab in model.driver_labels
        },
    }
    if args.dump_paths:
        if args.out is None:
            raise ConfigError("--dump-paths requires --out")
        os.makedirs(args.out, exist_ok=True)
        dump_paths_csv(scenario, os.path.join(args.out, "paths.csv"))
    _write_report(args.out, report)
    return EXIT_OK


def _cmd_price(args) -> int:
    model = validate_model(load_model(args.model))
    trade_id, contract, spec = _load_trade(args.trade)
    if args.mode == "full-collateral":
        k3 = spec.currency if spec is not None else model.domestic
        price = price_fully_collateralized(model, contract, k3)
        row = {
            "trade_id": trade_id,
            "convention": "full-collateral",
            "k2": contract.native_currency,
            "k3": k3,
            "price": price,
            "std_error": 0.0,
            "n_paths": 0,
            "seed": args.seed,
        }
        report = {"command": "price", "mode": "full-collateral", **row}
    else:
        if spec is None:
            raise ConfigError("trade document has no collateral block; use --mode full-collateral for none")
        grid = _grid_for(contract, None, args.steps)
        scenario = simulate(model, grid, args.paths, args.seed, n_workers=args.workers)
        coll = build_exogenous_path(scenario, spec, contract)
        result = price_exogenous(scenario, contract, coll, spec)
        row = {"trade_id": trade_id, **result.to_dict()}
        report = {"command": "price", "mode": "exogenous", "trade_id": trade_id, **result.to_dict()}
    if args.out is not None:
        _append_results(args.out, row)
    _write_report(args.out, report)
    return EXIT_OK


def _cmd_bsde(args) -> int:
    model = validate_model(load_model(args.model))
    trade_id, contract, spec = _load_trade(args.trade)
    if spec is None:
        raise ConfigError("bsde requires a collateral block in the trade document")
    delta1 = spec.delta1 if args.delta1 is None else args.delta1
    delta2 = spec.delta2 if args.delta2 is None else args.delta2
    grid = _grid_for(contract, None, args.steps)
    cfg = BsdeConfig(
        grid=grid,
        n_paths=args.paths,
        seed=args.seed,
        degree=args.degree,
        n_workers=args.workers,
    )
    result = solve_endogenous(model, contract, spec.currency, delta1, delta2, cfg)
    report = {
        "command": "bsde",
        "trade_id": trade_id,
        "v0": result.v0,
        "k2": contract.native_currency,
        "k3": spec.currency,
        "delta1": delta1,
        "delta2": delta2,
        "n_paths": result.n_paths,
        "seed": result.seed,
        "n_steps": grid.n_steps,
        "picard_counts": list(result.picard_counts),
    }
    if args.dump_surface:
        if args.out is None:
            raise ConfigError("--dump-surface requires --out")
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "surface.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write("path_id,time,value\n")
            for p in range(result.surface.shape[0]):
                for j, t in enumerate(grid.times):
                    fh.write(f"{p},{float(t)!r},{float(result.surface[p, j])!r}\n")
    _write_report(args.out, report)
    return EXIT_OK


def _cmd_check(args) -> int:
    model = validate_model(load_model(args.model))
    grid = TimeGrid.regular(args.horizon, args.steps)
    scenario = simulate(model, grid, args.paths, args.seed, n_workers=args.workers)
    reports = run_martingale_suite(scenario, checkpoints=args.checkpoints, threshold=args.threshold)
    passed = all(r.passed for r in reports)
    report = {
        "command": "check",
        "passed": passed,
        "n_paths": args.paths,
        "seed": args.seed,
        "threshold": args.threshold,
        "processes": [r.to_dict() for r in reports],
    }
    _write_report(args.out, report)
    if not passed:
        worst = max(reports, key=lambda r: r.max_abs_z)
        raise NumericalError(f"martingale check failed: {worst.process_id} |z|={worst.max_abs_z:.2f}")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "price": _cmd_price,
    "bsde": _cmd_bsde,
    "check": _cmd_check,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ModelValidationError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
