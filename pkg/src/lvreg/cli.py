"""``lvreg`` command line: simulate, analyze, sweep, control-compare."""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

from lvreg import __version__
from lvreg.analyze import classify
from lvreg.control import compare
from lvreg.integrate import simulate
from lvreg.io import make_report, write_json, write_loop_csv, write_sweep_csv, write_trajectory_csv
from lvreg.scenario import ConfigError, ControlSetup, Scenario, load_scenario, to_mapping, with_overrides
from lvreg.sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4
COMMANDS = ("simulate", "analyze", "sweep", "control-compare")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lvreg", description="Lotka-Volterra regime and regulator toolkit.")
    p.add_argument("--version", action="version", version=f"lvreg {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="preset name (paper-fig2, paper-fig3) or scenario file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--method", choices=("euler", "heun", "rk4"))
    p.add_argument("--steps", type=int)
    p.add_argument("--threshold", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--workers", type=int, default=None, help="processes for sweep")
    return p


def _scenario_record(s: Scenario) -> dict:
    return {"name": s.name, "config": to_mapping(s)}


def _simulate(s: Scenario, out: Path, analyze: bool) -> dict:
    traj = simulate(s.ic, s.params, s.integration)
    write_trajectory_csv(traj, out / "trajectory.csv")
    report = classify(traj, s.params, s.thresholds) if analyze else None
    return make_report(
        _scenario_record(s),
        s.integration.method.value,
        label=report.label.value if report else None,
        report=report,
        metrics={"n_samples": len(traj), "t_end": traj.t_end},
        terminated_early=traj.terminated_early,
    )


def _sweep(s: Scenario, out: Path, workers: int | None) -> dict:
    spec = s.sweep_spec()
    result = run_sweep(spec, workers=workers)
    write_sweep_csv(result, out / "sweep.csv")
    counts = Counter(result.labels())
    label = result.cells[0].label.value if len(result.cells) == 1 else None
    return make_report(
        _scenario_record(s),
        spec.method.value,
        label=label,
        metrics={"cells": len(result.cells), "swept": list(result.swept), "label_counts": dict(sorted(counts.items()))},
    )


def _control(s: Scenario, out: Path) -> dict:
    ctl = s.control or ControlSetup()
    cmp = compare(ctl.plant, ctl.pid, s.lv_setup(), ctl.setpoint, ctl.dt, ctl.t_end)
    write_loop_csv(cmp.pid, out / "pid_loop.csv")
    if cmp.lv is not None:
        write_loop_csv(cmp.lv, out / "lv_loop.csv")
    metrics = {
        "pid": cmp.pid.metrics.to_dict(),
        "lv": cmp.lv.metrics.to_dict() if cmp.lv is not None else None,
        "lv_gain": cmp.gain,
        "lv_plateau": cmp.p_plateau,
        "lv_error": cmp.lv_error,
        "table": cmp.table(),
    }
    return make_report(_scenario_record(s), s.integration.method.value, metrics=metrics)


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def run(command: str, scenario: Scenario, out, workers: int | None = None) -> dict:
    """Execute ``command`` and write its files plus ``report.json`` into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if command == "simulate":
        report = _simulate(scenario, out, analyze=False)
    elif command == "analyze":
        report = _simulate(scenario, out, analyze=True)
    elif command == "sweep":
        report = _sweep(scenario, out, workers)
    elif command == "control-compare":
        report = _control(scenario, out)
    else:
        raise ValueError(f"unknown command {command!r}")
    write_json(report, out / "report.json")
    return report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        thresholds = {}
        for item in args.threshold:
            key, sep, value = item.partition("=")
            if not sep:
                return _error("ParseError", f"--threshold expects KEY=VALUE, got {item!r}", EXIT_CONFIG)
            thresholds[key.strip()] = value.strip()
        scenario = load_scenario(args.scenario)
        scenario = with_overrides(scenario, method=args.method, steps=args.steps, thresholds=thresholds)
    except ConfigError as exc:
        return _error(type(exc).__name__, str(exc), EXIT_CONFIG)
    except OSError as exc:
        return _error("IOError", f"{args.scenario}: {exc.strerror or exc}", EXIT_IO)
    try:
        report = run(args.command, scenario, args.out, workers=args.workers)
    except ConfigError as exc:
        return _error(type(exc).__name__, str(exc), EXIT_CONFIG)
    except OSError as exc:
        path = exc.filename or args.out
        return _error("IOError", f"{path}: {exc.strerror or exc}", EXIT_IO)
    except Exception as exc:  # noqa: BLE001
        return _error(type(exc).__name__, str(exc), EXIT_INTERNAL)
    summary = report["label"] or "ok"
    print(f"{args.command} {scenario.name}: {summary} -> {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
