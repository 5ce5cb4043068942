"""Command-line front end: critical values, stationary states, profiles, evolution, sweeps.

Invocation::

    trilayer <command> --config cfg.json [--format csv|json] [--out path] [...]

Exit codes: 0 success, 2 configuration validation failure, 3 solver failure.
Numeric output uses 17 significant digits so round-trips are lossless, and
identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import evolution, interfaces, stationary
from .errors import AssumptionViolated, TrilayerError
from .model import LinearRates, ModelConfig, load_config, validate_config

_SWEEP_PARAMS = ("sigma_bar", "nu1", "nu2", "sigma_Q", "sigma_D", "lambda1", "lambda2", "mu")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{x:.17g}"


def _write(out: str | None, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(rows: list[list], header: list[str]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# --- commands -----------------------------------------------------------------


def _critical_report(cfg) -> dict:
    sb = cfg.sigma_bar
    cv = stationary.critical_values(cfg)
    report = {
        "eta_star": interfaces.eta_star(cfg),
        "sigma_star": cv.sigma_star,
        "sigma_sub_star": cv.sigma_sub_star,
        "R_star": None,
        "R_sub_star": None,
        "R_q_star": None,
    }
    if sb > cfg.sigma_Q:
        report["R_star"] = interfaces.R_star(cfg, sb)
        report["R_sub_star"] = interfaces.R_sub_star(cfg, sb)
    elif sb > cfg.sigma_D:
        report["R_q_star"] = interfaces.R_q_star(cfg, sb)
    return report


_CRITICAL_COLUMNS = ["eta_star", "R_star", "R_sub_star", "R_q_star", "sigma_star", "sigma_sub_star"]


def run_critical(cfg, args) -> None:
    report = _critical_report(cfg)
    if args.format == "json":
        _write(args.out, _json(report))
    else:
        _write(args.out, _csv([[report[c] for c in _CRITICAL_COLUMNS]], _CRITICAL_COLUMNS))


_STATIONARY_COLUMNS = ["kind", "R_s", "eta_s", "rho_s", "residual"]


def run_stationary(cfg, args) -> None:
    st = stationary.stationary_solution(cfg)
    payload = {
        "kind": st.kind,
        "R_s": st.R_s,
        "eta_s": st.eta_s,
        "rho_s": st.rho_s,
        "residual": st.residual,
    }
    if args.format == "json":
        _write(args.out, _json(payload))
    else:
        _write(args.out, _csv([[payload[c] for c in _STATIONARY_COLUMNS]], _STATIONARY_COLUMNS))


def _profile_rows(profile) -> list[list]:
    rows: list[list] = []
    for layer in profile.layers:
        if layer.arc is None:
            rs = np.linspace(layer.r_start, layer.r_end, 17)
        else:
            rs = layer.arc.r_grid
        for r in rs:
            r = float(r)
            if rows and r <= rows[-1][0]:
                continue
            rows.append([r, layer.concentration(r), layer.slope(r), layer.kind])
    return rows


def run_profile(cfg, args) -> None:
    profile = interfaces.assemble_profile(cfg, args.R)
    rows = _profile_rows(profile)
    if args.format == "json":
        payload = {
            "R": profile.R,
            "sigma_bar": profile.sigma_bar,
            "rho": profile.rho,
            "eta": profile.eta,
            "points": [
                {"r": r, "sigma": s, "dsigma": ds, "layer": kind} for r, s, ds, kind in rows
            ],
        }
        _write(args.out, _json(payload))
    else:
        _write(args.out, _csv(rows, ["r", "sigma", "dsigma", "layer"]))


def _events_path(out: str) -> str:
    if out.endswith(".csv"):
        return out[: -len(".csv")] + ".events.csv"
    return out + ".events"


def run_evolve(cfg, args) -> None:
    traj = evolution.evolve(
        cfg, args.t_end, R0=args.R0, sample_dt=args.sample_dt
    )
    sample_rows = [
        [s.t, s.R, s.rho, s.eta, s.state.value] for s in traj.samples
    ]
    event_rows = [[e.t, e.from_state.value, e.to_state.value] for e in traj.events]
    if args.format == "json":
        payload = {
            "samples": [
                {"t": s.t, "R": s.R, "rho": s.rho, "eta": s.eta, "state": s.state.value}
                for s in traj.samples
            ],
            "events": [
                {"t": e.t, "from": e.from_state.value, "to": e.to_state.value}
                for e in traj.events
            ],
            "terminal": {"kind": traj.terminal.kind, "R_s": traj.terminal.R_s},
        }
        _write(args.out, _json(payload))
        return
    samples_csv = _csv(sample_rows, ["t", "R", "rho", "eta", "state"])
    events_csv = _csv(event_rows, ["t", "from", "to"])
    if args.out in (None, "-"):
        _write(args.out, samples_csv + "\n" + events_csv)
    else:
        _write(args.out, samples_csv)
        _write(_events_path(args.out), events_csv)


def _override_parameter(model_cfg: ModelConfig, name: str, value: float) -> ModelConfig:
    if name == "sigma_bar":
        return replace(model_cfg, sigma_bar=value)
    if name in ("nu1", "nu2", "sigma_Q", "sigma_D"):
        return replace(model_cfg, thresholds=replace(model_cfg.thresholds, **{name: value}))
    if not isinstance(model_cfg.rates, LinearRates):
        raise ValueError(f"sweeping {name} requires the linear rate family")
    return replace(model_cfg, rates=replace(model_cfg.rates, **{name: value}))


_SWEEP_COLUMNS = [
    "value", "sigma_star", "sigma_sub_star", "R_star", "R_sub_star",
    "kind", "R_s", "eta_s", "rho_s", "error",
]


def _sweep_row(model_cfg: ModelConfig, name: str, value: float) -> dict:
    row = dict.fromkeys(_SWEEP_COLUMNS)
    row["value"] = value
    row["error"] = ""
    try:
        cfg = validate_config(_override_parameter(model_cfg, name, value))
        cv = stationary.critical_values(cfg)
        row["sigma_star"] = cv.sigma_star
        row["sigma_sub_star"] = cv.sigma_sub_star
        if cfg.sigma_bar > cfg.sigma_Q:
            row["R_star"] = interfaces.R_star(cfg)
            row["R_sub_star"] = interfaces.R_sub_star(cfg)
        st = stationary.stationary_solution(cfg)
        row["kind"] = st.kind
        row["R_s"] = st.R_s
        row["eta_s"] = st.eta_s
        row["rho_s"] = st.rho_s
    except AssumptionViolated as exc:
        row["error"] = "; ".join(name for name, _ in exc.violations)
    except (TrilayerError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(model_cfg: ModelConfig, args) -> None:
    try:
        start_s, stop_s, count_s = args.grid.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError as exc:
        raise ValueError(f"bad --grid {args.grid!r}; expected start:stop:count") from exc
    if count < 2:
        raise ValueError("grid must have at least 2 points")
    if not stop > start:
        raise ValueError("grid must be strictly increasing")
    grid = np.linspace(start, stop, count)
    rows = [_sweep_row(model_cfg, args.param, float(v)) for v in grid]
    if args.format == "json":
        _write(args.out, _json({"parameter": args.param, "rows": rows}))
    else:
        _write(args.out, _csv([[row[c] for c in _SWEEP_COLUMNS] for row in rows], _SWEEP_COLUMNS))


# --- argument parsing and dispatch ------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trilayer",
        description="Three-layer radial tumor model: critical values, stationary states, profiles, evolution, parameter sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default="-", help="output path (default stdout)")

    common(sub.add_parser("critical", help="critical radii and nutrient values"))
    common(sub.add_parser("stationary", help="classify and compute the stationary state"))

    p = sub.add_parser("profile", help="assemble the radial nutrient profile")
    common(p)
    p.add_argument("--R", type=float, required=True, help="tumor radius")

    p = sub.add_parser("evolve", help="integrate the tumor-radius evolution")
    common(p)
    p.add_argument("--R0", type=float, default=None, help="initial radius (default: config R0)")
    p.add_argument("--t-end", type=float, required=True, dest="t_end")
    p.add_argument("--sample-dt", type=float, default=None, dest="sample_dt",
                   help="sample spacing (default t_end/100)")

    p = sub.add_parser("sweep", help="sweep one parameter over a grid")
    common(p)
    p.add_argument("--param", required=True, choices=_SWEEP_PARAMS)
    p.add_argument("--grid", required=True, help="start:stop:count")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        model_cfg = load_config(args.config)
        cfg = validate_config(model_cfg)
    except AssumptionViolated as exc:
        for name, detail in exc.violations:
            print(f"invalid configuration: {name} ({detail})", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "critical":
            run_critical(cfg, args)
        elif args.command == "stationary":
            run_stationary(cfg, args)
        elif args.command == "profile":
            run_profile(cfg, args)
        elif args.command == "evolve":
            run_evolve(cfg, args)
        elif args.command == "sweep":
            run_sweep(model_cfg, args)
    except Exception as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
