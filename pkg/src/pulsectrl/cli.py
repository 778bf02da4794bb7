"""Command-line front end: reproducible spectrum, region, simulation, and
verification runs with machine-readable output.

Exit codes: 0 success, 1 domain error (invalid parameters), 2 numerical
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .errors import (
    FloorInsufficient,
    NearEigenvalue,
    NumericalBlowup,
    PulseControlError,
    QuadratureFailure,
    RootIsolationFailure,
)
from .model import ModelParams, PowerLawModel
from .oracle import (
    FastGrid,
    FastOperator,
    eigenfunction_identities,
    r_oracle,
    theta_inner_product,
    theta_reference,
    top_eigenvalues,
)
from .pde_sim import SimConfig, run as run_sim
from .regions import cells_to_csv, min_control_gain_deepening, sweep_plane, sweep_to_dict
from .spectral import assemble_spectrum, r_total

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64


def _fmt(x) -> float:
    """Round-trippable float for JSON (17 significant digits)."""
    return float(f"{float(x):.17g}")


def _manifest(subcommand: str, echo: dict) -> dict:
    blob = json.dumps(echo, sort_keys=True).encode()
    return {
        "subcommand": subcommand,
        "parameters": echo,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config_hash": hashlib.sha256(blob).hexdigest(),
    }


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, keys) -> dict:
    """Config-file values overridden by explicitly set flags."""
    merged = dict(_load_config(getattr(args, "config", None)))
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            merged[key] = val
    return merged


def _params_from(merged: dict) -> ModelParams:
    return ModelParams(
        u_star=float(merged.get("u-star", 1.0)),
        f_val=float(merged.get("f-val", 1.0)),
        f_der=float(merged.get("f-der", 0.0)),
        to_log_der=float(merged.get("to-log-der", 0.0)),
        eps=float(merged.get("eps", 0.02)),
        control_slope=float(merged.get("gain", 0.0)),
    )


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


PARAM_KEYS = ("u-star", "f-val", "f-der", "to-log-der", "eps", "gain")


def _cmd_spectrum(args) -> int:
    merged = _merged(args, PARAM_KEYS)
    params = _params_from(merged)
    report = assemble_spectrum(params)
    eigs = sorted(report.eigenvalues, key=lambda z: (-z.real, z.imag))
    payload = {
        "manifest": _manifest("spectrum", merged),
        "eigenvalues": [[_fmt(z.real), _fmt(z.imag)] for z in eigs],
        "translation_eigenvalue": [_fmt(report.translation_eigenvalue.real),
                                   _fmt(report.translation_eigenvalue.imag)],
        "essential_edge": _fmt(report.essential_edge),
        "verdict": report.verdict,
        "max_real_part": _fmt(report.max_real_part),
        "search_window": report.search_window,
        "diagnostics": report.diagnostics,
    }
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_region(args) -> int:
    merged = _merged(args, ("u-star", "f-val", "eps", "grid", "threads",
                            "min-gain", "tol"))
    grid = int(merged.get("grid", 121))
    threads = int(merged.get("threads", 1))
    result = sweep_plane(
        n_f=grid, n_nu=grid,
        u_star=float(merged.get("u-star", 1.0)),
        f_val=float(merged.get("f-val", 1.0)),
        eps=float(merged.get("eps", 0.02)),
        threads=threads,
        include_min_gain=bool(merged.get("min-gain", False)),
    )
    payload = _manifest("region", merged)
    if args.out:
        base = args.out
        csv_path = base if base.endswith(".csv") else base + ".csv"
        json_path = (base[:-4] if base.endswith(".csv") else base) + "_boundaries.json"
        with open(csv_path, "w") as handle:
            handle.write(cells_to_csv(result.cells))
        with open(json_path, "w") as handle:
            json.dump({"manifest": payload, "hopf": result.hopf,
                       "fold": result.fold}, handle, indent=2)
        print(json.dumps({"manifest": payload, "csv": csv_path,
                          "boundaries": json_path,
                          "cells": len(result.cells),
                          "failures": len(result.failures)}))
    else:
        doc = sweep_to_dict(result)
        doc["manifest"] = payload
        print(json.dumps(doc))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    merged = _merged(args, PARAM_KEYS + ("t-end", "eta", "seed", "shape"))
    params = _params_from(merged)
    model = PowerLawModel.from_params(params)
    config = SimConfig(
        model=model,
        params=params,
        t_end=float(merged.get("t-end", 5.0)),
        eta=float(merged.get("eta", 1e-4)),
        perturbation_shape=str(merged.get("shape", "even_bump")),
        seed=int(merged.get("seed", 0)),
    )
    trace = run_sim(config)
    verdict = "Unstable" if trace.fitted_rate > 0 else "Stable"
    payload = {
        "manifest": _manifest("simulate", merged),
        "fitted_rate": _fmt(trace.fitted_rate),
        "fit_r2": _fmt(trace.fit_r2),
        "verdict": verdict,
        "early_exit": trace.early_exit,
        "diagnostics": trace.diagnostics,
    }
    if args.out:
        csv_path = args.out if args.out.endswith(".csv") else args.out + ".csv"
        lines = ["t,deviation_norm"]
        lines += [f"{_fmt(t)!r},{_fmt(n)!r}"
                  for t, n in zip(trace.times, trace.deviation_norms)]
        with open(csv_path, "w") as handle:
            handle.write("\n".join(lines) + "\n")
        payload["trace_csv"] = csv_path
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _cmd_verify(args) -> int:
    merged = _merged(args, ("tol",))
    tol = float(merged.get("tol", 1e-4))
    grid = FastGrid()
    checks = []

    def record(name, computed, reference, tolerance):
        err = abs(computed - reference)
        checks.append({
            "name": name,
            "computed": [_fmt(np.real(computed)), _fmt(np.imag(computed))],
            "reference": [_fmt(np.real(reference)), _fmt(np.imag(reference))],
            "abs_error": _fmt(err),
            "tolerance": _fmt(tolerance),
            "pass": bool(err <= tolerance),
        })

    evs = top_eigenvalues(FastOperator(grid), 3)
    for ev, ref in zip(evs, (1.25, 0.0, -0.75)):
        record(f"eigenvalue_{ref}", ev, ref, 1e-3)
    for name, rec in eigenfunction_identities(grid).items():
        tolerance = 1e-10 if name.startswith("norm") else 1e-8
        if name == "psi1_dot_vp":
            tolerance = 1e-12
        record(name, rec["computed"], rec["reference"], tolerance)
    for mu in (-1.5, -2.0, -5.0):
        record(f"theta_mu_{mu}", theta_inner_product(mu, grid),
               theta_reference(mu), 1e-6)
    for lh in (2.0, 3.0, 10.0, 1.5 + 1j, 0.5 + 4j, 3 + 1j):
        record(f"oracle_equivalence_{lh}", r_total(lh).total,
               r_oracle(lh, grid), tol)

    payload = {
        "manifest": _manifest("verify", merged),
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
    }
    _emit(payload, args.out)
    return EXIT_OK if payload["all_pass"] else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsectrl",
        description="Stability and controllability of a two-component "
                    "reaction-diffusion pulse under proportional feedback.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", help="output file path")
        p.add_argument("--tol", type=float, help="numerical tolerance")

    p_spec = sub.add_parser("spectrum", help="locate eigenvalues and classify stability")
    for flag in ("--u-star", "--f-val", "--f-der", "--to-log-der", "--eps", "--gain"):
        p_spec.add_argument(flag, type=float)
    add_common(p_spec)
    p_spec.set_defaults(func=_cmd_spectrum)

    p_reg = sub.add_parser("region", help="sweep the (f', nu) parameter plane")
    p_reg.add_argument("--u-star", type=float)
    p_reg.add_argument("--f-val", type=float)
    p_reg.add_argument("--eps", type=float)
    p_reg.add_argument("--grid", type=int, help="points per axis (default 121)")
    p_reg.add_argument("--threads", type=int, help="worker processes (default 1)")
    p_reg.add_argument("--min-gain", action="store_true", default=None,
                       help="also search the minimal stabilizing gain per cell")
    add_common(p_reg)
    p_reg.set_defaults(func=_cmd_region)

    p_sim = sub.add_parser("simulate", help="time-integrate the controlled system")
    for flag in ("--u-star", "--f-val", "--f-der", "--to-log-der", "--eps", "--gain"):
        p_sim.add_argument(flag, type=float)
    p_sim.add_argument("--t-end", type=float)
    p_sim.add_argument("--eta", type=float, help="perturbation amplitude")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--shape", choices=("even_bump", "random"))
    add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify", help="run the brute-force oracle checks")
    add_common(p_ver)
    p_ver.set_defaults(func=_cmd_verify)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; remap to 64, keep 0 for --help
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (QuadratureFailure, RootIsolationFailure, NearEigenvalue,
            NumericalBlowup, FloorInsufficient, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, PulseControlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main():
    raise SystemExit(dispatch())


if __name__ == "__main__":
    main()
