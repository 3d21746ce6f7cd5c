"""Command line front door.

    beamctl <command> --config <path> [--out <dir>] [--threads N] [--seed S]

Commands: simulate, observability, strategic-check, control, sweep.  Each
reads one flat config file, runs the computation, and writes CSV/JSON/SVG
artifacts into the output directory.

Exit codes: 0 all asserted invariants passed; 1 a numerical assertion
failed (the failing quantity is printed); 2 the config was rejected (the
message carries the offending line).

Determinism contract: identical config, seed and thread count reproduce
every CSV/JSON byte for byte, and the SVGs carry no timestamps.  CSV floats
are written with repr, the shortest round-trip form.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    DegenerateWeightError,
    ForcingGridError,
    InvalidRegionError,
    SingularGramianError,
)

SCHEMA = "beamctl/1"

_RESIDUAL_LIMIT = 1e-6
_BOUND_SLACK = 1e-12
_TREND_SLACK = 1.1


def _limit_threads(n: int) -> None:
    # Best effort: effective when the numeric stack is not yet initialized
    # in this process.  At a fixed thread count reruns are byte-identical.
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, str(n))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _jsonable(value):
    import numpy as np

    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"schema": SCHEMA, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _xi_value(xi) -> float:
    return xi[0] / xi[1] if isinstance(xi, tuple) else float(xi)


def _run_simulate(config, outdir: Path, seed: int) -> list[str]:
    from .config import initial_state
    from .dynamics import trace
    from .plots import plot_signal

    m_modes = config["m_modes"]
    xi = _xi_value(config["xi"])
    state = initial_state(config, m_modes)
    signal = trace(state, xi, config["T"], config["grid"])
    _write_csv(outdir / "trace.csv", ["t", "value"], zip(signal.times, signal.values))
    plot_signal(
        signal.times,
        signal.values,
        outdir / "trace.svg",
        f"free trace at xi = {xi:g}",
        "u(xi, t)",
    )
    return []


def _run_observability(config, outdir: Path, seed: int) -> list[str]:
    import numpy as np

    from .observability import (
        INVERSE_BOUND_CONSTANT,
        inverse_bound_check,
        observability_constant,
        overlap_kernel,
        strategic_check,
        window_mass_lower_bound,
        window_mass_table,
    )
    from .plots import plot_kernel_bound, plot_window_masses
    from .regions import Internal, Pointwise

    p, q = config["xi"]
    xi = p / q
    n = config["n"]
    m_max = config["m_max"]

    rows = window_mass_table(m_max, xi, n)
    _write_csv(
        outdir / "window_masses.csv",
        ["m", "xi", "n", "mass", "bound", "ok"],
        ((r.m, r.xi, r.n, r.mass, r.bound, r.ok) for r in rows),
    )
    plot_window_masses(rows, outdir / "window_masses.svg")

    b_grid = np.arange(config["b_step"], 1.0, config["b_step"])
    t_grid = np.arange(config["t_step"], config["t_max"] + config["t_step"] / 2, config["t_step"])
    bb, tt = np.meshgrid(b_grid, t_grid, indexing="ij")
    lhs, rhs, ok_all = inverse_bound_check(bb.ravel(), tt.ravel())
    kernel_rows = zip(bb.ravel(), tt.ravel(), lhs, rhs, (lhs >= rhs - _BOUND_SLACK))
    _write_csv(outdir / "kernel.csv", ["b", "t", "kernel", "bound", "ok"], kernel_rows)
    plot_kernel_bound(outdir / "kernel.svg")

    report = strategic_check(p, q)
    constants = {
        "xi": {"num": p, "den": q},
        "n": n,
        "inverse_bound_constant": INVERSE_BOUND_CONSTANT,
        "window_mass_lower_bound": window_mass_lower_bound(n),
        "mass_floor_violations": sum(1 for r in rows if not r.ok),
        "strategic": report.strategic,
        "witness_m": report.witness_m,
        "sin_lower_bound": report.lower_bound,
        "observability_constant_internal": observability_constant(
            Internal(xi, n), config["T"], config["m_modes"]
        ),
        "observability_constant_pointwise": observability_constant(
            Pointwise(xi), config["T"], config["m_modes"]
        ),
        "kernel_grid": {
            "b_step": config["b_step"],
            "t_step": config["t_step"],
            "t_max": config["t_max"],
            "points": int(bb.size),
        },
        "kernel_bound_ok": ok_all,
        "kernel_min_margin": float(np.min(lhs - rhs)),
    }
    _write_json(outdir / "observability.json", constants)

    failures = []
    if not ok_all:
        failures.append(
            f"inverse bound violated on the kernel grid "
            f"(worst margin {float(np.min(lhs - rhs)):.3e})"
        )
    return failures


def _run_strategic_check(config, outdir: Path, seed: int) -> list[str]:
    from .observability import strategic_check

    p, q = config["xi"]
    report = strategic_check(p, q)
    _write_json(
        outdir / "strategic.json",
        {
            "xi_num": report.xi_num,
            "xi_den": report.xi_den,
            "strategic": report.strategic,
            "witness_m": report.witness_m,
            "lower_bound": report.lower_bound,
        },
    )
    verdict = "strategic" if report.strategic else f"non-strategic (witness mode {report.witness_m})"
    print(f"xi = {p}/{q}: {verdict}")
    return []


def _control_signal_rows(control, adjoint, region, T: float, grid: int):
    import numpy as np

    from .regions import Pointwise

    times = np.linspace(0.0, T, grid)
    if isinstance(region, Pointwise):
        values = control.point_signal(times)
        label = "v(t)"
    else:
        values = control.field_at(region.midpoint, times)
        label = "g(mid, t)"
    return times, np.asarray(values), label


def _run_control(config, outdir: Path, seed: int) -> list[str]:
    from .config import initial_state
    from .hum import (
        ControlProblem,
        assemble_gramian,
        solve_hum,
        synthesize_control,
        verify_null_control,
    )
    from .plots import plot_signal
    from .regions import Internal, Pointwise

    p, q = config["xi"]
    xi = p / q
    m_modes = config["m_modes"]
    T = config["T"]
    if config["region"] == "internal":
        region = Internal(xi, config["n"])
    else:
        region = Pointwise(xi)
    data = initial_state(config, m_modes)
    problem = ControlProblem(
        region, T, data, m_modes=m_modes, regularization=config.get("epsilon")
    )
    gram = assemble_gramian(region, T, m_modes)
    adjoint, diag = solve_hum(problem, gram)
    control = synthesize_control(adjoint, region, T)
    report = verify_null_control(problem, control, adjoint)

    times, values, label = _control_signal_rows(control, adjoint, region, T, config["grid"])
    _write_csv(outdir / "control_signal.csv", ["t", "value"], zip(times, values))
    plot_signal(times, values, outdir / "control_signal.svg", f"control at xi = {p}/{q}", label)

    region_desc = {
        "kind": config["region"],
        "xi": {"num": p, "den": q},
        "n": config.get("n") if config["region"] == "internal" else None,
    }
    _write_json(
        outdir / "gramian.json",
        {
            "dim": gram.dim,
            "m_modes": gram.m_modes,
            "region": region_desc,
            "T": T,
            "condition_estimate": gram.condition_estimate,
            "entries": [float(v) for v in gram.entries.ravel()],
            "layout": "row-major, coordinates interleaved (a_0, beta_0, a_1, ...)",
        },
    )
    _write_json(
        outdir / "control_report.json",
        {
            "region": region_desc,
            "T": T,
            "m_modes": m_modes,
            "final_residual": report.final_residual,
            "initial_norm": report.initial_norm,
            "relative_residual": report.relative_residual,
            "hum_identity_error": report.hum_identity_error,
            "solve_residual": diag.residual,
            "condition_estimate": diag.condition_estimate,
            "regularization": diag.regularization,
            "hum_energy": diag.hum_energy,
        },
    )
    failures = []
    if report.relative_residual > _RESIDUAL_LIMIT:
        failures.append(
            f"final_residual = {report.relative_residual:.3e} exceeds {_RESIDUAL_LIMIT:.0e}"
        )
    if diag.residual > problem.tolerance:
        failures.append(f"solve_residual = {diag.residual:.3e} exceeds {problem.tolerance:.0e}")
    return failures


def _run_sweep(config, outdir: Path, seed: int) -> list[str]:
    from .config import initial_state
    from .limits import field_battery, scaling_report, sweep
    from .plots import plot_sweep_convergence

    p, q = config["xi"]
    m_modes = config["m_modes"]
    T = config["T"]
    data = initial_state(config, m_modes)
    battery = field_battery(m_modes, T, seed=seed)
    result = sweep(
        p,
        q,
        config["n_list"],
        data,
        T=T,
        m_modes=m_modes,
        regularization=config.get("epsilon"),
        battery=battery,
        grid=config["grid"],
    )
    header = [
        "n",
        "adjoint_norm_f",
        "adjoint_norm_l2vdual",
        "control_energy",
        "final_residual",
        "trace_distance_l2",
        "trace_distance_hneg",
        "state_distance_q1",
        "state_distance_q2",
        "state_distance_q3",
        "state_distance_q4",
        "pairing_value",
        "pairing_gap_max",
        "condition_estimate",
    ]
    rows = [
        (
            r.n,
            r.adjoint_norm_f,
            r.adjoint_norm_l2vdual,
            r.control_energy,
            r.final_residual,
            r.trace_distance_l2,
            r.trace_distance_hneg,
            *r.state_distances,
            r.pairing_value,
            r.pairing_gap_max,
            r.condition_estimate,
        )
        for r in result.records
    ]
    _write_csv(outdir / "sweep.csv", header, rows)
    plot_sweep_convergence(result, outdir / "convergence.svg")

    mode = "strategic" if result.strategic.strategic else "general"
    fits = scaling_report(result.records, mode) if len(result.records) >= 3 else None
    payload = {
        "xi": {"num": p, "den": q},
        "T": T,
        "m_modes": m_modes,
        "seed": seed,
        "strategic": result.strategic.strategic,
        "witness_m": result.strategic.witness_m,
        "sin_lower_bound": result.strategic.lower_bound,
        "divergent_modes": list(result.divergent_modes),
        "pointwise_residual": result.pointwise_residual,
        "pointwise_control_energy": result.pointwise_energy,
        "pairing_limits": list(result.pairing_limits),
        "mode": mode,
        "fits": None
        if fits is None
        else [
            {
                "quantity": f.quantity,
                "exponent": f.exponent,
                "intercept": f.intercept,
                "bound": f.bound,
                "passed": f.passed,
            }
            for f in fits.fits
        ],
    }
    _write_json(outdir / "scaling.json", payload)

    failures = []
    for r in result.records:
        if r.final_residual > _RESIDUAL_LIMIT:
            failures.append(
                f"final_residual at n = {r.n} is {r.final_residual:.3e}, "
                f"exceeds {_RESIDUAL_LIMIT:.0e}"
            )
    if result.strategic.strategic:
        dists = [r.trace_distance_l2 for r in result.records]
        for a, b in zip(dists, dists[1:]):
            if b > a * _TREND_SLACK:
                failures.append(
                    f"trace_distance_l2 increased beyond slack: {a:.6g} -> {b:.6g}"
                )
                break
    return failures


_RUNNERS = {
    "simulate": _run_simulate,
    "observability": _run_observability,
    "strategic-check": _run_strategic_check,
    "control": _run_control,
    "sweep": _run_sweep,
}


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="beamctl",
        description="beam controllability experiments: internal windows, "
        "point controls, and the window-to-point limit",
    )
    parser.add_argument("command", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--out", default="beamctl-out", help="artifact directory")
    parser.add_argument("--threads", type=int, default=1, help="numeric thread cap")
    parser.add_argument("--seed", type=int, default=None, help="battery seed for sweeps")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    if args.threads < 1:
        print("beamctl: --threads must be at least 1", file=sys.stderr)
        return 2
    _limit_threads(args.threads)

    from .config import parse_config
    from .limits import DEFAULT_BATTERY_SEED

    seed = args.seed if args.seed is not None else DEFAULT_BATTERY_SEED
    try:
        config = parse_config(args.config, args.command)
    except ConfigError as exc:
        print(f"beamctl: config error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(args.out)
    try:
        failures = _RUNNERS[args.command](config, outdir, seed)
    except ConfigError as exc:
        print(f"beamctl: config error: {exc}", file=sys.stderr)
        return 2
    except (InvalidRegionError, DegenerateWeightError) as exc:
        # region or weight inconsistencies trace back to config values
        print(f"beamctl: config error: {exc}", file=sys.stderr)
        return 2
    except (SingularGramianError, ForcingGridError) as exc:
        print(f"beamctl: numerical failure: {exc}", file=sys.stderr)
        return 1

    if failures:
        for failure in failures:
            print(f"beamctl: numerical failure: {failure}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
