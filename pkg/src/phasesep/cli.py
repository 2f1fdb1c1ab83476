"""Batch entry points: profile | disk | multik | almgren | eigen | stability |
blowdown.

Configuration is resolved as defaults < key=value config file < command-line
flags, echoed into the output directory next to the artifacts; all files are
written atomically and identical (config, seed) pairs reproduce identical
bytes.  Exit code 0 iff every enabled check passes.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .almgren import check_doubling, check_growth, check_remainder, trace
from .blowdown import blowdown_ladder, frequency_plateau
from .diskflow import init_state, relax, verify_theorem4
from .eigencircle import (
    CircleConfig,
    fit_gap,
    lagrange_multiplier,
    minimize_L,
    minimize_L_newton,
)
from .geometry import make_disk_grid
from .io import (
    read_fields,
    write_csv,
    write_energy_csv,
    write_fields,
    write_json,
    write_profile_csv,
    write_trace_csv,
)
from .multik import init_multik, relax_multik, verify_theorem15
from .profile1d import (
    almgren_1d,
    deviation_constant,
    normalize,
    sliding_compare,
    solve_profile,
)
from .stability import (
    first_eigenvalue,
    lambda_monotone,
    profile_background,
    restrict_background,
    zero_background,
)

DEFAULTS = {
    "profile": {
        "a": 1.0,
        "L": 40.0,
        "n": 4096,
        "tol": 1e-10,
        "seed": 0,
        "compare_seed": -1,
        "gap_tol": 1e-6,
    },
    "disk": {
        "d": 2,
        "R": 16.0,
        "nr": 256,
        "ntheta": 512,
        "tol": 1e-8,
        "max_steps": 20000,
        "seed": 0,
    },
    "multik": {
        "d": 3.0,
        "k": 3,
        "R": 16.0,
        "nr": 256,
        "ntheta": 480,
        "tol": 1e-8,
        "max_steps": 20000,
        "seed": 0,
    },
    "almgren": {"input": "", "slack": 1e-2},
    "eigen": {
        "d": 2,
        "lambdas": "1e2,1e3,1e4,1e5,1e6",
        "n": 4096,
        "tol": 1e-9,
        "seed": 0,
    },
    "stability": {
        "background": "profile",
        "R_list": "5,10,20",
        "nr_per_unit": 12.8,
        "ntheta": 128,
        "tol": 1e-7,
        "a": 1.0,
        "L": 40.0,
        "n": 4096,
        "seed": 0,
    },
    "blowdown": {"input": "", "radii": "4,8,12"},
}


def _parse_config_file(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def resolve_config(command, args):
    cfg = dict(DEFAULTS[command])
    file_values = _parse_config_file(args.config) if args.config else {}
    for key, raw in file_values.items():
        if key not in cfg:
            raise ValueError(f"unknown config key {key!r} for {command}")
        cfg[key] = type(cfg[key])(raw)
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = type(cfg[key])(flag)
    return cfg


def _echo_config(outdir, command, cfg):
    lines = [f"command={command}", f"version={__version__}"]
    lines += [f"{k}={cfg[k]}" for k in sorted(cfg)]
    path = os.path.join(outdir, "config.txt")
    from .io import _atomic_write

    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def _floats(csv_text):
    return [float(x) for x in csv_text.split(",") if x.strip()]


def cmd_profile(cfg, outdir):
    p = normalize(
        solve_profile(cfg["a"], cfg["L"], cfg["n"], tol=cfg["tol"], seed=cfg["seed"])
    )
    write_profile_csv(os.path.join(outdir, "profile.csv"), p)
    ladder_r = [p.L / 16, p.L / 8, p.L / 4, p.L / 2, 0.8 * p.L]
    n_ladder = [almgren_1d(p, r) for r in ladder_r]
    A = deviation_constant(p)
    report = {
        "a": p.a,
        "L": p.L,
        "deviation_constant": A,
        "residual": p.residual,
        "crossing_value": float(p.u[p.n // 2]),
        "N_ladder": {format(r, ".6g"): N for r, N in zip(ladder_r, n_ladder)},
        "N_nondecreasing": bool(np.all(np.diff(n_ladder) >= -1e-3)),
    }
    ok = p.residual <= cfg["tol"] * 10 and report["N_nondecreasing"]
    if cfg["compare_seed"] >= 0:
        p2 = normalize(
            solve_profile(
                cfg["a"], cfg["L"], cfg["n"], tol=cfg["tol"], seed=cfg["compare_seed"]
            )
        )
        t0, gap = sliding_compare(p, p2)
        report["sliding"] = {"t0": t0, "gap": gap, "compare_seed": cfg["compare_seed"]}
        ok = ok and gap <= cfg["gap_tol"]
    report["ok"] = bool(ok)
    write_json(os.path.join(outdir, "report.json"), report)
    return ok


def cmd_disk(cfg, outdir):
    grid = make_disk_grid(cfg["R"], cfg["nr"], cfg["ntheta"], cfg["d"])
    state = init_state(cfg["d"], cfg["R"], grid)
    fields = relax(state, tol=cfg["tol"], max_steps=cfg["max_steps"])
    rep = verify_theorem4(fields)
    t = trace(fields)
    write_fields(os.path.join(outdir, "fields.psfld"), fields)
    write_trace_csv(os.path.join(outdir, "trace.csv"), t)
    write_energy_csv(os.path.join(outdir, "energy.csv"), state.energy_trace)
    report = rep.to_dict()
    report["converged"] = bool(state.converged)
    report["residual"] = state.residual
    report["steps"] = state.steps
    report["newton_iters"] = state.newton_iters
    report["energy_initial"] = state.energy_trace[0][1]
    report["energy_final"] = state.energy_trace[-1][1]
    write_json(os.path.join(outdir, "report.json"), report)
    return bool(state.converged and rep.all_ok)


def cmd_multik(cfg, outdir):
    d = cfg["d"] if abs(cfg["d"] - round(cfg["d"])) > 1e-12 else int(round(cfg["d"]))
    grid = make_disk_grid(cfg["R"], cfg["nr"], cfg["ntheta"], d)
    state = init_multik(d, cfg["k"], cfg["R"], grid)
    relax_multik(state, tol=cfg["tol"], max_steps=cfg["max_steps"])
    rep = verify_theorem15(state)
    write_fields(os.path.join(outdir, "fields.psfld"), state.fields)
    rows = [
        [r, b, N]
        for r, b, N in zip(
            rep.details["r_ladder"], rep.details["b_ladder"], rep.details["N_ladder"]
        )
    ]
    write_csv(os.path.join(outdir, "ladders.csv"), ["r", "b", "N"], rows)
    write_energy_csv(os.path.join(outdir, "energy.csv"), state.energy_trace)
    report = rep.to_dict()
    report["converged"] = bool(state.converged)
    report["residual"] = state.residual
    write_json(os.path.join(outdir, "report.json"), report)
    return bool(state.converged and rep.all_ok)


def cmd_almgren(cfg, outdir):
    if not cfg["input"]:
        raise ValueError("almgren needs --input pointing at a PSFLD1 dump")
    fields = read_fields(cfg["input"])
    t = trace(fields)
    d = fields.d
    reports = {
        "remainder": check_remainder(t, slack=cfg["slack"]).to_dict(),
        "doubling": check_doubling(t, d, slack=cfg["slack"]).to_dict(),
        "growth": check_growth(t, d, slack=cfg["slack"]).to_dict(),
    }
    write_trace_csv(os.path.join(outdir, "trace.csv"), t)
    ok = all(rep["passed"] for rep in reports.values())
    reports["ok"] = bool(ok)
    reports["d"] = float(d)
    write_json(os.path.join(outdir, "report.json"), reports)
    return ok


def cmd_eigen(cfg, outdir):
    lambdas = _floats(cfg["lambdas"])
    rows = []
    values = []
    for lam in lambdas:
        circle = CircleConfig(cfg["d"], lam, n=cfg["n"], tol=cfg["tol"])
        res = minimize_L(circle, seed=cfg["seed"])
        mult, _ = lagrange_multiplier(res)
        rows.append([cfg["d"], lam, res.value, mult, res.iterations, res.residual])
        values.append(res.value)
    write_csv(
        os.path.join(outdir, "eigen.csv"),
        ["d", "Lambda", "L_value", "lambda_mult", "iterations", "residual"],
        rows,
    )
    mid = CircleConfig(cfg["d"], lambdas[len(lambdas) // 2], n=cfg["n"], tol=cfg["tol"])
    cross = abs(minimize_L(mid, seed=cfg["seed"]).value - minimize_L_newton(mid).value)
    report = {
        "d": cfg["d"],
        "upper_bound_ok": bool(np.all(np.array(values) <= cfg["d"] ** 2 + 1e-6)),
        "crosscheck_gap": cross,
        "crosscheck_ok": bool(cross <= 1e-6),
    }
    if len(lambdas) >= 3:
        C, slope = fit_gap(cfg["d"], lambdas, values)
        report["C"] = C
        report["slope"] = slope
        report["slope_in_band"] = bool(-0.35 <= slope <= -0.15)
    ok = report["upper_bound_ok"] and report["crosscheck_ok"] and report.get(
        "slope_in_band", True
    )
    report["ok"] = bool(ok)
    write_json(os.path.join(outdir, "fit.json"), report)
    return ok


def cmd_stability(cfg, outdir):
    R_list = _floats(cfg["R_list"])
    R_max = max(R_list)
    n_r = int(round(cfg["nr_per_unit"] * R_max))
    grid = make_disk_grid(R_max, n_r, cfg["ntheta"], 1)
    if cfg["background"] == "zero":
        bg = zero_background(grid)
    elif cfg["background"] == "profile":
        p = normalize(
            solve_profile(cfg["a"], cfg["L"], cfg["n"], tol=1e-9, seed=cfg["seed"])
        )
        bg = profile_background(p, grid)
    else:
        raise ValueError(f"unknown background {cfg['background']!r}")
    rep = lambda_monotone(bg, R_list, tol=cfg["tol"])
    rows = []
    for R in R_list:
        pair = first_eigenvalue(restrict_background(bg, R), tol=cfg["tol"])
        rows.append([R, pair.lam, pair.iterations, pair.residual])
    write_csv(
        os.path.join(outdir, "stability.csv"),
        ["R", "lambda", "iterations", "residual"],
        rows,
    )
    pair = first_eigenvalue(bg, tol=cfg["tol"])
    eig_fields = type(bg)(bg.grid, bg.d, np.stack([pair.phi, pair.psi]))
    write_fields(os.path.join(outdir, "eigenpair.psfld"), eig_fields)
    ok = rep["nonincreasing"] and min(rep["lam"]) >= -1e-6
    report = dict(rep)
    report["ok"] = bool(ok)
    write_json(os.path.join(outdir, "report.json"), report)
    return ok


def cmd_blowdown(cfg, outdir):
    if not cfg["input"]:
        raise ValueError("blowdown needs --input pointing at a PSFLD1 dump")
    fields = read_fields(cfg["input"])
    radii = _floats(cfg["radii"])
    rows = blowdown_ladder(fields, radii)
    pl = frequency_plateau(fields)
    write_csv(
        os.path.join(outdir, "blowdown.csv"),
        ["R", "L_R", "c", "residual", "N_plateau"],
        [[r["R"], r["L_R"], r["c"], r["residual"], pl.N_outer] for r in rows],
    )
    report = {
        "rows": rows,
        "plateau": pl.to_dict(),
        "residual_decreasing": bool(
            np.all(np.diff([r["residual"] for r in rows]) < 0)
        ),
    }
    ok = pl.estimate is not None
    report["ok"] = bool(ok)
    write_json(os.path.join(outdir, "report.json"), report)
    return ok


COMMANDS = {
    "profile": cmd_profile,
    "disk": cmd_disk,
    "multik": cmd_multik,
    "almgren": cmd_almgren,
    "eigen": cmd_eigen,
    "stability": cmd_stability,
    "blowdown": cmd_blowdown,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phasesep",
        description="Numerical laboratory for the system lap u = u v^2, lap v = v u^2",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in DEFAULTS.items():
        p = sub.add_parser(name)
        p.add_argument("--out", default=None, help="output directory (default: runs/<command>)")
        p.add_argument("--config", default=None, help="key=value config file")
        for key, val in defaults.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        cfg = resolve_config(command, args)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    outdir = args.out or os.path.join("runs", command)
    os.makedirs(outdir, exist_ok=True)
    _echo_config(outdir, command, cfg)
    try:
        ok = COMMANDS[command](cfg, outdir)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{command}: {'ok' if ok else 'CHECK FAILED'} (artifacts in {outdir})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
