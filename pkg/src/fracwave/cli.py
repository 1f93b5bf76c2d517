"""Config-driven experiment runner.

Subcommands: ml, frac, solve, regularity, hidden, verify.  A JSON config
file can preload any flag's value; explicit flags win.  All outputs embed
the resolved parameters, and reruns with the same config and seed are
bit-identical.  Exit codes: 0 success, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .boundary import hidden_inequality_ratio, normal_trace, trace_to_csv
from .fracops import (
    SampledPath,
    TimeGrid,
    norm_equivalence_study,
    semigroup_check,
    young_bound_check,
)
from .mittag_leffler import MLParams, ml, verify_decay_bound
from .params import FracOrder
from .presets import PRESET_NAMES, build_preset
from .regularity import (
    initial_convergence,
    l2_time_norms,
    smooth_data_velocity,
    uniform_bound_report,
    velocity_blowup_rate,
)
from .solver import SolutionQuery, solve_field, write_manifest, write_snapshots_csv
from .spectral import build_interval, build_rectangle
from .verify import report_lines, run_all


def _json_dump(obj, filename: str) -> None:
    with open(filename, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _build_domain(descriptor: str, modes: int):
    kind, _, dims = descriptor.partition(":")
    if kind == "interval":
        return build_interval(float(dims or "1.0"), modes)
    if kind == "rectangle":
        parts = (dims or "1.0,1.0").split(",")
        return build_rectangle(float(parts[0]), float(parts[1]), modes)
    raise ValueError(f"unknown domain {descriptor!r}; use interval:L or rectangle:L1,L2")


_DEFAULTS: dict[str, dict] = {
    "ml": {"alpha": 1.5, "beta": 1.0, "z": None, "z_range": "-10:0:11",
           "decay_check": False, "out": None},
    "frac": {"check": "young", "beta": 0.5, "gamma": 0.5, "t_end": 1.0,
             "steps": 512, "seed": 7, "draws": 50, "out": None},
    "solve": {"alpha": 1.5, "domain": "interval:1.0", "modes": 64,
              "preset": "single-mode", "mode_k": 1, "decay_p": 2.0, "seed": 7,
              "t_end": 1.0, "steps": 128, "points": 65, "which": "value",
              "theta": 0.0, "out_prefix": "fracwave_run"},
    "regularity": {"task": "initial", "alpha": 1.5, "theta": 0.4,
                   "theta_grad": 0.2, "theta_cap": 0.3, "epsilon": 0.3, "length": 1.0,
                   "modes": 256, "preset": "single-mode", "mode_k": 1,
                   "decay_p": 2.0, "delta": 0.05, "seed": 7, "t_end": 1.0,
                   "out": None},
    "hidden": {"alpha": 1.5, "draws": 100, "seed": 7, "modes": 64,
               "length": 1.0, "t_end": 1.0, "steps": 192, "decay_p": 2.0,
               "trace_out": None, "out": None},
    "verify": {"scope": "all", "seed": 7, "out": None},
}


def _resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """Merge precedence: explicit flags > config file > built-in defaults."""
    merged = dict(_DEFAULTS[args.command])
    merged.update({k: v for k, v in config.items() if k in merged})
    merged.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
    merged["command"] = args.command
    return argparse.Namespace(**merged)


def _cmd_ml(args) -> int:
    params = MLParams(args.alpha, args.beta)
    if args.z is not None:
        z = np.array([float(v) for v in args.z.split(",")])
    else:
        lo, hi, n = args.z_range.split(":")
        z = np.linspace(float(lo), float(hi), int(n))
    values = ml(params, z)
    rows = {"alpha": args.alpha, "beta": args.beta,
            "z": [float(v) for v in z], "E": [float(v) for v in values]}
    if args.decay_check:
        samples = [-(2.0**k) for k in range(21)]
        fit = verify_decay_bound(params, samples)
        rows["decay_check"] = {
            "mu": fit.mu, "c_empirical": fit.c_empirical,
            "sample_count": fit.sample_count, "max_violation": fit.max_violation,
        }
        print(f"decay envelope: c_empirical={fit.c_empirical:.6g} "
              f"max_violation={fit.max_violation:.3g}")
        if fit.violated:
            _maybe_write(rows, args.out)
            return 1
    for zi, vi in zip(z, values):
        print(f"E_{{{args.alpha},{args.beta}}}({float(zi)!r}) = {float(vi)!r}")
    _maybe_write(rows, args.out)
    return 0


def _maybe_write(obj: dict, out: str | None) -> None:
    if out:
        _json_dump(obj, out)


def _random_trig(grid: TimeGrid, seed: int) -> SampledPath:
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(8)
    t = grid.nodes
    vals = np.zeros_like(t)
    for k in range(8):
        vals += c[k] * np.sin((k + 1) * np.pi * t / grid.t_end)
    return SampledPath(grid, vals)


def _cmd_frac(args) -> int:
    grid = TimeGrid(args.t_end, args.steps)
    out: dict = {"t_end": args.t_end, "steps": args.steps, "beta": args.beta, "seed": args.seed}
    status = 0
    if args.check == "young":
        f = _random_trig(grid, args.seed)
        lhs, rhs = young_bound_check(f, args.beta)
        out["young"] = {"lhs": lhs, "rhs": rhs}
        print(f"contraction: {lhs:.6g} <= {rhs:.6g}")
        status = 0 if lhs <= rhs * 1.001 else 1
    elif args.check == "semigroup":
        f = _random_trig(grid, args.seed)
        disc = semigroup_check(f, args.beta, args.gamma)
        out["semigroup"] = {"gamma": args.gamma, "discrepancy": disc}
        print(f"composition discrepancy: {disc:.6g}")
    elif args.check == "equivalence":
        paths = [_random_trig(grid, args.seed + i) for i in range(args.draws)]
        study = norm_equivalence_study(paths, args.beta)
        out["equivalence"] = {
            "draws": args.draws,
            "ratio_min": study.ratio_min,
            "ratio_max": study.ratio_max,
            "skipped": study.skipped,
        }
        print(f"ratio bracket: [{study.ratio_min:.6g}, {study.ratio_max:.6g}]")
        status = 0 if study.ratio_max / study.ratio_min < 100.0 else 1
    _maybe_write(out, args.out)
    return status


def _cmd_solve(args) -> int:
    domain = _build_domain(args.domain, args.modes)
    data = build_preset(args.preset, domain, mode=args.mode_k, p=args.decay_p,
                        seed=args.seed, on="u0" if args.preset == "single-mode" else "u0")
    grid = TimeGrid(args.t_end, args.steps)
    query = SolutionQuery(FracOrder(args.alpha), domain, data, grid, args.which)
    if domain.is_interval:
        points = np.linspace(0.0, domain.lengths[0], args.points)
    else:
        px = np.linspace(0.0, domain.lengths[0], args.points)
        py = np.linspace(0.0, domain.lengths[1], args.points)
        PX, PY = np.meshgrid(px, py, indexing="ij")
        points = np.stack([PX.ravel(), PY.ravel()], axis=1)
    fields = solve_field(query, points)
    prefix = args.out_prefix
    write_snapshots_csv(query, points, fields, f"{prefix}_snapshots.csv")
    write_manifest(query, f"{prefix}_manifest.json", theta=args.theta,
                   extra={"preset": args.preset, "seed": args.seed})
    print(f"wrote {prefix}_snapshots.csv and {prefix}_manifest.json")
    return 0


def _cmd_regularity(args) -> int:
    domain = build_interval(args.length, args.modes)
    data = build_preset(args.preset, domain, mode=args.mode_k, p=args.decay_p,
                        seed=args.seed, delta=args.delta)
    t_seq = 2.0 ** (-np.arange(4, 15, dtype=float))
    out: dict = {"task": args.task, "alpha": args.alpha, "preset": args.preset, "seed": args.seed}
    if args.task == "initial":
        table = initial_convergence(domain, data, args.alpha, args.theta, t_seq)
        out["table"] = {k: np.asarray(v).tolist() for k, v in table.items() if k in ("t", "h1_error", "velocity_error")}
        out["theta"] = table["theta"]
        print(f"final energy-norm error: {table['h1_error'][-1]:.6g}")
    elif args.task == "uniform":
        reports = uniform_bound_report(domain, [data], args.alpha, args.theta, args.t_end)
        out["reports"] = [r.as_dict() for r in reports]
        print(f"sup-norm ratio: {reports[0].value:.6g}")
    elif args.task == "l2norms":
        grad, cap = l2_time_norms(domain, data, args.alpha, args.theta_grad, args.theta_cap, args.t_end)
        out["reports"] = [grad.as_dict(), cap.as_dict()]
        print(f"gradient route: {grad.value:.6g}  derivative route: {cap.value:.6g}")
    elif args.task == "smooth":
        table = smooth_data_velocity(domain, data, args.alpha, args.epsilon, t_seq)
        out["table"] = {"t": table["t"].tolist(), "velocity_error": table["velocity_error"].tolist()}
        out["envelope_exponent"] = table["envelope_exponent"]
        print(f"final velocity error: {table['velocity_error'][-1]:.6g}")
    elif args.task == "blowup":
        fit = velocity_blowup_rate(domain, data, args.alpha)
        out["fit"] = {"exponent": fit.exponent, "expected": fit.expected, "multi_mode": fit.multi_mode}
        print(f"fitted exponent: {fit.exponent:.4f} (expected {fit.expected:.4f})")
    _maybe_write(out, args.out)
    return 0


def _cmd_hidden(args) -> int:
    domain = build_interval(args.length, args.modes)
    grid = TimeGrid(args.t_end, args.steps)
    from .presets import random_decay

    draws = [random_decay(args.modes, args.decay_p, args.seed + i) for i in range(args.draws)]
    study = hidden_inequality_ratio(domain, draws, args.alpha, grid)
    out = {
        "alpha": args.alpha, "draws": args.draws, "seed": args.seed,
        "modes": args.modes, "steps": args.steps, "t_end": args.t_end,
        "decay_p": args.decay_p, "max_ratio": study.max_ratio,
        "skipped": study.skipped, "table": study.table,
    }
    print(f"max trace-energy ratio over {args.draws} draws: {study.max_ratio:.6g}")
    if args.trace_out:
        data = build_preset("single-mode", domain)
        trace = normal_trace(domain, data, args.alpha, grid)
        trace_to_csv(trace, args.trace_out)
        print(f"wrote {args.trace_out}")
    _maybe_write(out, args.out)
    return 0


def _cmd_verify(args) -> int:
    results = run_all(args.seed)
    for line in report_lines(results):
        print(line)
    report = {"seed": args.seed, "criteria": [r.as_dict() for r in results]}
    _maybe_write(report, args.out)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS  # absent flags fall through to config, then defaults
    p = argparse.ArgumentParser(prog="fracwave", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", default=None, help="JSON file preloading flag values (flags win)")
    sub = p.add_subparsers(dest="command", required=True)

    ml_p = sub.add_parser("ml", help="evaluate the Mittag-Leffler function")
    ml_p.add_argument("--alpha", type=float, default=sup)
    ml_p.add_argument("--beta", type=float, default=sup)
    ml_p.add_argument("--z", default=sup, help="comma-separated arguments (use --z=-1,-2)")
    ml_p.add_argument("--z-range", default=sup, help="lo:hi:count")
    ml_p.add_argument("--decay-check", action="store_true", default=sup)
    ml_p.add_argument("--out", default=sup)

    fr = sub.add_parser("frac", help="fractional-integral checks")
    fr.add_argument("--check", choices=("young", "semigroup", "equivalence"), default=sup)
    fr.add_argument("--beta", type=float, default=sup)
    fr.add_argument("--gamma", type=float, default=sup)
    fr.add_argument("--t-end", type=float, default=sup)
    fr.add_argument("--steps", type=int, default=sup)
    fr.add_argument("--seed", type=int, default=sup)
    fr.add_argument("--draws", type=int, default=sup)
    fr.add_argument("--out", default=sup)

    so = sub.add_parser("solve", help="series solution snapshots")
    so.add_argument("--alpha", type=float, default=sup)
    so.add_argument("--domain", default=sup, help="interval:L or rectangle:L1,L2")
    so.add_argument("--modes", type=int, default=sup)
    so.add_argument("--preset", choices=PRESET_NAMES, default=sup)
    so.add_argument("--mode-k", type=int, default=sup)
    so.add_argument("--decay-p", type=float, default=sup)
    so.add_argument("--seed", type=int, default=sup)
    so.add_argument("--t-end", type=float, default=sup)
    so.add_argument("--steps", type=int, default=sup)
    so.add_argument("--points", type=int, default=sup)
    so.add_argument("--which", choices=("value", "velocity", "caputo"), default=sup)
    so.add_argument("--theta", type=float, default=sup)
    so.add_argument("--out-prefix", default=sup)

    re = sub.add_parser("regularity", help="regularity estimate checks")
    re.add_argument("--task", choices=("initial", "uniform", "l2norms", "smooth", "blowup"),
                    default=sup)
    re.add_argument("--alpha", type=float, default=sup)
    re.add_argument("--theta", type=float, default=sup)
    re.add_argument("--theta-grad", type=float, default=sup)
    re.add_argument("--theta-cap", type=float, default=sup)
    re.add_argument("--epsilon", type=float, default=sup)
    re.add_argument("--length", type=float, default=sup)
    re.add_argument("--modes", type=int, default=sup)
    re.add_argument("--preset", choices=PRESET_NAMES, default=sup)
    re.add_argument("--mode-k", type=int, default=sup)
    re.add_argument("--decay-p", type=float, default=sup)
    re.add_argument("--delta", type=float, default=sup)
    re.add_argument("--seed", type=int, default=sup)
    re.add_argument("--t-end", type=float, default=sup)
    re.add_argument("--out", default=sup)

    hi = sub.add_parser("hidden", help="boundary trace-energy study")
    hi.add_argument("--alpha", type=float, default=sup)
    hi.add_argument("--draws", type=int, default=sup)
    hi.add_argument("--seed", type=int, default=sup)
    hi.add_argument("--modes", type=int, default=sup)
    hi.add_argument("--length", type=float, default=sup)
    hi.add_argument("--t-end", type=float, default=sup)
    hi.add_argument("--steps", type=int, default=sup)
    hi.add_argument("--decay-p", type=float, default=sup)
    hi.add_argument("--trace-out", default=sup)
    hi.add_argument("--out", default=sup)

    ve = sub.add_parser("verify", help="run the acceptance criteria")
    ve.add_argument("scope", nargs="?", default=sup, choices=("all",))
    ve.add_argument("--seed", type=int, default=sup)
    ve.add_argument("--out", default=sup)

    return p


_DISPATCH = {
    "ml": _cmd_ml,
    "frac": _cmd_frac,
    "solve": _cmd_solve,
    "regularity": _cmd_regularity,
    "hidden": _cmd_hidden,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
    args = _resolve(args, config)
    try:
        return _DISPATCH[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
