"""Command-line interface.

Every data-producing command writes CSV (stdout by default, a file with
--csv) whose first line is a comment carrying a sha256 manifest of the
inputs: command, package version, backend, full model description, and
parameters. Reruns with identical inputs produce byte-identical output.
Summaries and progress notes go to stderr.

Exit codes: 0 success, 1 a check or verification failed, 2 bad usage or
an ineligible computation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._core import BACKEND
from . import configs
from .errors import BudgetError, ConfigError, ConvergenceError, EligibilityError
from .kernel import partition_constrained, partition_free, partition_sandwich
from .model import RenewalModel, load_model, model_to_dict, validate
from .montecarlo import resolve_workers

_MINUS = "−"


def _parse_float(text: str) -> float:
    return float(text.replace(_MINUS, "-").strip())


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(_parse_float(part) for part in text.split(","))

def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in text.split(","))


def _parse_grid(text: str) -> np.ndarray:
    parts = text.replace(_MINUS, "-").split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or hi < lo:
        raise ConfigError(f"bad grid {text!r}")
    return np.linspace(lo, hi, n)


def _parse_box(text: str) -> tuple[tuple[float, float], ...]:
    pairs = []
    for part in text.split(","):
        bits = part.replace(_MINUS, "-").split(":")
        if len(bits) != 2:
            raise ConfigError(f"box must be lo:hi[,lo:hi], got {text!r}")
        pairs.append((float(bits[0]), float(bits[1])))
    return tuple(pairs)


def _resolve_model(arg: str) -> RenewalModel:
    path = Path(arg)
    if path.exists():
        return load_model(path)
    try:
        return configs.load(arg)
    except ConfigError:
        raise ConfigError(
            f"config {arg!r} is neither a file nor a bundled name; "
            f"bundled: {', '.join(configs.names())}"
        ) from None


def _manifest(command: str, model: RenewalModel | None, params: dict) -> str:
    payload = {
        "backend": BACKEND,
        "command": command,
        "model": model_to_dict(model) if model is not None else None,
        "params": params,
        "version": __version__,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(args, manifest: str, header, rows) -> None:
    lines = [f"# manifest={manifest}", ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if getattr(args, "csv", None):
        Path(args.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# command handlers


def _cmd_validate(args) -> int:
    model = _resolve_model(args.config)
    report = validate(model)
    man = _manifest("validate", model, {})
    rows = [
        [f.name, "ok" if f.ok else "FAIL", f.detail.replace(",", ";")]
        for f in report.findings
    ]
    _emit(args, man, ["finding", "status", "detail"], rows)
    _note(f"validate: {'ok' if report.ok else 'FAILED'} ({len(report.findings)} findings)")
    return 0 if report.ok else 1


def _cmd_partition(args) -> int:
    model = _resolve_model(args.config)
    T = args.T
    want_c = args.which in ("constrained", "both")
    want_f = args.which in ("free", "both")
    man = _manifest("partition", model, {"T": T, "which": args.which})
    ln_zc = partition_constrained(model, T) if (want_c or want_f) else None
    ln_z = partition_free(model, T) if want_f else None
    rows = []
    for t in range(T + 1):
        zc = ln_zc[t] if want_c else None
        zf = ln_z[t] if want_f else None
        rows.append(
            [
                t,
                zc if want_c else None,
                zf,
                (zc / t) if (want_c and t > 0) else None,
                (zf / t) if (want_f and t > 0) else None,
            ]
        )
    _emit(args, man, ["t", "ln_Zc", "ln_Z", "ln_Zc_over_t", "ln_Z_over_t"], rows)
    return 0


def _cmd_zfun(args) -> int:
    from .tilt import z_graph

    model = _resolve_model(args.config)
    if (args.phi is None) == (args.grid is None):
        raise ConfigError("zfun needs exactly one of --phi or --grid")
    if args.phi is not None:
        phis = [np.asarray(_parse_floats(args.phi))]
        params = {"phi": [float(x) for x in phis[0]]}
        if phis[0].shape != (model.dim,):
            raise ConfigError(f"--phi needs {model.dim} coordinates")
    else:
        grid = _parse_grid(args.grid)
        coord = args.coord
        if not (0 <= coord < model.dim):
            raise ConfigError(f"--coord must be in [0, {model.dim})")
        phis = []
        for x in grid:
            v = np.zeros(model.dim)
            v[coord] = x
            phis.append(v)
        params = {"coord": coord, "grid": args.grid}
    graph = z_graph(model, phis, workers=resolve_workers(args.threads))
    man = _manifest("zfun", model, params)
    header = [f"phi_{j}" for j in range(model.dim)] + ["z", "status", "iterations"]
    rows = [
        list(phi) + [res.value, res.status, res.iterations]
        for phi, res in graph.rows
    ]
    _emit(args, man, header, rows)
    if not graph.convexity.ok:
        _note(f"zfun: convexity check FAILED, max violation {graph.convexity.max_violation}")
        return 1
    _note(f"zfun: {len(rows)} points, convexity ok")
    return 0


def _cmd_rate(args) -> int:
    from .rate import RateKind, rate, rate_curve

    model = _resolve_model(args.config)
    kind = RateKind(args.kind)
    if (args.w is None) == (args.grid is None):
        raise ConfigError("rate needs exactly one of --w or --grid")
    if args.w is not None:
        points = [np.asarray(_parse_floats(args.w))]
        if points[0].shape != (model.dim,):
            raise ConfigError(f"--w needs {model.dim} coordinates")
        params = {"kind": args.kind, "w": [float(x) for x in points[0]]}
    else:
        if model.dim != 1:
            raise ConfigError("--grid applies to one-dimensional models only")
        points = [np.array([x]) for x in _parse_grid(args.grid)]
        params = {"grid": args.grid, "kind": args.kind}
    values = rate_curve(model, kind, points, workers=resolve_workers(args.threads))
    man = _manifest("rate", model, params)
    header = [f"w_{j}" for j in range(model.dim)] + ["value", "status"] + [
        f"arg_phi_{j}" for j in range(model.dim)
    ]
    rows = []
    for w, rv in zip(points, values):
        arg = list(rv.arg_phi) if rv.arg_phi is not None else [None] * model.dim
        rows.append([float(x) for x in w] + [rv.value, rv.status] + arg)
    _emit(args, man, header, rows)
    return 0


def _cmd_dist(args) -> int:
    from .lattice import exact_constrained, exact_free, prob_box

    model = _resolve_model(args.config)
    box = _parse_box(args.box)
    runner = exact_constrained if args.law == "constrained" else exact_free
    measure = runner(model, args.t, times=[args.t])[args.t]
    lp = prob_box(measure, box, scaled=args.scaled)
    man = _manifest(
        "dist",
        model,
        {"box": [list(p) for p in box], "law": args.law, "scaled": args.scaled, "t": args.t},
    )
    _emit(
        args,
        man,
        ["t", "law", "scaled", "log_prob", "prob", "log_normalizer"],
        [[args.t, args.law, args.scaled, lp, math.exp(lp), measure.log_normalizer]],
    )
    return 0


def _cmd_empirical_rate(args) -> int:
    from .lattice import empirical_rate

    model = _resolve_model(args.config)
    box = _parse_box(args.box)
    ts = _parse_ints(args.tlist)
    points = empirical_rate(model, box, ts, law=args.law)
    man = _manifest(
        "empirical-rate",
        model,
        {"box": [list(p) for p in box], "law": args.law, "tlist": list(ts)},
    )
    _emit(
        args,
        man,
        ["t", "log_prob", "rate"],
        [[p.t, p.log_prob, p.rate] for p in points],
    )
    return 0


def _cmd_mc(args) -> int:
    from .montecarlo import estimate_prob

    model = _resolve_model(args.config)
    box = _parse_box(args.box)
    est = estimate_prob(
        model,
        args.t,
        box,
        law=args.law,
        n=args.n,
        seed=args.seed,
        workers=resolve_workers(args.threads),
    )
    man = _manifest(
        "mc",
        model,
        {
            "box": [list(p) for p in box],
            "law": args.law,
            "n": args.n,
            "seed": args.seed,
            "t": args.t,
        },
    )
    _emit(
        args,
        man,
        [
            "estimate",
            "std_error",
            "log_numerator_mean",
            "log_normalizer_mean",
            "ess",
            "n_samples",
            "seed",
            "flags",
        ],
        [
            [
                est.estimate,
                est.std_error,
                est.log_numerator_mean,
                est.log_normalizer_mean,
                est.ess,
                est.n_samples,
                est.seed,
                ";".join(est.flags),
            ]
        ],
    )
    if est.flags:
        _note(f"mc: flags {', '.join(est.flags)}")
    return 0


def _cmd_sandwich(args) -> int:
    model = _resolve_model(args.config)
    rep = partition_sandwich(model, args.t)
    man = _manifest("sandwich", model, {"t": args.t})
    _emit(
        args,
        man,
        ["t", "average", "lower", "upper", "margin", "ok"],
        [[rep.T, rep.average, rep.lower, rep.upper, rep.margin, rep.ok]],
    )
    return 0 if rep.ok else 1


def _cmd_check(args) -> int:
    from .lattice import supermult_check

    model = _resolve_model(args.config)
    box = _parse_box(args.box)
    rep = supermult_check(model, box, t_max=args.max)
    man = _manifest(
        "check-supermult",
        model,
        {"box": [list(p) for p in box], "t_max": args.max},
    )
    rows = [[v.tau, v.t, v.defect] for v in rep.violations]
    _emit(args, man, ["tau", "t", "defect"], rows)
    _note(
        f"supermult: {rep.n_checked} pairs to t_max={rep.t_max}, "
        f"{len(rep.violations)} violations, min margin {rep.min_margin:.3e}"
    )
    return 0 if rep.ok else 1


def _cmd_counterexample(args) -> int:
    if args.which == "open-convex":
        from .lattice import open_convex_counterexample

        ts = _parse_ints(args.tlist)
        rep = open_convex_counterexample(ts)
        man = _manifest("counterexample-open-convex", None, {"tlist": list(ts)})
        _emit(
            args,
            man,
            ["t", "log_prob", "rate"],
            [[p.t, p.log_prob, p.rate] for p in rep.points],
        )
        for w, status in rep.probes:
            _note(f"rate at w={w}: {status}")
        _note(f"cross-check max err {rep.cross_check_max_err:.3e}")
        return 0 if rep.ok else 1

    from .montecarlo import cauchy_counterexample

    ts = _parse_ints(args.tlist)
    if args.mc_at is not None and args.seed is None:
        raise ConfigError("--mc-at needs --seed")
    rep = cauchy_counterexample(
        ts,
        mc_at=args.mc_at,
        n=args.n,
        seed=args.seed,
        workers=resolve_workers(args.threads),
    )
    man = _manifest(
        "counterexample-closed-convex",
        None,
        {"mc_at": args.mc_at, "n": args.n, "seed": args.seed, "tlist": list(ts)},
    )
    _emit(
        args,
        man,
        ["t", "log_bound", "bound_rate"],
        [[p.t, p.log_bound, p.bound_rate] for p in rep.points],
    )
    for w, status in rep.probes:
        _note(f"rate at w={w}: {status}")
    if rep.mc is not None:
        _note(
            f"mc at t={rep.mc_t}: estimate {rep.mc.estimate:.6g} "
            f"(se {rep.mc.std_error:.2g}), bound {math.exp(rep.mc_log_bound):.6g}"
        )
    return 0 if rep.ok else 1


def _cmd_accept(args) -> int:
    from .accept import run_all

    numbers = _parse_ints(args.criteria) if args.criteria else None
    results = run_all(numbers=numbers, workers=resolve_workers(args.threads))
    return 0 if all(res.ok for res in results) else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renewal-ldp",
        description="Large-deviation toolkit for discrete-time renewal-reward models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        p.add_argument("--csv", default=None, help="write CSV here instead of stdout")
        p.add_argument(
            "--threads", type=int, default=None, help="worker threads (default: RENEWAL_LDP_THREADS or 1)"
        )
        return p

    p = add("validate", _cmd_validate, help="run model validation findings")
    p.add_argument("--config", required=True, help="bundled config name or JSON path")

    p = add("partition", _cmd_partition, help="partition functions over a horizon")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--which", choices=["constrained", "free", "both"], default="both")

    p = add("zfun", _cmd_zfun, help="tilted log growth rate z")
    p.add_argument("--config", required=True)
    p.add_argument("--phi", default=None, help="comma-separated tilt vector")
    p.add_argument("--grid", default=None, help="lo:hi:n grid on one coordinate")
    p.add_argument("--coord", type=int, default=0, help="grid coordinate (default 0)")

    p = add("rate", _cmd_rate, help="rate function values")
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=["constrained", "free-lower", "free-upper"], required=True)
    p.add_argument("--w", default=None, help="comma-separated reward-per-time point")
    p.add_argument("--grid", default=None, help="lo:hi:n grid (one-dimensional models)")

    p = add("dist", _cmd_dist, help="exact lattice distribution probabilities")
    p.add_argument("--config", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--law", choices=["constrained", "free"], default="constrained")
    p.add_argument("--box", required=True, help="lo:hi[,lo:hi] closed box")
    p.add_argument("--scaled", action="store_true", help="box in W/t units")

    p = add("empirical-rate", _cmd_empirical_rate, help="finite-t decay rates from the lattice")
    p.add_argument("--config", required=True)
    p.add_argument("--box", required=True, help="scaled closed box lo:hi[,lo:hi]")
    p.add_argument("--tlist", required=True, help="comma-separated horizons")
    p.add_argument("--law", choices=["constrained", "free"], default="constrained")

    p = add("mc", _cmd_mc, help="Monte Carlo probability estimate")
    p.add_argument("--config", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--box", required=True, help="scaled closed box lo:hi[,lo:hi]")
    p.add_argument("--law", choices=["constrained", "free"], default="constrained")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)

    p = add("sandwich", _cmd_sandwich, help="free-energy sandwich check at one horizon")
    p.add_argument("--config", required=True)
    p.add_argument("--t", type=int, required=True)

    p = add("check", _cmd_check, help="structural checks")
    p.add_argument("what", choices=["supermult"])
    p.add_argument("--config", required=True)
    p.add_argument("--box", required=True, help="scaled closed box lo:hi[,lo:hi]")
    p.add_argument("--max", type=int, default=100, help="largest tau+t checked")

    p = add("counterexample", _cmd_counterexample, help="run a bundled counterexample")
    p.add_argument("which", choices=["open-convex", "closed-convex"])
    p.add_argument("--tlist", required=True)
    p.add_argument("--mc-at", type=int, default=None, dest="mc_at")
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=None)

    p = add("accept", _cmd_accept, help="run the acceptance suite")
    p.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,3,7")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, EligibilityError, BudgetError, ConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
