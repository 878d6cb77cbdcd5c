"""Command-line front end.

Subcommands::

    laglens simulate        integrate a DDE, write trajectory CSV + metadata
    laglens spectrum        exact and asymptotic characteristic roots
    laglens envelope        peak envelope check on a stored trajectory
    laglens spatiotemporal  reshape a trajectory into rows of one period
    laglens compare         compare one row with the diffusion Green function

Output goes to ``--out-dir``, else ``$LAGLENS_OUT``, else the working
directory. Exit codes: 0 ok, 2 usage, 3 numerical failure, 4 analysis
precondition not met.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dde import (CubicCounterexample, DdeProblem, LinearDecayFeedback, SolverConfig,
                  integrate, parse_history, read_trajectory_csv, write_trajectory_csv)
from .errors import InvalidInput, LaglensError, NoPeaks
from .mapper import (compare_profiles, envelope_least_squares, envelope_prediction,
                     extract_peaks, recurrence_index, reshape, square_wave_stats, write_peaks_csv,
                     write_profile_csv, write_spatiotemporal_csv)
from .plotting import write_dat, write_svg
from .spectrum import SpectrumRequest, spacing, spectrum, write_spectrum_csv


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get("LAGLENS_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path


def _f(x):
    """JSON-safe float with full precision."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _load(args):
    """Trajectory plus whatever metadata sits next to it."""
    csv_path = Path(args.trajectory)
    meta_path = csv_path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    prob = meta.get("problem", {})
    for key in ("r", "T"):
        if getattr(args, key, None) is None and key in prob:
            setattr(args, key, float(prob[key]))
    if getattr(args, "r", None) is None and prob.get("model") == "cubic":
        args.r = 1.0
    problem = None
    if prob.get("model") and prob.get("history") and args.T is not None:
        model = (LinearDecayFeedback(float(prob["r"])) if prob["model"] == "linear"
                 else CubicCounterexample())
        history = parse_history(prob["history"])
        problem = DdeProblem(model, float(prob["T"]), history, float(prob["t_end"]))
        # a Gaussian pulse centred at -t0 fixes the source time
        if getattr(args, "t0", "absent") is None and hasattr(history, "center"):
            args.t0 = -history.center
    traj = read_trajectory_csv(csv_path, problem)
    return traj, meta


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise InvalidInput("missing " + ", ".join("--" + n.replace("_", "-") for n in missing)
                           + " (not found in trajectory metadata either)")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    history = parse_history(args.history)
    if args.model == "linear":
        _require(args, "r")
        model = LinearDecayFeedback(args.r)
    else:
        model = CubicCounterexample()
    problem = DdeProblem(model, args.T, history, args.t_end)
    config = SolverConfig(args.steps_per_delay, transient_guard=args.guard)
    traj = integrate(problem, config)

    out = _out_dir(args)
    stem = args.name
    write_trajectory_csv(traj, out / f"{stem}.csv")
    write_dat(out / f"{stem}.dat", ["t", "y"], traj.t, traj.y)
    try:
        n_peaks = len(extract_peaks(traj, args.guard, 1e-6 * float(np.max(np.abs(traj.y)))))
    except NoPeaks:
        n_peaks = 0
    summary = {
        "samples": len(traj),
        "h": _f(traj.h),
        "y_min": _f(traj.y.min()),
        "y_max": _f(traj.y.max()),
        "peaks": n_peaks,
    }
    if args.model == "cubic":
        try:
            sq = square_wave_stats(traj, min(30 * args.T, 0.5 * traj.t_last))
            summary.update({k: _f(v) for k, v in sq.report().items()})
        except NoPeaks:
            pass
    _write_json(out / f"{stem}.json", {
        "command": "simulate",
        "problem": problem.summary(),
        "solver": {"method": "rk4", "steps_per_delay": config.steps_per_delay,
                   "interpolation": config.interpolation,
                   "transient_guard": config.transient_guard},
        "summary": summary,
        "version": __version__,
    })
    if args.svg:
        write_svg(out / f"{stem}.svg", [(traj.t, traj.y, "y(t)")],
                  title=f"{model.name} model, T={args.T:g}", xlabel="t", ylabel="y")
    print(" ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


def cmd_spectrum(args) -> int:
    req = SpectrumRequest(args.r, args.T, args.n_max)
    roots = spectrum(req)
    out = _out_dir(args)
    write_spectrum_csv(roots, out / "spectrum.csv")
    lam = np.array([rt.lambda_exact for rt in roots])
    asym = np.array([rt.lambda_asym for rt in roots])
    write_dat(out / "spectrum.dat", ["n", "re_exact", "im_exact", "re_asym", "im_asym"],
              [rt.n for rt in roots], lam.real, lam.imag, asym.real, asym.imag)
    gaps = spacing(roots)
    summary = {
        "r": args.r, "T": args.T, "n_max": args.n_max,
        "roots": len(roots),
        "max_residual": _f(max(rt.residual for rt in roots)),
        "max_asym_error": _f(max(rt.asym_error for rt in roots)),
        "spacing_estimate": _f(np.mean(gaps)) if gaps else None,
        "spacing_reference": _f(2 * math.pi / (args.T + 1)),
        "outside_window": sum(rt.outside_asymptotic_window for rt in roots),
    }
    _write_json(out / "spectrum.json", summary)
    if args.svg:
        write_svg(out / "spectrum.svg", [(lam.imag, lam.real, "exact"), (asym.imag, asym.real, "asymptotic")],
                  title=f"spectrum r={args.r:g} T={args.T:g}", xlabel="Im lambda",
                  ylabel="Re lambda", markers=True)
    print(" ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


def cmd_envelope(args) -> int:
    traj, meta = _load(args)
    _require(args, "r", "T", "t0")
    threshold = args.threshold
    peaks = extract_peaks(traj, args.guard, threshold)
    env = envelope_prediction(args.r, args.T, args.t0, (peaks.t[0], peaks.y[0]))
    lsq = envelope_least_squares(args.r, args.T, args.t0, peaks)
    out = _out_dir(args)
    write_peaks_csv(peaks, env, out / "peaks.csv")
    pred = env(peaks.t)
    rel = (peaks.y - pred) / pred
    window = slice(0, args.recurrences + 1)
    verdict = {
        "r": args.r, "T": args.T, "t0": args.t0, "guard": args.guard,
        "n_peaks": len(peaks),
        "anchor": [_f(peaks.t[0]), _f(peaks.y[0])],
        "constant_anchor": _f(env.constant),
        "constant_lsq": _f(lsq.constant),
        "recurrences": args.recurrences,
        "worst_rel_err": _f(np.max(np.abs(rel[window]))),
        "worst_rel_err_all": _f(np.max(np.abs(rel))),
        "worst_rel_err_lsq": _f(np.max(np.abs((peaks.y - lsq(peaks.t)) / lsq(peaks.t))[window])),
        "mean_spacing": _f(np.mean(peaks.spacing)) if len(peaks) > 1 else None,
    }
    if args.r > 1.0:
        idx = recurrence_index(peaks.t, args.t0, args.T + 1.0)
        i_obs = int(np.argmin(peaks.y))
        i_env = int(np.argmin(pred))
        verdict.update({
            "envelope_t_min": _f(env.t_min()),
            "min_recurrence_observed": int(idx[i_obs]),
            "min_recurrence_envelope": int(idx[i_env]),
            "non_monotone": bool(0 < i_obs < len(peaks) - 1),
        })
    if args.max_rel_err is not None:
        verdict["pass"] = bool(verdict["worst_rel_err"] <= args.max_rel_err)
    _write_json(out / "envelope.json", verdict)
    if args.svg:
        tt = np.linspace(peaks.t[0], peaks.t[-1], 400)
        write_svg(out / "envelope.svg", [(traj.t, traj.y, "y(t)"), (tt, env(tt), "envelope")],
                  title="peak envelope", xlabel="t", ylabel="y")
    print(" ".join(f"{k}={v}" for k, v in verdict.items() if not isinstance(v, list)))
    return 0


def cmd_spatiotemporal(args) -> int:
    traj, meta = _load(args)
    if args.period is None:
        _require(args, "T")
        args.period = args.T + 1.0
    if not (args.period > 0 and math.isfinite(args.period)):
        raise InvalidInput(f"--period must be positive, got {args.period}")
    r = args.r if args.r is not None else 1.0
    T = args.T if args.T is not None else args.period - 1.0
    grid = reshape(traj, args.period)
    out = _out_dir(args)
    write_spatiotemporal_csv(grid, r, T, out / "spatiotemporal.csv")
    # gnuplot 'with image'/pm3d friendly: blank line between rows
    with (out / "spatiotemporal.dat").open("w") as fh:
        fh.write("# row col y\n")
        for i, row in enumerate(grid.rows):
            for col, y in row:
                fh.write(f"{grid.first_row + i} {col:.17g} {y:.17g}\n")
            fh.write("\n")
    print(f"rows={len(grid)} period={args.period} samples={sum(len(r_) for r_ in grid.rows)}")
    return 0


def cmd_compare(args) -> int:
    traj, meta = _load(args)
    _require(args, "r", "T", "t0")
    cmp = compare_profiles(traj, args.r, args.T, args.t0, args.row, period=args.period)
    out = _out_dir(args)
    report = {k: (_f(v) if isinstance(v, float) else v) for k, v in cmp.report().items()}
    _write_json(out / "compare.json", report)
    write_profile_csv(cmp, out / "profile.csv")
    if args.svg:
        write_svg(out / "profile.svg", [(cmp.col, cmp.y_scaled, "DDE row"),
                                        (cmp.col, cmp.y_predicted, "heat kernel")],
                  title=f"row {args.row}", xlabel="col", ylabel="Y")
    print(" ".join(f"{k}={v}" for k, v in report.items()))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laglens", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="output directory (default $LAGLENS_OUT or .)")
    common.add_argument("--svg", action="store_true", help="also write an SVG chart")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="integrate the DDE")
    s.add_argument("--model", choices=("linear", "cubic"), required=True)
    s.add_argument("--r", type=float, default=None, help="feedback gain (linear model)")
    s.add_argument("--T", type=_positive(float), required=True)
    s.add_argument("--history", required=True,
                   help="gaussian:<amp>,<center>,<width> | sine-mix | constant:<c>")
    s.add_argument("--t-end", type=_positive(float), required=True)
    s.add_argument("--steps-per-delay", type=int, default=512)
    s.add_argument("--guard", type=float, default=0.0)
    s.add_argument("--name", default="trajectory", help="output file stem")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", parents=[common], help="characteristic roots")
    s.add_argument("--r", type=_positive(float), required=True)
    s.add_argument("--T", type=_positive(float), required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.set_defaults(func=cmd_spectrum)

    for name, func, help_ in (("envelope", cmd_envelope, "peak envelope check"),
                              ("spatiotemporal", cmd_spatiotemporal, "pseudo space-time reshaping"),
                              ("compare", cmd_compare, "row vs heat kernel")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--trajectory", required=True, help="trajectory CSV from simulate")
        s.add_argument("--r", type=_positive(float), default=None)
        s.add_argument("--T", type=_positive(float), default=None)
        s.set_defaults(func=func)
        if name == "envelope":
            s.add_argument("--t0", type=float, default=None)
            s.add_argument("--guard", type=float, default=0.0)
            s.add_argument("--threshold", type=float, default=1e-6)
            s.add_argument("--recurrences", type=int, default=10)
            s.add_argument("--max-rel-err", type=float, default=None)
        elif name == "spatiotemporal":
            s.add_argument("--period", type=float, default=None, help="default T+1")
        else:
            s.add_argument("--t0", type=float, default=None)
            s.add_argument("--row", type=int, required=True)
            s.add_argument("--period", type=_positive(float), default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LaglensError as exc:
        print(f"laglens {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"laglens {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
