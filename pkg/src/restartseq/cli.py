"""Command-line front end.

Every subcommand prints one JSON report on stdout.  Keys keep a fixed order
and floats are rounded to 12 significant digits so reports can be compared
byte for byte.  Optional ``--seq-out`` files hold two whitespace-separated
columns (``n`` and the sequence value) for external plotting tools.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dist import DEFAULT_TOL, Pmf, from_spec
from .errors import (
    DistributionError,
    InconsistentTailError,
    InfiniteMeanError,
    NotADistributionError,
    NotApplicableError,
    PreemptiveRestartError,
    RestartCapExceeded,
)
from .fpur import (
    DEFAULT_MAX_ITERATIONS,
    Distributional,
    NoRestart,
    Sharp,
    benefit_gap_identity,
    mean_hitting_time,
    optimize_sharp,
    simulate,
)
from .perturb import (
    ALWAYS_BENEFICIAL,
    GapSpec,
    insert_gap,
    pre_gap_benefit_threshold,
    post_gap_threshold,
    predicted_gap_sequence,
    within_gap_bounds,
)
from .reconstruct import reconstruct_cmf
from .restart_seq import auto_horizon, beneficial, first_negative, fsa, log_shape, restart_sequence, tail_class

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFINITE_MEAN = 3
EXIT_PREEMPTIVE = 4
EXIT_NOT_A_DISTRIBUTION = 5
EXIT_INCONSISTENT_TAIL = 6
EXIT_RESTART_CAP = 7

_EXIT_CODES = """\
exit codes:
  0  success
  2  unparsable arguments, distribution spec or sequence file
  3  an operation needs a finite mean and E[U] is infinite
  4  the restart policy is preemptive (restarts before completion a.s.)
  5  the sequence is not realized by any distribution with that mean
  6  the reconstructed mean disagrees with the requested one
  7  a simulated run exceeded the restart cap
"""

FLOAT_DIGITS = 12
DEFAULT_PREVIEW = 10


class ParseError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        r = float(f"{x:.{FLOAT_DIGITS}g}")
        return 0.0 if r == 0.0 else r
    if hasattr(x, "value"):  # enums
        return x.value
    return x


def render(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, ensure_ascii=True) + "\n"


def write_columns(path: str, values) -> None:
    lines = [f"{n} {float(v):.17g}" for n, v in enumerate(np.asarray(values).tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# input parsing


def _load_json(text_or_path: str, what: str):
    src = text_or_path.strip()
    if not src.startswith(("{", "[")):
        try:
            src = Path(text_or_path).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {what} {text_or_path!r}: {exc}") from exc
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} is not valid JSON: {exc}") from exc


def load_distribution(arg: str) -> tuple[dict, Pmf]:
    spec = _load_json(arg, "distribution spec")
    try:
        return spec, from_spec(spec)
    except (DistributionError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad distribution spec: {exc}") from exc


def parse_policy(arg: str):
    kind, _, rest = arg.partition(":")
    if kind == "none" and not rest:
        return NoRestart()
    try:
        if kind == "sharp":
            return Sharp(int(rest))
        if kind == "dist":
            spec = _load_json(rest, "restart distribution")
            if not isinstance(spec, dict):
                raise ParseError("restart distribution must be a JSON object")
            spec = dict(spec)
            p_never = float(spec.pop("p_never", 0.0))
            return Distributional(from_spec(spec), p_never)
    except ParseError:
        raise
    except (DistributionError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad policy {arg!r}: {exc}") from exc
    raise ParseError(f"policy must be sharp:N, dist:SPEC or none, got {arg!r}")


def load_sequence(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read sequence file {path!r}: {exc}") from exc
    try:
        if text.lstrip().startswith("["):
            values = json.loads(text)
        else:
            # one value per line; with two columns the second one is taken
            values = [float(line.split()[-1]) for line in text.splitlines() if line.strip() and not line.startswith("#")]
        arr = np.asarray(values, dtype=float)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ParseError(f"sequence file {path!r}: {exc}") from exc
    if arr.ndim != 1 or len(arr) == 0 or not np.all(np.isfinite(arr)):
        raise ParseError("sequence must be a non-empty list of finite reals")
    return arr


def _gap_arg(arg: str) -> GapSpec:
    try:
        m, g = (int(x) for x in arg.split(","))
        return GapSpec(m, g)
    except ValueError as exc:
        raise ParseError(f"--gap expects m,g with integers m >= 0, g >= 1; got {arg!r}") from exc


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _non_negative_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


# ---------------------------------------------------------------------------
# subcommands


def _diagnostics(args, seq=None) -> dict:
    out = {"tol": args.tol}
    if seq is not None:
        out.update(horizon=seq.horizon, tail_mass=seq.tail_mass, eps_sign=seq.eps_sign)
    return out


def cmd_analyze(args) -> dict:
    spec, d = load_distribution(args.spec)
    mean_u = d.mean()
    verdict = beneficial(d, args.tol, args.horizon)
    report = {"input": spec, "mean_u": mean_u, "verdict": verdict.to_dict()}
    if math.isinf(mean_u):
        report.update(fsa=None, log_shape=_shape_or_none(d, args.tol), tail_class=None,
                      sequence_preview=None, first_negative=None)
        if args.optimize:
            report["optimal"] = None
        report["diagnostics"] = _diagnostics(args)
        return report
    seq = restart_sequence(d, args.tol, args.horizon)
    m, tc = tail_class(d, args.tol)
    report.update(
        fsa=fsa(d).to_dict(),
        log_shape=log_shape(d, args.tol),
        tail_class={"m": m, "class": tc},
        sequence_preview=seq.values[: args.preview],
        first_negative=first_negative(seq),
    )
    if args.optimize:
        n_star, e_star = optimize_sharp(d, tol=args.tol)
        report["optimal"] = {"n_star": n_star, "e_t_star": e_star}
    report["diagnostics"] = _diagnostics(args, seq)
    if args.seq_out:
        write_columns(args.seq_out, seq.values)
    return report


def _shape_or_none(d: Pmf, tol: float):
    try:
        return log_shape(d, tol)
    except (InfiniteMeanError, NotApplicableError):
        return None


def cmd_et(args) -> dict:
    spec, d = load_distribution(args.spec)
    pol = parse_policy(args.policy)
    res = mean_hitting_time(d, pol, args.tol)
    report = {"input": spec, "policy": pol.to_spec(), "mean_u": d.mean(), **res.to_dict()}
    if isinstance(pol, Sharp) and not math.isinf(d.mean()):
        report["benefit_gap_identity"] = benefit_gap_identity(d, pol.n, args.tol)
    report["diagnostics"] = _diagnostics(args)
    return report


def cmd_optimize(args) -> dict:
    spec, d = load_distribution(args.spec)
    n_star, e_star = optimize_sharp(d, args.n_max, args.tol)
    report = {"input": spec, "mean_u": d.mean(), "n_star": n_star, "e_t_star": e_star}
    if n_star is None:
        report["message"] = "no beneficial sharp restart"
    report["diagnostics"] = {"tol": args.tol, "n_max": args.n_max if args.n_max else auto_horizon(d, args.tol) + 1}
    return report


def _threshold_entry(fn, *a):
    try:
        v = fn(*a)
    except NotApplicableError as exc:
        return {"inapplicable": str(exc)}
    return {"threshold": v.value if v is ALWAYS_BENEFICIAL else v}


def cmd_perturb(args) -> dict:
    spec, d = load_distribution(args.spec)
    if args.delay is not None:
        gap = GapSpec(0, args.delay)
    elif args.gap is not None:
        gap = _gap_arg(args.gap)
    else:
        raise ParseError("perturb needs --gap m,g or --delay g")
    n_max = args.horizon if args.horizon is not None else auto_horizon(d, args.tol) + gap.g
    gapped = insert_gap(d, gap)
    original = restart_sequence(d, args.tol, n_max)
    direct = restart_sequence(gapped, args.tol, n_max)
    predicted = predicted_gap_sequence(d, gap, n_max, args.tol)
    k = args.preview
    pre = [
        {"n": n, **_threshold_entry(pre_gap_benefit_threshold, d, n, gap.m, args.tol)}
        for n in range(min(gap.m, k))
    ]
    post = []
    for n in np.flatnonzero(original.values < -original.eps_sign).tolist():
        if n < gap.m:
            continue
        entry = {"n": n, **_threshold_entry(post_gap_threshold, d, n, gap.m, args.tol)}
        if "threshold" in entry:
            entry["preserved"] = gap.g < entry["threshold"]
        post.append(entry)
        if len(post) == k:
            break
    report = {
        "input": spec,
        "gap": {"m": gap.m, "g": gap.g},
        "perturbed": gapped.to_spec(),
        "mean_original": d.mean(),
        "mean_perturbed": gapped.mean(),
        "verdict_original": beneficial(d, args.tol).to_dict(),
        "verdict_perturbed": beneficial(gapped, args.tol).to_dict(),
        "s_original": original.values[:k],
        "s_perturbed": direct.values[:k],
        "s_predicted": predicted[:k],
        "max_prediction_error": float(np.max(np.abs(predicted - direct.values))),
        "within_gap_bounds": within_gap_bounds(d, gap, args.tol),
        "pre_gap_thresholds": pre,
        "post_gap_thresholds": post,
        "diagnostics": {"tol": args.tol, "horizon": n_max},
    }
    if args.seq_out:
        write_columns(args.seq_out, direct.values)
    return report


def cmd_reconstruct(args) -> dict:
    s = load_sequence(args.seqfile)
    rec = reconstruct_cmf(s, args.mean)
    return {
        "input_length": len(s),
        "mean": args.mean,
        "distribution": rec.to_spec(),
        "reconstructed_mean": rec.mean(),
    }


def cmd_simulate(args) -> dict:
    spec, d = load_distribution(args.spec)
    pol = parse_policy(args.policy)
    res = simulate(d, pol, args.reps, args.seed, max_iterations=args.max_iter, workers=args.workers)
    report = {"input": spec, "policy": pol.to_spec(), "simulation": res.to_dict()}
    try:
        e_t = mean_hitting_time(d, pol, args.tol).e_t
    except InfiniteMeanError:
        e_t = math.inf
    report["analytic_e_t"] = e_t
    if res.std_error > 0 and math.isfinite(e_t):
        report["z_score"] = (res.mean_estimate - e_t) / res.std_error
    else:
        report["z_score"] = None
    return report


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restartseq",
        description="Decide whether restart lowers the mean of a discrete hitting time.",
        epilog=_EXIT_CODES + "\nSPEC is a JSON file or an inline JSON object such as "
        "'{\"family\": \"geometric\", \"rho\": 0.5}'.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=_EXIT_CODES,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="truncation tolerance (default 1e-12)")
        return p

    p = add("analyze", "verdict, first-step test, log shape and tail class")
    p.add_argument("spec")
    p.add_argument("--horizon", type=_non_negative_int, default=None, help="last index of S (default: automatic)")
    p.add_argument("--seq-out", default=None, help="write 'n S_n' columns to this file")
    p.add_argument("--preview", type=_non_negative_int, default=DEFAULT_PREVIEW)
    p.add_argument("--optimize", action="store_true", help="also search the best sharp restart")
    p.set_defaults(func=cmd_analyze)

    p = add("et", "exact mean hitting time under one restart policy")
    p.add_argument("spec")
    p.add_argument("--policy", required=True, help="sharp:N, dist:SPEC or none")
    p.set_defaults(func=cmd_et)

    p = add("optimize", "best sharp restart time")
    p.add_argument("spec")
    p.add_argument("--n-max", type=_positive_int, default=None)
    p.set_defaults(func=cmd_optimize)

    p = add("perturb", "insert a gap in the support (or delay) and compare sequences")
    p.add_argument("spec")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--gap", help="m,g: push mass at n >= m back by g")
    grp.add_argument("--delay", type=_positive_int, help="shift the whole distribution by g")
    p.add_argument("--horizon", type=_non_negative_int, default=None)
    p.add_argument("--seq-out", default=None, help="write 'n S~_n' columns to this file")
    p.add_argument("--preview", type=_non_negative_int, default=DEFAULT_PREVIEW)
    p.set_defaults(func=cmd_perturb)

    p = add("reconstruct", "recover the distribution from a restart sequence and a mean")
    p.add_argument("seqfile", help="one value per line, 'n value' columns, or a JSON array")
    p.add_argument("--mean", type=float, required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = add("simulate", "Monte Carlo estimate of E[T]")
    p.add_argument("spec")
    p.add_argument("--policy", required=True, help="sharp:N, dist:SPEC or none")
    p.add_argument("--reps", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--max-iter", type=_positive_int, default=DEFAULT_MAX_ITERATIONS)
    p.set_defaults(func=cmd_simulate)
    return parser


def _fail(code: int, exc: Exception) -> int:
    print(f"restartseq: error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except ParseError as exc:
        return _fail(EXIT_PARSE, exc)
    except InfiniteMeanError as exc:
        return _fail(EXIT_INFINITE_MEAN, exc)
    except PreemptiveRestartError as exc:
        return _fail(EXIT_PREEMPTIVE, exc)
    except NotADistributionError as exc:
        return _fail(EXIT_NOT_A_DISTRIBUTION, exc)
    except InconsistentTailError as exc:
        return _fail(EXIT_INCONSISTENT_TAIL, exc)
    except RestartCapExceeded as exc:
        return _fail(EXIT_RESTART_CAP, exc)
    except ValueError as exc:
        return _fail(EXIT_PARSE, exc)
    sys.stdout.write(render(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
