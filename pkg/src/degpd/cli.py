"""Command-line interface: ``degpd <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .carrier import DEFAULT_OMEGA
from .counts import CountSample
from .errors import (
    BandError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    ParseError,
    UsageError,
)
from .gof import KS_B, ks_test_mc, qq_data, return_levels
from .inference import FitResult, bootstrap_bands, fit_mle
from .models import ModelSpec, ParamVector, sample
from .simlab import (
    RecoveryConfig,
    SweepConfig,
    rows_to_csv,
    run_recovery,
    run_threshold_sweep,
    sample_discrete_gev,
    summarize,
)

log = logging.getLogger("degpd")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

DEFAULT_M_GRID = (2, 5, 10, 20, 50, 100, 200, 500, 1000)


# --- input -------------------------------------------------------------------

def _parse_int(tok: str, lineno: int, what: str) -> int:
    tok = tok.strip()
    try:
        val = int(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: {what} {tok!r} is not an integer") from None
    if val < 0:
        raise ParseError(f"line {lineno}: {what} {val} is negative")
    return val


def parse_counts(text: str) -> CountSample:
    """Parse one count per line, or ``value,count`` rows with an optional header."""
    rows = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), start=1)]
    rows = [(i, ln) for i, ln in rows if ln]
    if not rows:
        return CountSample.from_observations([])
    first = rows[0][1]
    tabular = "," in first
    if tabular:
        cells = [c.strip() for c in first.split(",")]
        if len(cells) == 2 and not all(c.lstrip("+-").isdigit() for c in cells):
            rows = rows[1:]
    table: dict[int, int] = {}
    for lineno, ln in rows:
        if tabular:
            cells = ln.split(",")
            if len(cells) != 2:
                raise ParseError(f"line {lineno}: expected 'value,count', got {ln!r}")
            v = _parse_int(cells[0], lineno, "value")
            c = _parse_int(cells[1], lineno, "count")
        else:
            if "," in ln:
                raise ParseError(f"line {lineno}: unexpected ',' in single-column input")
            v, c = _parse_int(ln, lineno, "value"), 1
        table[v] = table.get(v, 0) + c
    return CountSample.from_table(table)


def ingest_counts(path) -> CountSample:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file {str(p)!r} does not exist")
    return parse_counts(p.read_text(encoding="utf-8"))


# --- output ------------------------------------------------------------------

def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _summary_text(summary) -> str:
    lines = [f"{'model':<12} {'u':>3} {'param':<6} {'n':>5} {'median':>12} {'q1':>12} {'q3':>12}"]
    for s in summary:
        u = "-" if s["threshold"] is None else str(s["threshold"])
        lines.append(f"{s['model']:<12} {u:>3} {s['parameter']:<6} {s['n']:>5} "
                     f"{s['median']:>12.6g} {s['q1']:>12.6g} {s['q3']:>12.6g}")
    return "\n".join(lines) + "\n"


def _print_summary(summary, args) -> None:
    # keep stdout clean when the CSV itself goes there
    stream = sys.stderr if args.output in (None, "-") else sys.stdout
    stream.write(_summary_text(summary))


# --- argument handling -------------------------------------------------------

def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _pos_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: standard output)")
    common.add_argument("--model", default="degpd-m1",
                        help="dgpd, degpd-m1|m2|m3 or zidegpd-m1|m2|m3 (default: degpd-m1)")
    common.add_argument("--omega", type=float, default=DEFAULT_OMEGA,
                        help="lower bound of the M3 carrier (default: 1/32)")
    common.add_argument("--seed", type=_nonneg_int, default=0)
    common.add_argument("--jobs", type=_pos_int, default=1, help="worker processes")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--verbose", "-v", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", "-i", help="counts: one per line, or value,count rows")
    data.add_argument("--threshold", type=_nonneg_int,
                      help="fit the exceedances y - u of observations y >= u")
    data.add_argument("--fit", dest="fit_json", help="fit JSON written by 'degpd fit'")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--pi", type=float)
    params.add_argument("--kappa", type=float)
    params.add_argument("--beta", type=float, default=1.0)
    params.add_argument("--xi", type=float, default=0.2)

    p = argparse.ArgumentParser(prog="degpd", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", parents=[common, data], help="maximum-likelihood fit")
    f.add_argument("--bootstrap-B", type=_nonneg_int, default=1000,
                   help="bootstrap replicates for confidence bands (0 disables)")
    f.add_argument("--level", type=float, default=0.95)

    g = sub.add_parser("gof", parents=[common, data], help="Monte Carlo KS test")
    g.add_argument("--ks-B", type=_pos_int, default=KS_B)

    sub.add_parser("qq", parents=[common, data], help="Q-Q pairs (empirical,model)")

    r = sub.add_parser("return-levels", parents=[common, data], help="m-observation return levels")
    r.add_argument("--m", type=_float_list, default=list(DEFAULT_M_GRID),
                   help="comma-separated return periods > 1")

    s = sub.add_parser("sample", parents=[common, params], help="draw from a model")
    s.add_argument("--n", type=_pos_int, required=True)

    sim = sub.add_parser("simulate", parents=[common], help="draw discrete GEV counts")
    sim.add_argument("--n", type=_pos_int, required=True)
    sim.add_argument("--mu", type=float, default=2.0)
    sim.add_argument("--beta", type=float, default=1.0)
    sim.add_argument("--xi", type=float, default=0.05)

    rec = sub.add_parser("recovery", parents=[common, params], help="parameter recovery study")
    rec.add_argument("--n", type=_pos_int, default=1000)
    rec.add_argument("--replicates", type=_pos_int, default=200)

    sw = sub.add_parser("sweep", parents=[common], help="threshold sweep on discrete GEV data")
    sw.add_argument("--n", type=_pos_int, default=2000)
    sw.add_argument("--replicates", type=_pos_int, default=200)
    sw.add_argument("--mu", type=float, default=2.0)
    sw.add_argument("--beta", type=float, default=1.0)
    sw.add_argument("--xi", type=float, default=0.05)
    sw.add_argument("--thresholds", type=_int_list, default=[0, 1, 2, 3, 4, 5])
    sw.add_argument("--models", default="dgpd,degpd-m1,degpd-m2,degpd-m3")
    return p


def _check_args(parser, args) -> None:
    cmd = args.command
    if cmd in ("fit", "gof", "qq") and not args.input:
        parser.error(f"{cmd} requires --input")
    if cmd == "return-levels" and not (args.input or args.fit_json):
        parser.error("return-levels requires --input or --fit")
    if cmd == "fit" and args.fit_json:
        parser.error("fit does not take --fit")


# --- commands ----------------------------------------------------------------

def _spec(args) -> ModelSpec:
    return ModelSpec.parse(args.model, omega=args.omega)


def _model_params(args, spec: ModelSpec) -> ParamVector:
    vals = {"beta": args.beta, "xi": args.xi}
    if "kappa" in spec.param_names:
        if args.kappa is None:
            raise UsageError(f"{spec.name} requires --kappa")
        vals["kappa"] = args.kappa
    if "pi" in spec.param_names:
        if args.pi is None:
            raise UsageError(f"{spec.name} requires --pi")
        vals["pi"] = args.pi
    extra = [n for n in ("pi", "kappa") if getattr(args, n) is not None and n not in spec.param_names]
    if extra:
        raise UsageError(f"{spec.name} has no parameter {extra[0]}")
    return ParamVector(**vals)


def _load_data(args, threshold: int | None) -> CountSample:
    data = ingest_counts(args.input)
    data.require_nonempty()
    if threshold is not None:
        data = data.exceedances(threshold)
        if data.n == 0:
            raise UsageError(f"no exceedances of threshold {threshold}")
    return data


def _load_fit(path) -> tuple[FitResult, int | None]:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"fit file {str(path)!r} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"fit file is not valid JSON: {exc}") from None
    try:
        return FitResult.from_dict(d), d.get("threshold")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"fit file lacks field {exc}") from None


def _fit_or_load(args) -> tuple[FitResult, CountSample | None, int | None]:
    """The fit to diagnose, the (thresholded) data, and the threshold used."""
    if args.fit_json:
        fit, threshold = _load_fit(args.fit_json)
        if args.threshold is not None and args.threshold != threshold:
            raise UsageError("--threshold disagrees with the threshold stored in --fit")
        data = _load_data(args, threshold) if args.input else None
        return fit, data, threshold
    data = _load_data(args, args.threshold)
    fit = fit_mle(data, _spec(args), strict=False)
    if not fit.converged:
        raise ConvergenceError(f"{fit.spec.name}: optimizer did not converge", fit)
    return fit, data, args.threshold


def cmd_fit(args) -> int:
    spec = _spec(args)
    data = _load_data(args, args.threshold)
    fit = fit_mle(data, spec, strict=False)
    if not fit.converged:
        raise ConvergenceError(f"{spec.name}: optimizer did not converge", fit)
    if args.bootstrap_B:
        fit.boot_bands = bootstrap_bands(data, spec, fit, B=args.bootstrap_B, level=args.level,
                                         seed=args.seed, jobs=args.jobs)
    out = fit.to_dict()
    out["seed"] = args.seed
    out["threshold"] = args.threshold
    out["bootstrap_B"] = args.bootstrap_B
    if args.format == "csv":
        bands = fit.boot_bands or {}
        rows = [(k, v, *bands.get(k, ("", ""))) for k, v in fit.estimates.as_dict().items()]
        _write(_csv(("parameter", "estimate", "lo", "hi"), rows), args.output)
    else:
        _write(_json(out), args.output)
    return EXIT_OK


def cmd_gof(args) -> int:
    fit, data, threshold = _fit_or_load(args)
    if data is None:
        raise UsageError("gof requires --input")
    if fit.data_fingerprint and fit.data_fingerprint != data.fingerprint():
        log.warning("the fit was computed on different data")
    rep = ks_test_mc(data, fit.spec, B=args.ks_B, seed=args.seed, fit=fit, jobs=args.jobs)
    out = {"model": fit.spec.name, "threshold": threshold, "seed": args.seed,
           "ks_statistic": rep.ks_statistic, "p_value": rep.p_value,
           "mc_replicates": rep.mc_replicates, "failed_refits": rep.n_failed}
    if args.format == "csv":
        _write(_csv(tuple(out), [tuple("" if v is None else v for v in out.values())]), args.output)
    else:
        _write(_json(out), args.output)
    return EXIT_OK


def cmd_qq(args) -> int:
    fit, data, _ = _fit_or_load(args)
    if data is None:
        raise UsageError("qq requires --input")
    pts = qq_data(data, fit.spec, fit.estimates)
    if args.format == "json":
        _write(_json([{"empirical": a, "model": b} for a, b in pts]), args.output)
    else:
        _write(_csv(("empirical", "model"), pts), args.output)
    return EXIT_OK


def cmd_return_levels(args) -> int:
    fit, _, _ = _fit_or_load(args)
    levels = return_levels(fit.spec, fit.estimates, args.m)
    if args.format == "json":
        _write(_json([{"m": m, "level": lv} for m, lv in levels]), args.output)
    else:
        _write(_csv(("m", "level"), levels), args.output)
    return EXIT_OK


def _write_counts(values, args) -> None:
    values = np.asarray(values, dtype=np.int64)
    if args.format == "csv":
        s = CountSample.from_observations(values)
        _write(_csv(("value", "count"), zip(s.values.tolist(), s.counts.tolist())), args.output)
    elif args.format == "json":
        _write(_json(values.tolist()), args.output)
    else:
        _write("".join(f"{v}\n" for v in values.tolist()), args.output)


def cmd_sample(args) -> int:
    spec = _spec(args)
    params = _model_params(args, spec)
    _write_counts(sample(args.n, spec, params, seed=args.seed), args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    draw = sample_discrete_gev(args.n, args.mu, args.beta, args.xi, seed=args.seed)
    _write_counts(draw.draws, args)
    sys.stderr.write(f"rejected negative draws: {draw.rejected}\n")
    return EXIT_OK


def cmd_recovery(args) -> int:
    spec = _spec(args)
    cfg = RecoveryConfig(spec, _model_params(args, spec), n=args.n,
                         replicates=args.replicates, seed=args.seed)
    rows = run_recovery(cfg, jobs=args.jobs)
    summary = summarize(rows)
    _write(rows_to_csv(rows), args.output)
    _print_summary(summary, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    models = tuple(ModelSpec.parse(m, omega=args.omega) for m in args.models.split(",") if m.strip())
    cfg = SweepConfig(gev_mu=args.mu, gev_beta=args.beta, gev_xi=args.xi,
                      thresholds=tuple(args.thresholds), n=args.n, replicates=args.replicates,
                      models=models, seed=args.seed)
    res = run_threshold_sweep(cfg, jobs=args.jobs)
    _write(res.to_csv(), args.output)
    _print_summary(res.summary(), args)
    sys.stderr.write(f"rejected negative draws: {res.rejected}; "
                     f"skipped cells: {len(res.skipped)}\n")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "gof": cmd_gof,
    "qq": cmd_qq,
    "return-levels": cmd_return_levels,
    "sample": cmd_sample,
    "simulate": cmd_simulate,
    "recovery": cmd_recovery,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_args(parser, args)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        res = getattr(exc, "result", None)
        if res is not None:
            sys.stderr.write(f"best incumbent: {res.estimates.as_dict()} "
                             f"loglik={res.loglik!r} iterations={res.iterations}\n")
        return EXIT_NOT_CONVERGED
    except BandError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED
    except (UsageError, ParseError, ConfigurationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
