"""Command-line interface.

Global flags go before the subcommand::

    patentdyn [--config run.json] [--out DIR] [--seed N] <command> [options]

Exit codes: 0 success, 2 invalid input or configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from patentdyn import __version__
from patentdyn._io import atomic_write_text, dumps

log = logging.getLogger("patentdyn")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# helpers


def _emit(obj, out: str | None) -> None:
    text = dumps(obj)
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _out_dir(args) -> Path:
    out = getattr(args, "out", None) or args.global_out or (args.config_obj.out if args.config_obj else None)
    if not out:
        raise CliError("no output directory; pass --out")
    return Path(out)


def _out_file(args) -> str | None:
    return getattr(args, "out", None)


def _load_series(path: str, transform: str = "none"):
    from patentdyn.series import cumulate_stock, log_transform, read_series

    if not Path(path).is_file():
        raise CliError(f"series file {path} does not exist")
    s = read_series(path)
    if transform == "log_count":
        s = log_transform(s, "dummy_zeros")
    elif transform == "log_stock":
        s = log_transform(cumulate_stock(s), "dummy_zeros")
    return s


def _report_options(args):
    from patentdyn.report import ReportOptions

    base = args.config_obj.report if args.config_obj else ReportOptions()
    overrides = {}
    for name in ("stock", "zero_policy", "deterministic", "max_lag", "lag_criterion", "ic", "p_max", "q_max", "max_breaks", "trim"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if getattr(args, "bandwidth", None) is not None:
        overrides["bandwidth"] = _bandwidth(args.bandwidth)
    return replace(base, **overrides)


def _bandwidth(text: str):
    if text in ("auto", "short"):
        return text
    try:
        return int(text)
    except ValueError:
        raise CliError(f"bandwidth must be 'auto', 'short' or an integer, got {text!r}") from None


def _sim_spec(args):
    from patentdyn.simulate import SimSpec

    raw = args.spec
    text = Path(raw).read_text(encoding="utf-8") if Path(raw).is_file() else raw
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"spec is neither a file nor valid JSON: {exc}") from None
    if args.seed is not None:
        d["seed"] = args.seed
    return SimSpec.from_dict(d)


def _with_options(result: dict, options: dict, series=None) -> dict:
    out = {"version": __version__, "options": options, "result": result}
    if series is not None:
        out["series"] = [s.key.to_dict() for s in series]
        out["transform"] = [s.transform for s in series]
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args) -> int:
    from patentdyn.ingest import RegionMapper, apply_window, deduplicate_families, parse_patent_file, write_families

    mapper = RegionMapper.from_csv(args.authorities) if args.authorities else RegionMapper()
    records = parse_patent_file(Path(args.input).read_bytes(), args.format or _guess_format(args.input))
    fams = apply_window(deduplicate_families(records, mapper), args.first, args.last)
    out = _out_dir(args)
    atomic_write_text(out / "families.csv", write_families(fams))
    _emit(
        {"records": len(records), "families": len(fams), "unknown_authorities": dict(sorted(mapper.unknown.items()))},
        str(out / "ingest.json"),
    )
    return EXIT_OK


def _guess_format(path: str) -> str:
    return "jsonl" if str(path).lower().endswith((".jsonl", ".ndjson")) else "csv"


def cmd_classify(args) -> int:
    from patentdyn.pipeline import RunConfig
    from patentdyn.classifier import classify_families
    from patentdyn.ingest import deduplicate_families, parse_patent_file, write_families

    cfg = RunConfig(
        input=args.input, dictionary=args.dict, cpc_ai=args.cpc_ai, cpc_robot=args.cpc_robot, mode=args.mode
    )
    cfg.validate()
    kd, rules, mapper = cfg.load_assets()
    records = parse_patent_file(Path(args.input).read_bytes(), args.format or _guess_format(args.input))
    fams = classify_families(deduplicate_families(records, mapper), kd, rules, args.mode)
    text = write_families(fams)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_series(args) -> int:
    from patentdyn.ingest import apply_window, read_families
    from patentdyn.series import build_counts, cumulate_stock, log_transform, write_series

    fams = apply_window(read_families(Path(args.input).read_bytes()), args.first, args.last)
    out = _out_dir(args)
    n = 0
    for s in build_counts(fams, args.group_by, args.first, args.last):
        if args.transform in ("stock", "log_stock"):
            s = cumulate_stock(s)
        if args.transform in ("log_count", "log_stock"):
            s = log_transform(s, args.zero_policy)
        write_series(s, out)
        n += 1
    log.info("wrote %d series to %s", n, out)
    return EXIT_OK


def cmd_adf(args) -> int:
    from patentdyn.econ import adf_test

    s = _load_series(args.input, args.transform)
    res = adf_test(s.values, args.deterministic, args.max_lag, args.lag_criterion)
    _emit(_with_options(res.to_dict(), vars_subset(args, "deterministic", "max_lag", "lag_criterion", "transform"), [s]), args.out)
    return EXIT_OK


def cmd_kpss(args) -> int:
    from patentdyn.econ import kpss_test

    s = _load_series(args.input, args.transform)
    res = kpss_test(s.values, args.deterministic, _bandwidth(args.bandwidth))
    _emit(_with_options(res.to_dict(), vars_subset(args, "deterministic", "bandwidth", "transform"), [s]), args.out)
    return EXIT_OK


def cmd_arima(args) -> int:
    from patentdyn.econ import fit_arima, select_arima

    s = _load_series(args.input, args.transform)
    if args.order:
        try:
            p, d, q = (int(v) for v in args.order.split(","))
        except ValueError:
            raise CliError("--order must look like p,d,q") from None
        result = fit_arima(s.values, p, d, q).to_dict()
    else:
        sel = select_arima(s.values, args.p_max, args.q_max, args.d, args.criterion)
        result = {
            "best": sel.best.to_dict(),
            "criterion": sel.criterion,
            "d": sel.d,
            "table": {f"{p},{q}": (f.to_dict() if not isinstance(f, str) else {"error": f}) for (p, q), f in sel.table.items()},
        }
    _emit(_with_options(result, vars_subset(args, "order", "p_max", "q_max", "d", "criterion", "transform"), [s]), args.out)
    return EXIT_OK


def cmd_breaks(args) -> int:
    from patentdyn.econ import bai_perron

    s = _load_series(args.input, args.transform)
    res = bai_perron(s.values, args.max_breaks, args.trim, years=s.years)
    _emit(_with_options(res.to_dict(), vars_subset(args, "max_breaks", "trim", "transform"), [s]), args.out)
    return EXIT_OK


def cmd_coint(args) -> int:
    from patentdyn.econ import engle_granger

    y = _load_series(args.left, args.transform)
    x = _load_series(args.right, args.transform)
    res = engle_granger(y, x, args.lag_criterion, args.max_lag)
    _emit(_with_options(res.to_dict(), vars_subset(args, "lag_criterion", "max_lag", "transform"), [y, x]), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    from patentdyn.report import TABLES, write_report

    if args.table not in TABLES:
        raise CliError(f"unknown table {args.table!r}; valid tables: {', '.join(TABLES)}")
    if not Path(args.series_dir).is_dir():
        raise CliError(f"series directory {args.series_dir} does not exist")
    rep = write_report(args.series_dir, args.table, _out_dir(args), _report_options(args))
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    from patentdyn.report import FIGURES, write_plotdata

    valid = set(FIGURES) | set(FIGURES.values())
    if args.figure not in valid:
        raise CliError(f"unknown figure {args.figure!r}; valid figures: {', '.join(FIGURES)}")
    out = args.out or str(_out_dir(args) / f"{args.figure}.csv")
    try:
        write_plotdata(args.series_dir, args.figure, out)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from None
    return EXIT_OK


def cmd_simulate(args) -> int:
    import csv
    import io

    from patentdyn.simulate import generate

    spec = _sim_spec(args)
    data = generate(spec)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(data, tuple):
        w.writerow(["year", "x", "y"])
        for yr, a, b in zip(data[0].years, data[0].values, data[1].values):
            w.writerow([int(yr), repr(float(a)), repr(float(b))])
    else:
        w.writerow(["year", "value", "zero"])
        for yr, v in zip(data.years, data.values):
            w.writerow([int(yr), repr(float(v)), 0])
    if args.out:
        atomic_write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_mc(args) -> int:
    from patentdyn.simulate import monte_carlo

    spec = _sim_spec(args)
    opts = json.loads(args.options) if args.options else {}
    res = monte_carlo(spec, args.replications, args.statistic, **opts)
    _emit(_with_options(res.to_dict(), {"spec": spec.to_dict(), "test_options": opts}), args.out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    from patentdyn.pipeline import RunConfig

    cfg = args.config_obj or RunConfig()
    for name in ("input", "format", "dictionary", "cpc_ai", "cpc_robot", "authorities", "first", "last", "mode"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    cfg.out = str(_out_dir(args))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.no_report:
        cfg.reports = False
    cfg.report = _report_options(args)
    from patentdyn.pipeline import run_pipeline

    manifest = run_pipeline(cfg)
    print(json.dumps(manifest["counts"]["by_domain"], sort_keys=True))
    return EXIT_OK


def vars_subset(args, *names) -> dict:
    return {n: getattr(args, n, None) for n in names}


# ---------------------------------------------------------------------------
# parser


def _add_transform(p):
    p.add_argument(
        "--transform",
        choices=("none", "log_count", "log_stock"),
        default="none",
        help="transform applied to a count series before testing (zeros map to 0 in logs)",
    )


def _add_report_options(p):
    g = p.add_argument_group("test options")
    g.add_argument("--stock", action="store_true", default=None, help="test log cumulative stocks instead of log counts")
    g.add_argument("--zero-policy", choices=("log1p", "dummy_zeros"), default=None)
    g.add_argument("--deterministic", choices=("n", "c", "ct"), default=None)
    g.add_argument("--max-lag", type=int, default=None)
    g.add_argument("--lag-criterion", choices=("aic", "hqic", "bic", "fixed"), default=None)
    g.add_argument("--bandwidth", default=None, help="KPSS bandwidth: auto, short or an integer")
    g.add_argument("--ic", choices=("aic", "bic", "hqc"), default=None, help="ARIMA selection criterion")
    g.add_argument("--p-max", type=int, default=None)
    g.add_argument("--q-max", type=int, default=None)
    g.add_argument("--max-breaks", type=int, default=None)
    g.add_argument("--trim", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    from patentdyn.report import FIGURES, TABLES
    from patentdyn.series import GROUP_DIMENSIONS

    parser = argparse.ArgumentParser(prog="patentdyn", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", dest="global_out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed for simulation commands")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, deduplicate and window a patent file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--authorities", help="code,region CSV overriding the bundled table")
    p.add_argument("--first", type=int, default=1980)
    p.add_argument("--last", type=int, default=2018)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("classify", help="label families as CoreAI / TraditionalRobot / AIEnhancedRobot / Other")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--dict", help="keyword dictionary CSV (term,group,tier)")
    p.add_argument("--cpc-ai", help="AI CPC symbol list")
    p.add_argument("--cpc-robot", help="robot CPC prefix list")
    p.add_argument("--mode", choices=("union", "intrinsic"), default="union")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("series", help="build annual count series from labelled families")
    p.add_argument("--input", required=True, help="labelled families CSV")
    p.add_argument("--group-by", nargs="+", default=["domain"], choices=sorted(GROUP_DIMENSIONS))
    p.add_argument("--first", type=int, default=1980)
    p.add_argument("--last", type=int, default=2018)
    p.add_argument("--transform", choices=("count", "stock", "log_count", "log_stock"), default="count")
    p.add_argument("--zero-policy", choices=("log1p", "dummy_zeros"), default="dummy_zeros")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("adf", help="augmented Dickey-Fuller test on one series")
    p.add_argument("--input", required=True)
    p.add_argument("--deterministic", choices=("n", "c", "ct"), default="c")
    p.add_argument("--max-lag", type=int)
    p.add_argument("--lag-criterion", choices=("aic", "hqic", "bic", "fixed"), default="aic")
    _add_transform(p)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_adf)

    p = sub.add_parser("kpss", help="KPSS stationarity test on one series")
    p.add_argument("--input", required=True)
    p.add_argument("--deterministic", choices=("c", "ct"), default="c")
    p.add_argument("--bandwidth", default="auto")
    _add_transform(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kpss)

    p = sub.add_parser("arima", help="fit one ARIMA order or select over a grid")
    p.add_argument("--input", required=True)
    p.add_argument("--order", help="p,d,q to fit a single model")
    p.add_argument("--p-max", type=int, default=2)
    p.add_argument("--q-max", type=int, default=2)
    p.add_argument("--d", type=int, help="integration order (default: tested)")
    p.add_argument("--criterion", choices=("aic", "bic", "hqc"), default="bic")
    _add_transform(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_arima)

    p = sub.add_parser("breaks", help="multiple mean-shift break search")
    p.add_argument("--input", required=True)
    p.add_argument("--max-breaks", type=int, default=5)
    p.add_argument("--trim", type=float, default=0.15)
    _add_transform(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_breaks)

    p = sub.add_parser("coint", help="Engle-Granger test of LEFT on RIGHT")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--lag-criterion", choices=("aic", "hqic"), default="aic")
    p.add_argument("--max-lag", type=int)
    _add_transform(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coint)

    p = sub.add_parser("report", help="write a result table with per-cell JSON")
    p.add_argument("--series-dir", required=True)
    p.add_argument("--table", required=True, help=f"one of: {', '.join(TABLES)}")
    _add_report_options(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plotdata", help="long-format CSV for one figure")
    p.add_argument("--series-dir", required=True)
    p.add_argument("--figure", required=True, help=f"one of: {', '.join(FIGURES)} (or fig3..fig10)")
    p.add_argument("--out", help="output CSV")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("simulate", help="draw one simulated series")
    p.add_argument("--spec", required=True, help="SimSpec JSON file or literal")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo rejection frequencies")
    p.add_argument("--spec", required=True)
    p.add_argument("--replications", type=int, default=1000)
    p.add_argument("--statistic", default="adf", choices=("adf", "kpss", "eg", "breaks"))
    p.add_argument("--options", help="JSON object of test options")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("pipeline", help="ingest, classify, build series and write all reports")
    p.add_argument("--input")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--dictionary")
    p.add_argument("--cpc-ai")
    p.add_argument("--cpc-robot")
    p.add_argument("--authorities")
    p.add_argument("--first", type=int)
    p.add_argument("--last", type=int)
    p.add_argument("--mode", choices=("union", "intrinsic"))
    p.add_argument("--no-report", action="store_true")
    _add_report_options(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    from patentdyn.exceptions import PatentDynError
    from patentdyn.pipeline import ConfigError, RunConfig, StageError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.config_obj = RunConfig.from_json(args.config) if args.config else None
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME if isinstance(exc.cause, RuntimeError) else EXIT_VALIDATION
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PatentDynError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME if isinstance(exc, RuntimeError) else EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - top-level guard maps to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
