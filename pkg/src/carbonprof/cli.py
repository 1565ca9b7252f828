"""Command-line interface: ``carbonprof {run|bench|analyze|oracle}``.

Exit codes: 0 success, 1 configuration error, 2 source error (battery,
trace file, synthetic spec), 3 workload failure, 4 no strain detected
(analyze only).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import (
    CarbonprofError,
    ConfigError,
    NoStrainDetectedError,
    SourceError,
    TraceError,
    TraceNotFoundError,
    UnknownRegionError,
    WorkloadError,
    WorkloadFailedError,
)
from .intensity import DEFAULT_REGION, CarbonIntensity, lookup_intensity
from .powersource import SourceDescriptor
from .protocol import (
    DEFAULT_BASELINE_SECS,
    ExternalCommand,
    SessionConfig,
    run_session,
    strain_footprint_scaled,
)
from .report import analyze_to_dict, bench_to_dict, render, report_to_dict, to_json
from .traceio import (
    baseline_stats,
    detect_strain_window,
    integrate_energy,
    read_trace,
)
from .workloads import Variant, WorkloadSpec, oracle_rotate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOURCE = 2
EXIT_WORKLOAD = 3
EXIT_NO_STRAIN = 4

_VARIANT_ORDER = (Variant.VECTOR, Variant.RAW, Variant.ARRAY, Variant.LIST)


class _Parser(argparse.ArgumentParser):
    # spec maps configuration errors to exit code 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "csv", "md"), default="json",
                   help="output format (default json)")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write the report here instead of stdout")


def _add_intensity_args(p):
    p.add_argument("--region", default=DEFAULT_REGION,
                   help="carbon-intensity region, or custom:<factor> (default US)")
    p.add_argument("--intensity-factor", type=float, default=None, metavar="KG_PER_KWH",
                   help="explicit intensity factor, overrides --region")


def _add_session_args(p, bench: bool):
    if not bench:
        p.add_argument("--workload", choices=[v.value for v in _VARIANT_ORDER],
                       help="built-in workload variant")
        p.add_argument("--command", metavar="CMDLINE",
                       help="external command line to profile instead of a built-in")
    p.add_argument("--iters", type=int, default=None,
                   help="iteration budget for built-in workloads")
    if bench:
        p.add_argument("--source", action="append", required=True, metavar="SPEC",
                       help="power source: battery | trace:<path> | synthetic:<spec> "
                            "| none; give once for all workloads or once per workload")
    else:
        p.add_argument("--source", required=True, metavar="SPEC",
                       help="power source: battery | trace:<path> | synthetic:<spec> | none")
    p.add_argument("--baseline-secs", type=float, default=DEFAULT_BASELINE_SECS,
                   help="inactivity phase length in seconds (default 60)")
    p.add_argument("--runs", type=int, default=1,
                   help="workload repetitions to average over (default 1)")
    _add_intensity_args(p)
    p.add_argument("--paper-units", action="store_true",
                   help="also report energy as W*min and the carbon figure derived "
                        "from it, matching tables that use minutes as the time base")
    _add_output_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="carbonprof",
                     description="Measure the energy and carbon footprint "
                                 "attributable to a running workload.")
    parser.add_argument("--version", action="version", version="carbonprof 0.1.0")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="profile one workload through the "
                                       "inactivity/strain/inactivity protocol")
    _add_session_args(p_run, bench=False)

    p_bench = sub.add_parser("bench", help="profile all four built-in workloads "
                                           "and emit a comparison table")
    _add_session_args(p_bench, bench=True)

    p_an = sub.add_parser("analyze", help="offline strain analysis of a recorded trace")
    p_an.add_argument("trace", help="trace csv file")
    p_an.add_argument("--baseline-secs", type=float, default=DEFAULT_BASELINE_SECS,
                      help="length of the leading baseline interval (default 60)")
    p_an.add_argument("--k", type=float, default=3.0,
                      help="detection threshold in baseline standard deviations (default 3)")
    _add_intensity_args(p_an)
    _add_output_args(p_an)

    p_or = sub.add_parser("oracle", help="print the brute-force rotation checksum")
    p_or.add_argument("--iters", type=int, required=True)
    p_or.add_argument("--window", type=int, default=100)
    p_or.add_argument("--format", choices=("json", "plain"), default="plain")

    return parser


def _resolve_intensity(args) -> CarbonIntensity:
    if args.intensity_factor is not None:
        return CarbonIntensity("custom", args.intensity_factor)
    return lookup_intensity(args.region)


def _resolve_source(text: str) -> SourceDescriptor | None:
    if text.strip().lower() in ("none", "null"):
        return None
    return SourceDescriptor.parse(text)


def _resolve_workload(args):
    if args.command and args.workload:
        raise ConfigError("give either --workload or --command, not both")
    if args.command:
        if args.iters is not None:
            raise ConfigError("--iters applies to built-in workloads only")
        return ExternalCommand.parse(args.command)
    if not args.workload:
        raise ConfigError("one of --workload or --command is required")
    if args.iters is None:
        raise ConfigError("--iters is required with --workload")
    return WorkloadSpec(Variant.parse(args.workload), args.iters)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    workload = _resolve_workload(args)
    source = _resolve_source(args.source)
    cfg = SessionConfig(baseline_secs=args.baseline_secs, runs=args.runs,
                        intensity=_resolve_intensity(args))
    report = run_session(workload, source, cfg)
    doc = report_to_dict(report, paper_units=args.paper_units)
    _emit(render(doc, args.format, "run"), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.iters is None:
        raise ConfigError("--iters is required for bench")
    sources = args.source
    if len(sources) == 1:
        sources = sources * len(_VARIANT_ORDER)
    if len(sources) != len(_VARIANT_ORDER):
        raise ConfigError(
            f"bench takes one --source or exactly {len(_VARIANT_ORDER)} "
            f"(in {', '.join(v.value for v in _VARIANT_ORDER)} order), got {len(args.source)}"
        )
    cfg = SessionConfig(baseline_secs=args.baseline_secs, runs=args.runs,
                        intensity=_resolve_intensity(args))
    reports = []
    for variant, src_text in zip(_VARIANT_ORDER, sources):
        spec = WorkloadSpec(variant, args.iters)
        reports.append(run_session(spec, _resolve_source(src_text), cfg))
    doc = bench_to_dict(reports, paper_units=args.paper_units)
    _emit(render(doc, args.format, "bench"), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    path = Path(args.trace)
    if not path.is_file():
        raise TraceNotFoundError(f"trace file not found: {path}")
    trace = read_trace(path)

    t0 = trace.t_first
    t1 = t0 + args.baseline_secs
    if t1 >= trace.t_last:
        raise ConfigError(
            f"baseline of {args.baseline_secs} s covers the whole trace "
            f"({trace.duration:.3f} s); shorten it with --baseline-secs"
        )
    intensity = _resolve_intensity(args)
    mu, sigma = baseline_stats(trace, t0, t1)

    try:
        window = detect_strain_window(trace, t0, t1, k=args.k)
    except NoStrainDetectedError as exc:
        doc = analyze_to_dict(str(path), len(trace), t0, t1, mu, sigma, args.k,
                              window=None, window_energy_wh=None,
                              strain_energy_wh=None, carbon_g=None,
                              intensity_factor=intensity.factor)
        _emit(render(doc, args.format, "analyze"), args.out)
        print(f"carbonprof: no strain detected: {exc}", file=sys.stderr)
        return EXIT_NO_STRAIN

    window_wh = integrate_energy(trace, window.t_start, window.t_end)
    strain_wh = strain_footprint_scaled(window_wh, mu / 3600.0, window.duration)
    carbon = strain_wh * intensity.factor
    doc = analyze_to_dict(str(path), len(trace), t0, t1, mu, sigma, args.k,
                          window=window, window_energy_wh=window_wh,
                          strain_energy_wh=strain_wh, carbon_g=carbon,
                          intensity_factor=intensity.factor)
    _emit(render(doc, args.format, "analyze"), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    checksum = oracle_rotate(args.iters, args.window)
    if args.format == "json":
        _emit(to_json({"max_iter": args.iters, "window": args.window,
                       "checksum": checksum}), None)
    else:
        print(f"checksum={checksum}")
    return EXIT_OK


_HANDLERS = {
    "run": cmd_run,
    "bench": cmd_bench,
    "analyze": cmd_analyze,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except (ConfigError, UnknownRegionError, WorkloadError) as exc:
        print(f"carbonprof: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WorkloadFailedError as exc:
        print(f"carbonprof: workload failed: {exc}", file=sys.stderr)
        return EXIT_WORKLOAD
    except (SourceError, TraceError) as exc:
        print(f"carbonprof: source error: {exc}", file=sys.stderr)
        return EXIT_SOURCE
    except CarbonprofError as exc:
        print(f"carbonprof: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"carbonprof: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"carbonprof: i/o error: {exc}", file=sys.stderr)
        return EXIT_SOURCE


if __name__ == "__main__":
    sys.exit(main())
