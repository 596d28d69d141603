"""Command-line interface.

Exit codes: 0 success, 1 usage or missing input, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, envelope_analysis, errors, files, quantum_approx, quasiclassical, spectral, wigner
from .model import ValidatedConfig
from .spectral import TimeSeries

METHODS = ("spectral", "quasiclassical-closed", "quasiclassical-quadrature", "approx")
EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def two_level(config: ValidatedConfig):
    c = config.state.coefficients
    if c.size > 2 and np.any(np.abs(c[2:]) > 0):
        raise errors.NotTwoLevel("the approx method needs a state on levels 0 and 1 only")
    c = np.concatenate([c, np.zeros(2)])[:2]
    return complex(c[0]), complex(c[1])


def run_method(config: ValidatedConfig, method: str) -> TimeSeries:
    if method == "spectral":
        return spectral.mean_position(config)
    if method == "quasiclassical-closed":
        return quasiclassical.mean_position_closed_form(config)
    if method == "quasiclassical-quadrature":
        return quasiclassical.mean_position_quadrature(config)
    if method == "approx":
        if config.bec.mode != "continuum":
            raise errors.WrongMode("the approx method needs a continuum force distribution")
        c0, c1 = two_level(config)
        return quantum_approx.approx_mean_position(
            c0, c1, config.osc, config.bec.delta_phi, config.times,
            stationary=spectral.stationary_value(config))
    raise UsageError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _floats(text: str, n: Optional[int] = None, what: str = "list") -> List[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    if not vals or (n is not None and len(vals) != n):
        raise UsageError(f"{what} {text!r} needs {n or 'at least one'} comma-separated values")
    return vals


def _load(args):
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    cfg, raw = files.load_config(path)
    return cfg, raw


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        files.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def cmd_evolve(args) -> None:
    cfg, raw = _load(args)
    series = run_method(cfg, args.method)
    meta = {"command": "evolve", "method": args.method,
            "digest": files.digest("evolve", args.method, raw, __version__)}
    _emit(files.format_csv(["t", "x_mean"], zip(series.times, series.values), meta), args.out)


def _wigner_path(out: str, t: float, many: bool) -> str:
    if "{t}" in out:
        return out.replace("{t}", files.fmt(t))
    if not many:
        return out
    p = Path(out)
    return str(p.with_name(f"{p.stem}_t{files.fmt(t)}{p.suffix}"))


def cmd_wigner(args) -> None:
    cfg, raw = _load(args)
    if not args.out:
        raise UsageError("wigner needs --out")
    times = _floats(args.times, what="--times")
    if args.grid:
        try:
            nx, np_ = (int(v) for v in args.grid.split(","))
        except ValueError:
            raise UsageError(f"--grid needs NX,NP, got {args.grid!r}") from None
        if nx < 2 or np_ < 2:
            raise UsageError("--grid needs at least 2 points per axis")
    else:
        nx = np_ = wigner.DEFAULT_POINTS
    osc = cfg.osc
    grid = wigner.default_grid(osc, cfg.initial_position, cfg.initial_momentum, nx, np_)
    rendered = [wigner.render(spectral.density_coefficients(cfg, t), grid, osc) for t in times]
    for t, W in zip(times, rendered):
        meta = {"command": "wigner", "time": files.fmt(t), "grid": f"{nx}x{np_}",
                "digest": files.digest("wigner", t, nx, np_, raw, __version__)}
        files.atomic_write(_wigner_path(args.out, t, len(times) > 1), files.format_wigner(W, meta))


def cmd_timescales(args) -> None:
    cfg, _ = _load(args)
    scales = quasiclassical.time_scales(cfg).as_dict()
    if args.json:
        text = files.dump_timescales(scales)
    else:
        text = "".join(f"{k} = {v:.6g}\n" for k, v in scales.items())
    _emit(text, args.out)


def _baseline(args, series: TimeSeries) -> float:
    if args.baseline is not None:
        return float(args.baseline)
    if args.config:
        cfg, _ = _load(args)
        return spectral.stationary_value(cfg)
    return envelope_analysis.late_window_mean(series)


def cmd_envelope(args) -> None:
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file not found: {src}")
    _, cols, data = files.read_csv(src)
    if len(cols) < 2 or data.shape[0] < 3:
        raise UsageError(f"{src} needs a time column and a value column")
    col = cols.index(args.column) if args.column else 1
    series = TimeSeries(data[:, 0], data[:, col], method=cols[col])
    env = envelope_analysis.extract_envelope(series, _baseline(args, series))
    window = _floats(args.window, 2, "--window") if args.window else None
    fit = envelope_analysis.FITTERS[args.model](env, window).as_dict()
    if args.timescales:
        fit["timescales"] = files.read_timescales(args.timescales)
    if args.json:
        text = json.dumps({k: files._num(v) for k, v in fit.items()}, indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(f"{k} = {v}\n" for k, v in fit.items())
    _emit(text, args.out)


def cmd_compare(args) -> None:
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    cfg, raw = _load(args)
    series = [run_method(cfg, m) for m in methods]
    ref = series[0].values
    gaps = {m: float(np.max(np.abs(s.values - ref))) for m, s in zip(methods, series)}
    meta = {"command": "compare", "method": ",".join(methods),
            "digest": files.digest("compare", methods, raw, __version__)}
    meta.update({f"sup_gap[{m}]": files.fmt(g) for m, g in gaps.items()})
    rows = zip(cfg.times, *(s.values for s in series))
    _emit(files.format_csv(["t", *methods], rows, meta), args.out)
    for m, g in gaps.items():
        print(f"sup |{m} - {methods[0]}| = {g:.6g}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gatekeeper", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gatekeeper {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("evolve", help="write <X(t)> as CSV")
    e.add_argument("--config", required=True)
    e.add_argument("--method", choices=METHODS, default="spectral")
    e.add_argument("--out")
    e.set_defaults(func=cmd_evolve)

    w = sub.add_parser("wigner", help="write Wigner snapshots")
    w.add_argument("--config", required=True)
    w.add_argument("--times", required=True, help="T1,T2,...")
    w.add_argument("--grid", help="NX,NP")
    w.add_argument("--out", help="output path; '{t}' is replaced by the time")
    w.set_defaults(func=cmd_wigner)

    t = sub.add_parser("timescales", help="print the decoherence time scales")
    t.add_argument("--config", required=True)
    t.add_argument("--json", action="store_true")
    t.add_argument("--out")
    t.set_defaults(func=cmd_timescales)

    v = sub.add_parser("envelope", help="fit a decay law to a CSV series")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--model", choices=sorted(envelope_analysis.FITTERS), default="powerlaw")
    v.add_argument("--window", help="T_LO,T_HI")
    v.add_argument("--baseline", type=float)
    v.add_argument("--config", help="take the baseline from the spectral stationary value")
    v.add_argument("--column", help="value column (default: the second)")
    v.add_argument("--timescales", help="timescales JSON to attach to the report")
    v.add_argument("--json", action="store_true")
    v.add_argument("--out")
    v.set_defaults(func=cmd_envelope)

    c = sub.add_parser("compare", help="tabulate several methods side by side")
    c.add_argument("--config", required=True)
    c.add_argument("--method", required=True, help="comma-separated method names")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except UsageError as exc:
        print(f"gatekeeper: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.ConfigError as exc:
        print(f"gatekeeper: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except errors.NumericalError as exc:
        print(f"gatekeeper: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"gatekeeper: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
