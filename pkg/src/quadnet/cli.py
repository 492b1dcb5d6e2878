"""Command-line front end: ``quadnet validate|run|budget <config>``.

Exit codes: 0 success (individual failed points are flagged in the
``status`` column), 1 run errors (carrier solve failed, every point
failed, output not writable), 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .detection import compute_spectra, noise_extremes
from .report import fmt, plot_spectra, write_csv
from .solver import SolverError, solve_dc
from .topology import TopologyError

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2


def _spectra(cfg: RunConfig, keep_transfers=False):
    net = cfg.network
    try:
        net.check(require_sources=True)
    except TopologyError as exc:
        raise ConfigError("topology", str(exc), diagnostics=exc.diagnostics) from None
    dc = solve_dc(net)
    spec = compute_spectra(net, cfg.freqs, cfg.detection, dc, cfg.noise, cfg.workers, keep_transfers)
    return dc, spec


def _metadata(cfg: RunConfig, spec, mode: str) -> dict:
    return {
        "tool": f"quadnet {__version__}",
        "mode": mode,
        "config_sha256": cfg.digest(),
        "detector": cfg.detection.detector,
        "zeta_rad": fmt(spec.zeta),
        "points": f"{len(spec.freq)} ({int(spec.ok.sum())} ok)",
    }


def run_columns(cfg: RunConfig):
    """Columns and metadata of the ``run`` CSV."""
    dc, spec = _spectra(cfg, keep_transfers=cfg.zeta_sweep)
    cols = [
        ("frequency", "Hz", spec.freq),
        ("nq2", "vac", spec.nq2),
        ("nl2", "vac", spec.nl2),
        ("h_abs", "vac/strain", np.abs(spec.h_transfer)),
        ("s_h", "1/Hz", spec.s_h),
    ]
    if cfg.zeta_sweep:
        ext = np.full((len(spec.freq), 3), np.nan)
        for i, ts in enumerate(spec.transfers):
            if ts:
                ext[i] = noise_extremes(ts, cfg.detection.detector)
        cols += [("nq2_min", "vac", ext[:, 0]), ("nq2_max", "vac", ext[:, 1]), ("zeta_at_min", "rad", ext[:, 2])]
    cols.append(("status", "", spec.status))
    return cols, _metadata(cfg, spec, "run"), spec


def budget_columns(cfg: RunConfig):
    """Per-source split: dark-port vs loss vacuum, laser amplitude vs phase noise."""
    dc, spec = _spectra(cfg)
    cols = [
        ("frequency", "Hz", spec.freq),
        ("nq2_darkport", "vac", spec.nq2_darkport),
        ("nq2_losses", "vac", spec.nq2_losses),
        ("nl2_amplitude", "vac", spec.nl2_amplitude),
        ("nl2_phase", "vac", spec.nl2_phase),
        ("nq2", "vac", spec.nq2),
        ("nl2", "vac", spec.nl2),
        ("h_abs", "vac/strain", np.abs(spec.h_transfer)),
        ("s_h", "1/Hz", spec.s_h),
        ("status", "", spec.status),
    ]
    return cols, _metadata(cfg, spec, "budget"), spec


def _report_config_error(exc: ConfigError, as_json: bool):
    if as_json:
        print(json.dumps(exc.to_dict(), indent=2))
        return
    print(f"error: {exc}", file=sys.stderr)
    for d in exc.diagnostics:
        print(f"  {d}", file=sys.stderr)


def _write(cols, meta, out):
    if out in (None, "-"):
        write_csv(sys.stdout, cols, meta)
        return
    with open(out, "w", encoding="utf-8", newline="") as f:
        write_csv(f, cols, meta)


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _report_config_error(exc, args.json)
        return EXIT_CONFIG
    net = cfg.network
    info = {
        "ok": True,
        "elements": len(net.elements),
        "fields": len(net.enumerate_fields()),
        "movable": net.movable,
        "lasers": net.lasers,
        "detectors": net.detectors,
        "points": len(cfg.freqs),
    }
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        print(f"ok: {info['elements']} elements, {info['fields']} fields, {len(info['movable'])} movable, {info['points']} frequency points")
    return EXIT_OK


def _cmd_spectra(args, build) -> int:
    try:
        cfg = load_config(args.config)
        if args.workers:
            cfg.workers = args.workers
        cols, meta, spec = build(cfg)
    except ConfigError as exc:
        _report_config_error(exc, False)
        return EXIT_CONFIG
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN
    try:
        _write(cols, meta, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
        return EXIT_RUN
    failed = [s for s in spec.status if s != "ok"]
    for s in dict.fromkeys(failed):
        print(f"warning: {failed.count(s)} point(s) flagged: {s}", file=sys.stderr)
    if args.plot:
        curves = {n: v for n, u, v in cols if u == "vac"}
        plot_spectra(args.plot, spec.freq, curves, title=cfg.description)
    return EXIT_RUN if len(failed) == len(spec.status) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadnet", description="Frequency-domain quantum-noise spectra of interferometers.")
    p.add_argument("--version", action="version", version=f"quadnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a configuration without running it")
    v.add_argument("config")
    v.add_argument("--json", action="store_true", help="machine-readable result or diagnostics")
    v.set_defaults(func=cmd_validate)

    for name, build, text in (
        ("run", run_columns, "compute spectra and write a CSV"),
        ("budget", budget_columns, "write the per-source noise budget"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("-o", "--output", default="-", help="CSV path ('-' for stdout)")
        s.add_argument("--workers", type=int, default=None, help="parallel frequency points")
        s.add_argument("--plot", metavar="PNG", default=None, help="also save a log-log plot (needs matplotlib)")
        s.set_defaults(func=lambda a, b=build: _cmd_spectra(a, b))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
