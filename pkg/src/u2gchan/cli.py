"""Batch front-end: ``u2gchan --config scenario.toml --emit all``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 geometry
error during generation, 4 output directory not writable.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, io
from .channel import ChannelGenerator, ensemble_window
from .config import load_config
from .errors import ConfigurationError, DegenerateGeometryError, DomainError, GeometryError
from .rng import ensemble_seed
from .stats import METRICS, compute_report

EMIT_CHOICES = ("cir", "pl", "stats", "all")
EXIT_OK, EXIT_CONFIG, EXIT_GEOMETRY, EXIT_OUTPUT = 0, 2, 3, 4


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    versions: dict
    files: List[dict] = field(default_factory=list)
    wall_clock_s: float = 0.0


class OutputError(OSError):
    pass


def _versions():
    import scipy

    return {"u2gchan": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def run_simulation(config_path: Optional[str], output_dir: str, emit: Sequence[str] = ("all",),
                   seed: Optional[int] = None, metrics: Optional[Sequence[str]] = None,
                   ensemble: int = 50, duration: Optional[float] = None, binary: bool = False,
                   log=None) -> RunManifest:
    """Load, generate and write the selected artifacts; see module docstring."""
    t_start = time.perf_counter()
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if duration is not None:
        overrides["duration_s"] = duration
    if config_path is None:
        from .config import config_from_dict, default_config_text, tomllib

        cfg = config_from_dict(tomllib.loads(default_config_text()), overrides)
    else:
        cfg = load_config(config_path, overrides)
    emit = set(emit)
    if "all" in emit:
        emit = {"cir", "pl", "stats"}
    metrics = tuple(cfg.stats.metrics if metrics is None else metrics)
    if "stats" in emit:
        bad = set(metrics) - set(METRICS)
        if not metrics or bad:
            raise ConfigurationError(f"valid metric names: {', '.join(METRICS)}", field="--stats")
    if ensemble < 1:
        raise ConfigurationError("must be >= 1", field="--ensemble")

    try:
        os.makedirs(output_dir, exist_ok=True)
        if not os.access(output_dir, os.W_OK):
            raise OutputError(f"output directory {output_dir!r} is not writable")
    except OSError as exc:
        raise OutputError(str(exc)) from None

    say = log or (lambda msg: None)
    if "pl" in emit and not cfg.large_scale_in_cir:
        # the profile needs the large-scale pass
        cfg = cfg.with_updates(large_scale_in_cir=True)
    gen = ChannelGenerator(cfg)
    say(f"generating {cfg.duration} s at {cfg.sample_rate} Hz, seed {cfg.seed}")
    real = gen.run(frame_stride=cfg.cir_frame_stride if "cir" in emit else 0)

    written = []
    try:
        if "cir" in emit:
            path = os.path.join(output_dir, "cir.csv")
            io.write_cir_csv(path, real.frames)
            written.append(path)
            if binary:
                path = os.path.join(output_dir, "cir.bin")
                io.write_cir_binary(path, real.frames)
                written.append(path)
        if "pl" in emit:
            path = os.path.join(output_dir, "pl_profile.csv")
            io.write_pl_profile(path, real)
            written.append(path)
        if "stats" in emit:
            acf_ens = None
            if "acf" in metrics:
                n = int(round(cfg.stats.acf_max_lag * cfg.sample_rate)) + 1
                t0 = cfg.stats.acf_time
                n = min(n, cfg.n_samples - int(round(t0 * cfg.sample_rate)))
                seeds = [ensemble_seed(cfg.seed, m) for m in range(ensemble)]
                say(f"ACF ensemble of {ensemble} seeds")
                acf_ens = ensemble_window(cfg, seeds, t0, n)
            report = compute_report(real, cfg.stats, acf_ens, metrics=metrics)
            written += io.write_stats(os.path.join(output_dir, "stats"), report)
    except OSError as exc:
        raise OutputError(str(exc)) from None

    manifest = RunManifest(cfg.digest(), cfg.seed, _versions())
    for path in written:
        manifest.files.append({"path": os.path.relpath(path, output_dir), "sha256": io.sha256_file(path)})
    manifest.wall_clock_s = time.perf_counter() - t_start
    try:
        with open(os.path.join(output_dir, "manifest.json"), "w") as fh:
            json.dump(asdict(manifest), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(str(exc)) from None
    return manifest


def build_parser():
    ap = argparse.ArgumentParser(prog="u2gchan", description="Non-stationary UAV-to-ground MIMO channel simulator")
    ap.add_argument("--config", help="scenario TOML file (default: bundled scenario)")
    ap.add_argument("--seed", type=int, help="master seed, overrides the config")
    ap.add_argument("--output-dir", default="u2g_out")
    ap.add_argument("--emit", nargs="+", choices=EMIT_CHOICES, default=["all"])
    ap.add_argument("--stats", dest="metrics", type=lambda s: [m for m in s.split(",") if m],
                    help=f"comma-separated metrics from {','.join(METRICS)}")
    ap.add_argument("--ensemble", type=int, default=50, help="seeds for the ACF expectation")
    ap.add_argument("--duration", type=float, help="override the run length in seconds")
    ap.add_argument("--binary", action="store_true", help="also write cir.bin")
    ap.add_argument("--print-default-config", action="store_true")
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_default_config:
        from .config import default_config_text

        sys.stdout.write(default_config_text())
        return EXIT_OK
    log = None if args.quiet else (lambda m: print(m, file=sys.stderr))
    try:
        man = run_simulation(args.config, args.output_dir, args.emit, args.seed, args.metrics,
                             args.ensemble, args.duration, args.binary, log)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeometryError, DegenerateGeometryError) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (FileNotFoundError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if log:
        log(f"wrote {len(man.files)} files in {man.wall_clock_s:.1f} s")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
