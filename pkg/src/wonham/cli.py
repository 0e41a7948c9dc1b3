"""Command-line entry point.

Subcommands: ``showcase`` (single-realisation display CSVs), ``sweep``
(the (gamma, C) measurement grid), ``validate`` (named invariant suite),
``spikes`` (limiting spike-process draws).  Exit status: 0 on success, 2 when
validation fails, 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import WonhamError
from .experiments import (
    DEFAULT_CONFIG,
    DEFAULT_CVALUES,
    run_showcase,
    run_spikes,
    run_sweep,
    run_validate,
    version_string,
    write_sweep_csv,
)


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {text}") from exc


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file (defaults built in)")
    sub.add_argument("--seed", type=int, help="override the root seed")
    sub.add_argument("--out", default="out", help="output directory (default: ./out)")
    sub.add_argument("--replicas", type=int, help="override the replica count")
    sub.add_argument("--gamma", type=_floats, help="gamma value(s), comma separated")
    sub.add_argument(
        "--cvalues",
        type=_floats,
        help=f"lag coefficients C, comma separated (default {','.join(map(str, DEFAULT_CVALUES))})",
    )
    sub.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wonham",
        description="Two-state Wonham filter at strong noise: spikes and fixed-lag smoothing.",
    )
    parser.add_argument("--version", action="version", version=f"wonham {version_string()}")
    subs = parser.add_subparsers(dest="command", required=True)

    sc = subs.add_parser("showcase", help="single-realisation CSVs (observation, filter, smoothed)")
    _add_common(sc)
    sc.add_argument("--stride", type=int, default=1, help="keep every k-th grid row")

    sw = subs.add_parser("sweep", help="(gamma, C) grid: error probability and graph geometry")
    _add_common(sw)
    sw.add_argument("--geom-replicas", type=int, help="geometry replicas per cell (default replicas/4)")
    sw.add_argument("--error-t", type=float, help="conditioning horizon for the error probability")
    sw.add_argument("--no-hausdorff", action="store_true", help="skip the Hausdorff column")

    va = subs.add_parser("validate", help="run the named invariant suite")
    _add_common(va)

    sp = subs.add_parser("spikes", help="sample the limiting spike process")
    _add_common(sp)
    sp.add_argument("--epsilon-min", type=float, default=0.01, help="spike truncation level")
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config) if args.config else DEFAULT_CONFIG
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.replicas is not None:
        config = config.replace(replicas=args.replicas)
    if args.gamma is not None and args.command != "sweep":
        if len(args.gamma) != 1:
            raise WonhamError(f"{args.command} takes a single --gamma value")
        config = config.replace(gamma=args.gamma[0])
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        cvalues = tuple(args.cvalues) if args.cvalues else DEFAULT_CVALUES

        if args.command == "showcase":
            run_showcase(config, args.out, cvalues=cvalues, stride=args.stride)
            return 0

        if args.command == "sweep":
            gammas = args.gamma if args.gamma else [config.gamma]
            cells = run_sweep(
                config,
                gammas,
                cvalues,
                replicas_error=args.replicas,
                replicas_geometry=args.geom_replicas,
                error_t=args.error_t,
                threads=args.threads,
                with_hausdorff=not args.no_hausdorff,
            )
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = write_sweep_csv(out / "sweep.csv", config, cells)
            print(f"wrote {path}", file=sys.stderr)
            if any(c.status != "ok" for c in cells):
                return 2
            return 0

        if args.command == "validate":
            checks = run_validate(seed=config.seed)
            width = max(len(c.name) for c in checks)
            ok = True
            for c in checks:
                print(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL'}  {c.detail}")
                ok &= c.passed
            return 0 if ok else 2

        if args.command == "spikes":
            run_spikes(config, args.out, epsilon_min=args.epsilon_min, n_samples=args.replicas)
            return 0

        raise WonhamError(f"unknown command {args.command}")
    except (WonhamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
