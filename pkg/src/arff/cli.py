"""Command-line entry point for the benchmark experiments.

Machine-readable results go to ``--out`` (CSV); progress and acceptance rates
are logged to stderr.  Exit codes: 0 success, 2 usage, 3 config validation,
4 data I/O, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import data_io, experiments
from .errors import (
    BadMagicError,
    ConfigParseError,
    ConfigValidationError,
    CountMismatchError,
    DivergedLossError,
    NonFiniteAmplitudeError,
    SingularSystemError,
    TruncatedFileError,
)

USAGE_EXIT = 2
CONFIG_EXIT = 3
DATA_EXIT = 4
NUMERICAL_EXIT = 5


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _add_common(parser: argparse.ArgumentParser, need_out: bool) -> None:
    parser.add_argument("--config", type=Path, help="experiment config file")
    parser.add_argument("--out", type=Path, required=need_out, help="output CSV path")
    parser.add_argument("--seed", type=int, help="override the base seed")
    parser.add_argument("--replicas", type=int, help="override the replica count")
    parser.add_argument("--threads", type=int, default=1, help="size of the worker pool")
    parser.add_argument(
        "--timing",
        action="store_true",
        help="record real wall times in the CSV (breaks byte-reproducibility)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arff",
        description="Train and benchmark adaptively sampled random Fourier feature models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-case", help="run one benchmark case across methods and K")
    run.add_argument("case", type=int, choices=(1, 2, 3, 4))
    _add_common(run, need_out=True)
    run.add_argument("--k-grid", help="feature grid, e.g. '2..256' or '2,8,32'")
    run.add_argument("--method", choices=data_io.METHODS, help="run only this method")
    run.add_argument("--data-dir", type=Path, help="MNIST directory (default $ARFF_DATA_DIR)")

    sweep = sub.add_parser("sweep-sigma", help="sweep the fixed frequency std on noisy data")
    _add_common(sweep, need_out=True)
    sweep.add_argument("--sigmas", help="comma list of frequency stds, e.g. '0.25,0.5,1,2,4'")
    sweep.add_argument("--n-train", type=int, help="override the training-set size")

    single = sub.add_parser("train", help="one ad-hoc training run")
    single.add_argument("case", type=int, choices=(1, 2, 3, 4))
    single.add_argument("--method", required=True, choices=data_io.METHODS)
    single.add_argument("--k", required=True, type=int)
    single.add_argument("--replica", type=int, default=0)
    _add_common(single, need_out=False)
    single.add_argument("--data-dir", type=Path, help="MNIST directory (default $ARFF_DATA_DIR)")

    check = sub.add_parser("validate-config", help="parse and validate a config file")
    check.add_argument("--config", type=Path, required=True)
    check.add_argument("--case", type=int, help="case to assume when the file omits it")
    return parser


def _load_cfg(args, case: int | None) -> data_io.ExperimentConfig:
    if getattr(args, "config", None) is not None:
        cfg = data_io.load_config(args.config, case=case)
    else:
        cfg = data_io.default_config(case if case is not None else 0)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "replicas", None) is not None:
        cfg = replace(cfg, replicas=args.replicas)
    if getattr(args, "k_grid", None):
        cfg = replace(cfg, k_grid=data_io.parse_k_grid(args.k_grid))
    if getattr(args, "method", None):
        cfg = replace(cfg, methods=(args.method,))
    return cfg.validate()


def _resolve_out(path: Path | None) -> None:
    if path is not None and not path.resolve().parent.is_dir():
        raise ConfigValidationError("out", f"parent directory of {path} does not exist")


def _load_mnist_pair(args) -> tuple:
    data_dir = getattr(args, "data_dir", None) or os.environ.get("ARFF_DATA_DIR")
    if not data_dir:
        raise FileNotFoundError(
            "MNIST directory not given: pass --data-dir or set ARFF_DATA_DIR"
        )
    data_dir = Path(data_dir)
    train = data_io.load_mnist(
        data_dir / "train-images-idx3-ubyte", data_dir / "train-labels-idx1-ubyte"
    )
    test = data_io.load_mnist(
        data_dir / "t10k-images-idx3-ubyte", data_dir / "t10k-labels-idx1-ubyte"
    )
    return train, test


def _cmd_run_case(args) -> int:
    cfg = _load_cfg(args, args.case)
    _resolve_out(args.out)
    log = None if args.quiet else _log
    mnist = _load_mnist_pair(args) if args.case == 4 else None
    if args.case == 3:
        rows = experiments.run_case3(cfg, threads=args.threads, timing=args.timing, log=log)
    else:
        rows = experiments.sweep_k(
            cfg, mnist=mnist, threads=args.threads, timing=args.timing, log=log
        )
    data_io.write_results(rows, args.out)
    if log:
        log(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_sweep_sigma(args) -> int:
    cfg = _load_cfg(args, 0)
    if args.n_train is not None:
        cfg = replace(cfg, n_train=args.n_train).validate()
    _resolve_out(args.out)
    sigmas = cfg.sigma_grid
    if args.sigmas:
        try:
            sigmas = tuple(float(tok) for tok in args.sigmas.split(",") if tok.strip())
        except ValueError:
            raise ConfigValidationError("sigmas", f"bad list {args.sigmas!r}")
    log = None if args.quiet else _log
    rows = experiments.sweep_sigma_omega(
        sigmas, cfg, threads=args.threads, timing=args.timing, log=log
    )
    data_io.write_results(rows, args.out)
    if log:
        log(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_cfg(args, args.case)
    _resolve_out(args.out)
    mnist = _load_mnist_pair(args) if args.case == 4 else None
    row = experiments.run_single(
        cfg, args.method, args.k, replica=args.replica, mnist=mnist, timing=args.timing
    )
    if args.out is not None:
        data_io.write_results([row], args.out)
    else:
        print(data_io.RESULT_HEADER)
        print(
            f"{row.case},{row.method},{row.k},{row.replica},"
            f"{row.error:.10g},{row.wall_seconds:.10g},{row.acceptance_rate:.10g},{row.seed}"
        )
    if not args.quiet:
        _log(f"error={row.error:.6g} acceptance={row.acceptance_rate:.3f} seed={row.seed}")
    return 0


def _cmd_validate_config(args) -> int:
    cfg = data_io.load_config(args.config, case=args.case)
    print(f"OK: case {cfg.case}, methods {','.join(cfg.methods)}, K grid {list(cfg.k_grid)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    commands = {
        "run-case": _cmd_run_case,
        "sweep-sigma": _cmd_sweep_sigma,
        "train": _cmd_train,
        "validate-config": _cmd_validate_config,
    }
    try:
        return commands[args.command](args)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"arff: config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except (BadMagicError, TruncatedFileError, CountMismatchError, OSError) as exc:
        print(f"arff: data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (SingularSystemError, NonFiniteAmplitudeError, DivergedLossError) as exc:
        print(f"arff: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
