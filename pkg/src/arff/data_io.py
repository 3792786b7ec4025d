"""MNIST IDX ingestion, experiment configuration files, result persistence.

Config files are flat ``key = value`` text with one ``[section]`` per training
method; omitted keys fall back to the benchmark defaults for the chosen case
(see :func:`default_config`).  Results are written as CSV with a fixed header
and a deterministic row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Dataset
from .errors import (
    BadMagicError,
    ConfigParseError,
    ConfigValidationError,
    CountMismatchError,
    TruncatedFileError,
)

IMAGES_MAGIC = 2051  # 0x00000803: unsigned-byte tensor, 3 dims
LABELS_MAGIC = 2049  # 0x00000801: unsigned-byte tensor, 1 dim

METHODS = ("arff", "arff_adaptive_cov", "fixed_rff", "sgd", "arff_sigmoid")
SAMPLER_METHODS = ("arff", "arff_adaptive_cov", "arff_sigmoid")

#: input dimension of each benchmark case
CASE_DIMS = {1: 1, 2: 5, 3: 2, 4: 784}


# --------------------------------------------------------------------------- IDX


@dataclass(frozen=True)
class IdxHeader:
    magic: int
    dims: tuple[int, ...]


def read_idx(path) -> tuple[IdxHeader, np.ndarray]:
    """Read a big-endian IDX file of unsigned bytes."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: shorter than the 4-byte magic")
    magic = int.from_bytes(raw[:4], "big")
    if magic not in (IMAGES_MAGIC, LABELS_MAGIC):
        raise BadMagicError(f"{path}: magic {magic}, expected 2051 (images) or 2049 (labels)")
    ndims = raw[3]
    header_len = 4 + 4 * ndims
    if len(raw) < header_len:
        raise TruncatedFileError(f"{path}: header needs {header_len} bytes, file has {len(raw)}")
    dims = tuple(
        int.from_bytes(raw[4 + 4 * i : 8 + 4 * i], "big") for i in range(ndims)
    )
    count = math.prod(dims)
    if len(raw) != header_len + count:
        raise TruncatedFileError(
            f"{path}: payload is {len(raw) - header_len} bytes, dims {dims} need {count}"
        )
    data = np.frombuffer(raw, dtype=np.uint8, offset=header_len).reshape(dims)
    return IdxHeader(magic, dims), data


def write_idx(path, array: np.ndarray) -> None:
    """Write an unsigned-byte tensor in IDX format (inverse of :func:`read_idx`)."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = IMAGES_MAGIC if array.ndim == 3 else LABELS_MAGIC
    with open(path, "wb") as fh:
        fh.write(magic.to_bytes(4, "big"))
        for dim in array.shape:
            fh.write(int(dim).to_bytes(4, "big"))
        fh.write(array.tobytes())


def load_mnist(images_path, labels_path) -> Dataset:
    """Load image/label IDX files into a Dataset with one-hot label rows.

    Pixels stay at their raw 0..255 values (cast to float); the usual training
    pipeline normalizes them afterwards like any other data.
    """
    img_header, images = read_idx(images_path)
    if img_header.magic != IMAGES_MAGIC:
        raise BadMagicError(f"{images_path}: expected an images file (magic 2051)")
    lab_header, labels = read_idx(labels_path)
    if lab_header.magic != LABELS_MAGIC:
        raise BadMagicError(f"{labels_path}: expected a labels file (magic 2049)")
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(
            f"{images.shape[0]} images vs {labels.shape[0]} labels"
        )
    n = images.shape[0]
    x = images.reshape(n, -1).astype(np.float64)
    if labels.max(initial=0) > 9:
        raise ValueError("labels contain digits outside 0..9")
    y = np.zeros((n, 10))
    y[np.arange(n), labels] = 1.0
    return Dataset(x, y)


# ------------------------------------------------------------------- configuration


@dataclass(frozen=True)
class SamplerSettings:
    """Per-method sampler hyperparameters; K and seed are supplied per run."""

    iterations: int
    step_size: float
    exponent: float
    ridge: float
    refresh_every: int
    burn_in: Optional[int] = None  # adaptive-covariance variant only
    max_radius: float = math.inf


@dataclass(frozen=True)
class FixedRffSettings:
    freq_std: float
    ridge: float


@dataclass(frozen=True)
class SgdSettings:
    learning_rate: float
    iterations: int
    batch_size: int
    init_std: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one benchmark sweep."""

    case: int
    methods: tuple[str, ...]
    k_grid: tuple[int, ...]
    n_train: int
    n_test: int
    replicas: int
    seed: int
    arff: Optional[SamplerSettings] = None
    arff_adaptive_cov: Optional[SamplerSettings] = None
    fixed_rff: Optional[FixedRffSettings] = None
    sgd: Optional[SgdSettings] = None
    arff_sigmoid: Optional[SamplerSettings] = None
    sigma_grid: tuple[float, ...] = ()
    sweep_dim: int = 7
    noise_std: float = 0.0

    def settings_for(self, method: str):
        if method not in METHODS:
            raise ConfigValidationError("methods", f"unknown method {method!r}")
        return getattr(self, method)

    def validate(self) -> "ExperimentConfig":
        if self.case not in (0, 1, 2, 3, 4):
            raise ConfigValidationError("case", f"must be 0..4, got {self.case}")
        if not self.methods:
            raise ConfigValidationError("methods", "at least one method required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigValidationError("methods", f"unknown method {m!r}")
            if self.settings_for(m) is None:
                raise ConfigValidationError(m, "method listed but has no settings")
        if not self.k_grid or any(k < 1 for k in self.k_grid):
            raise ConfigValidationError("k_grid", "need positive feature counts")
        if self.n_train < 2:
            raise ConfigValidationError("n_train", "need at least 2 training points")
        if self.n_test < 1:
            raise ConfigValidationError("n_test", "need at least 1 test point")
        if self.replicas < 1:
            raise ConfigValidationError("replicas", "need at least 1 replica")
        for name in SAMPLER_METHODS:
            s = getattr(self, name)
            if s is None:
                continue
            if s.iterations < 1:
                raise ConfigValidationError(f"{name}.iterations", "must be >= 1")
            if not s.step_size > 0:
                raise ConfigValidationError(f"{name}.step_size", "must be > 0")
            if not s.exponent > 0:
                raise ConfigValidationError(f"{name}.exponent", "must be > 0")
            if s.ridge < 0:
                raise ConfigValidationError(f"{name}.ridge", "must be >= 0")
            if s.refresh_every < 1:
                raise ConfigValidationError(f"{name}.refresh_every", "must be >= 1")
        adaptive = self.arff_adaptive_cov
        if adaptive is not None and "arff_adaptive_cov" in self.methods:
            if adaptive.burn_in is None:
                raise ConfigValidationError("arff_adaptive_cov.burn_in", "required")
            if adaptive.burn_in >= adaptive.iterations:
                raise ConfigValidationError(
                    "arff_adaptive_cov.burn_in",
                    f"burn_in {adaptive.burn_in} must be < iterations {adaptive.iterations}",
                )
            if not adaptive.max_radius > 0:
                raise ConfigValidationError("arff_adaptive_cov.max_radius", "must be > 0")
        if any(s <= 0 for s in self.sigma_grid):
            raise ConfigValidationError("sigma_grid", "standard deviations must be > 0")
        if self.sweep_dim < 1:
            raise ConfigValidationError("sweep_dim", "must be >= 1")
        if self.noise_std < 0:
            raise ConfigValidationError("noise_std", "must be >= 0")
        return self


def _powers_of_two(lo: int, hi: int) -> tuple[int, ...]:
    grid = []
    k = lo
    while k <= hi:
        grid.append(k)
        k *= 2
    return tuple(grid)


def default_config(case: int, seed: int = 0) -> ExperimentConfig:
    """Benchmark defaults for the given case: step 2.4^2/d, exponent 3d-2, ridge 0.1."""
    if case == 0:
        return default_sweep_config(seed)
    if case not in CASE_DIMS:
        raise ConfigValidationError("case", f"must be 1..4, got {case}")
    d = CASE_DIMS[case]
    step = 2.4**2 / d
    exponent = 3 * d - 2
    if case == 1:
        return ExperimentConfig(
            case=1,
            methods=("arff", "arff_adaptive_cov", "fixed_rff", "sgd", "arff_sigmoid"),
            k_grid=_powers_of_two(2, 2048),
            n_train=10_000,
            n_test=10_000,
            replicas=10,
            seed=seed,
            arff=SamplerSettings(1000, step, exponent, 0.1, 10),
            arff_adaptive_cov=SamplerSettings(
                5000, 0.1, exponent, 0.1, 50, burn_in=500, max_radius=math.inf
            ),
            fixed_rff=FixedRffSettings(freq_std=1.0, ridge=0.1),
            sgd=SgdSettings(learning_rate=1.5e-4, iterations=10_000_000, batch_size=1, init_std=1.0),
            arff_sigmoid=SamplerSettings(10_000, step, exponent, 0.1, 100),
        )
    if case == 2:
        return ExperimentConfig(
            case=2,
            methods=("arff", "fixed_rff", "sgd"),
            k_grid=_powers_of_two(2, 1024),
            n_train=10_000,
            n_test=10_000,
            replicas=10,
            seed=seed,
            arff=SamplerSettings(2500, 2.4**2 / (10 * d), exponent, 0.1, 25),
            fixed_rff=FixedRffSettings(freq_std=1.0, ridge=0.1),
            sgd=SgdSettings(learning_rate=3.0e-4, iterations=10_000_000, batch_size=1, init_std=1.0),
        )
    if case == 3:
        return ExperimentConfig(
            case=3,
            methods=("arff", "arff_adaptive_cov", "sgd"),
            k_grid=(256,),
            n_train=10_000,
            n_test=10_000,
            replicas=1,
            seed=seed,
            arff=SamplerSettings(10_000, 0.5, exponent, 0.1, 100),
            arff_adaptive_cov=SamplerSettings(
                10_000, 0.1, exponent, 0.1, 100, burn_in=1000, max_radius=math.inf
            ),
            sgd=SgdSettings(learning_rate=1.5e-3, iterations=30_000_000, batch_size=1, init_std=1.0),
        )
    # case 4: MNIST; the single final amplitude refresh (refresh_every = M + 1)
    return ExperimentConfig(
        case=4,
        methods=("arff", "fixed_rff"),
        k_grid=_powers_of_two(2, 8192),
        n_train=60_000,
        n_test=10_000,
        replicas=1,
        seed=seed,
        arff=SamplerSettings(100, 0.1, exponent, 0.1, 101),
        fixed_rff=FixedRffSettings(freq_std=0.1, ridge=0.1),
    )


def default_sweep_config(seed: int = 0) -> ExperimentConfig:
    """Defaults for the frequency-std sweep: Gaussian target in 7 dims, noisy labels."""
    return ExperimentConfig(
        case=0,
        methods=("fixed_rff",),
        k_grid=(500,),
        n_train=100_000,
        n_test=10_000,
        replicas=10,
        seed=seed,
        fixed_rff=FixedRffSettings(freq_std=1.0, ridge=0.01),
        sigma_grid=(0.25, 0.5, 1.0, 2.0, 4.0),
        sweep_dim=7,
        noise_std=0.1,
    )


def parse_k_grid(spec: str) -> tuple[int, ...]:
    """Parse '2..2048 geometric' (doubling), '2..256', or '2,4,8' grids."""
    spec = spec.strip()
    if ".." in spec:
        body = spec.removesuffix("geometric").strip()
        lo_s, _, hi_s = body.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise ConfigValidationError("k_grid", f"bad range {spec!r}") from exc
        if lo < 1 or hi < lo:
            raise ConfigValidationError("k_grid", f"bad range {spec!r}")
        return _powers_of_two(lo, hi)
    try:
        grid = tuple(int(tok) for tok in spec.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigValidationError("k_grid", f"bad list {spec!r}") from exc
    if not grid:
        raise ConfigValidationError("k_grid", "empty grid")
    return grid


def _parse_sections(text: str):
    """Split key=value text into (global dict, {section: dict}); '#' starts a comment."""
    top: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {}
    current = top
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigParseError(lineno, "empty section name")
            current = sections.setdefault(name, {})
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigParseError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        if not key:
            raise ConfigParseError(lineno, "empty key")
        current[key] = value.strip()
    return top, sections


def _to_int(field: str, value: str) -> int:
    try:
        f = float(value)
    except ValueError as exc:
        raise ConfigValidationError(field, f"not a number: {value!r}") from exc
    if f != int(f):
        raise ConfigValidationError(field, f"expected an integer, got {value!r}")
    return int(f)


def _to_float(field: str, value: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigValidationError(field, f"not a number: {value!r}") from exc


def _sampler_from_section(name: str, sec: dict[str, str], base: SamplerSettings) -> SamplerSettings:
    known = {
        "iterations", "sampling_time", "step_size", "exponent",
        "ridge", "refresh_every", "burn_in", "max_radius",
    }
    for key in sec:
        if key not in known:
            raise ConfigValidationError(f"{name}.{key}", "unknown key")
    step = _to_float(f"{name}.step_size", sec["step_size"]) if "step_size" in sec else base.step_size
    if "iterations" in sec:
        iters = _to_int(f"{name}.iterations", sec["iterations"])
    elif "sampling_time" in sec:
        iters = int(_to_float(f"{name}.sampling_time", sec["sampling_time"]) / step**2)
    else:
        iters = base.iterations
    return SamplerSettings(
        iterations=iters,
        step_size=step,
        exponent=_to_float(f"{name}.exponent", sec["exponent"]) if "exponent" in sec else base.exponent,
        ridge=_to_float(f"{name}.ridge", sec["ridge"]) if "ridge" in sec else base.ridge,
        refresh_every=_to_int(f"{name}.refresh_every", sec["refresh_every"])
        if "refresh_every" in sec
        else base.refresh_every,
        burn_in=_to_int(f"{name}.burn_in", sec["burn_in"]) if "burn_in" in sec else base.burn_in,
        max_radius=_to_float(f"{name}.max_radius", sec["max_radius"])
        if "max_radius" in sec
        else base.max_radius,
    )


def loads_config(text: str, case: Optional[int] = None) -> ExperimentConfig:
    """Parse config text; omitted keys fall back to :func:`default_config` values."""
    top, sections = _parse_sections(text)
    if "case" in top:
        case = _to_int("case", top["case"])
    if case is None:
        raise ConfigValidationError("case", "no case given in file or arguments")
    cfg = default_config(case)

    updates: dict = {}
    for key, value in top.items():
        if key == "case":
            continue
        elif key == "methods":
            updates["methods"] = tuple(m.strip() for m in value.split(",") if m.strip())
        elif key == "k_grid":
            updates["k_grid"] = parse_k_grid(value)
        elif key in ("n_train", "n_test", "replicas", "seed", "sweep_dim"):
            updates[key] = _to_int(key, value)
        elif key == "noise_std":
            updates[key] = _to_float(key, value)
        elif key == "sigma_grid":
            try:
                updates[key] = tuple(float(tok) for tok in value.split(",") if tok.strip())
            except ValueError as exc:
                raise ConfigValidationError(key, f"bad list {value!r}") from exc
        else:
            raise ConfigValidationError(key, "unknown key")
    cfg = replace(cfg, **updates)

    d = CASE_DIMS.get(case, cfg.sweep_dim)
    fallback_sampler = SamplerSettings(1000, 2.4**2 / d, max(3 * d - 2, 1), 0.1, 10)
    sec_updates: dict = {}
    for name, sec in sections.items():
        if name in SAMPLER_METHODS:
            base = getattr(cfg, name) or fallback_sampler
            sec_updates[name] = _sampler_from_section(name, sec, base)
        elif name == "fixed_rff":
            base = cfg.fixed_rff or FixedRffSettings(freq_std=1.0, ridge=0.1)
            for key in sec:
                if key not in ("freq_std", "ridge"):
                    raise ConfigValidationError(f"fixed_rff.{key}", "unknown key")
            sec_updates[name] = FixedRffSettings(
                freq_std=_to_float("fixed_rff.freq_std", sec["freq_std"])
                if "freq_std" in sec
                else base.freq_std,
                ridge=_to_float("fixed_rff.ridge", sec["ridge"]) if "ridge" in sec else base.ridge,
            )
        elif name == "sgd":
            base = cfg.sgd or SgdSettings(learning_rate=1e-4, iterations=100_000, batch_size=1, init_std=1.0)
            for key in sec:
                if key not in ("learning_rate", "iterations", "batch_size", "init_std"):
                    raise ConfigValidationError(f"sgd.{key}", "unknown key")
            sec_updates[name] = SgdSettings(
                learning_rate=_to_float("sgd.learning_rate", sec["learning_rate"])
                if "learning_rate" in sec
                else base.learning_rate,
                iterations=_to_int("sgd.iterations", sec["iterations"])
                if "iterations" in sec
                else base.iterations,
                batch_size=_to_int("sgd.batch_size", sec["batch_size"])
                if "batch_size" in sec
                else base.batch_size,
                init_std=_to_float("sgd.init_std", sec["init_std"])
                if "init_std" in sec
                else base.init_std,
            )
        else:
            raise ConfigValidationError(name, f"unknown section [{name}]")
    cfg = replace(cfg, **sec_updates)
    return cfg.validate()


def load_config(path, case: Optional[int] = None) -> ExperimentConfig:
    """Load and validate a config file; see :func:`loads_config`."""
    return loads_config(Path(path).read_text(), case=case)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize a config so that ``loads_config(dump_config(cfg)) == cfg``."""
    lines = [
        f"case = {cfg.case}",
        f"methods = {','.join(cfg.methods)}",
        f"k_grid = {','.join(str(k) for k in cfg.k_grid)}",
        f"n_train = {cfg.n_train}",
        f"n_test = {cfg.n_test}",
        f"replicas = {cfg.replicas}",
        f"seed = {cfg.seed}",
        f"sweep_dim = {cfg.sweep_dim}",
        f"noise_std = {cfg.noise_std!r}",
    ]
    if cfg.sigma_grid:
        lines.append(f"sigma_grid = {','.join(repr(s) for s in cfg.sigma_grid)}")
    for name in SAMPLER_METHODS:
        s = getattr(cfg, name)
        if s is None:
            continue
        lines.append(f"[{name}]")
        lines.append(f"iterations = {s.iterations}")
        lines.append(f"step_size = {s.step_size!r}")
        lines.append(f"exponent = {s.exponent!r}")
        lines.append(f"ridge = {s.ridge!r}")
        lines.append(f"refresh_every = {s.refresh_every}")
        if s.burn_in is not None:
            lines.append(f"burn_in = {s.burn_in}")
        if math.isfinite(s.max_radius):
            lines.append(f"max_radius = {s.max_radius!r}")
    if cfg.fixed_rff is not None:
        lines.append("[fixed_rff]")
        lines.append(f"freq_std = {cfg.fixed_rff.freq_std!r}")
        lines.append(f"ridge = {cfg.fixed_rff.ridge!r}")
    if cfg.sgd is not None:
        lines.append("[sgd]")
        lines.append(f"learning_rate = {cfg.sgd.learning_rate!r}")
        lines.append(f"iterations = {cfg.sgd.iterations}")
        lines.append(f"batch_size = {cfg.sgd.batch_size}")
        lines.append(f"init_std = {cfg.sgd.init_std!r}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------------- results


RESULT_HEADER = "case,method,K,replica,error,wall_seconds,acceptance_rate,seed"


@dataclass(frozen=True)
class ResultRow:
    """One training run: its key, error, wall time, acceptance rate, and seed."""

    case: int
    method: str
    k: int
    replica: int
    error: float
    wall_seconds: float
    acceptance_rate: float
    seed: int

    def __post_init__(self):
        if not self.error >= 0:
            raise ValueError(f"error must be >= 0, got {self.error}")
        if "," in self.method:
            raise ValueError("method labels must not contain commas")


def _fmt(value: float) -> str:
    return format(float(value), ".10g")


def write_results(rows, path) -> None:
    """Write rows as CSV, sorted by (case, method, K, replica), 10 significant digits."""
    rows = list(rows)
    if not rows:
        raise ValueError("no result rows to write")
    rows.sort(key=lambda r: (r.case, r.method, r.k, r.replica))
    lines = [RESULT_HEADER]
    for r in rows:
        lines.append(
            f"{r.case},{r.method},{r.k},{r.replica},"
            f"{_fmt(r.error)},{_fmt(r.wall_seconds)},{_fmt(r.acceptance_rate)},{r.seed}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_results(path) -> list[ResultRow]:
    """Read back a CSV produced by :func:`write_results`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != RESULT_HEADER:
        raise ValueError(f"{path} does not look like a results file")
    out = []
    for line in lines[1:]:
        case, method, k, replica, error, wall, acc, seed = line.split(",")
        out.append(
            ResultRow(
                case=int(case),
                method=method,
                k=int(k),
                replica=int(replica),
                error=float(error),
                wall_seconds=float(wall),
                acceptance_rate=float(acc),
                seed=int(seed),
            )
        )
    return out
