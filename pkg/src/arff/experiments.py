"""Synthetic targets, the FFT spectrum oracle, metrics, and benchmark drivers.

The regression benchmarks draw inputs from a standard normal, evaluate a known
target (optionally with additive Gaussian label noise), normalize, train one of
the five methods per (K, replica) cell, and score the root-sum-square residual
on held-out data.  The classification benchmark does the same on MNIST digits
with the misclassification percentage as the score.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Literal, Optional

import numpy as np
from scipy.special import sici

from .baselines import FixedRffConfig, SgdConfig, train_fixed_rff, train_sgd
from .core import (
    Dataset,
    FourierModel,
    augment_bias,
    apply_normalization,
    build_design_matrix,
    normalize_dataset,
)
from .data_io import CASE_DIMS, ExperimentConfig, ResultRow
from .errors import DimensionMismatchError, NotOneDimensionalError
from .sampler import AdaptiveCovConfig, SamplerConfig, train

LogCallback = Callable[[str], None]

#: regularization width of the steep-ramp targets
CASE1_WIDTH = 1e-3
CASE2_WIDTH = 1e-1


def sine_integral(x):
    """Si(x) = integral_0^x sin(t)/t dt, elementwise."""
    si, _ = sici(x)
    return si


@dataclass(frozen=True)
class TargetFunction:
    """A synthetic regression target plus the label-noise level used with it."""

    kind: Literal["si_gauss_1d", "si_gauss_5d", "aniso_gauss_2d", "gauss"]
    dim: int
    width: Optional[float] = None
    noise_std: float = 0.0

    def __post_init__(self):
        expected = {"si_gauss_1d": 1, "si_gauss_5d": 5, "aniso_gauss_2d": 2}
        if self.kind in expected and self.dim != expected[self.kind]:
            raise ValueError(f"{self.kind} requires dim {expected[self.kind]}")
        if self.kind.startswith("si_") and not (self.width and self.width > 0):
            raise ValueError(f"{self.kind} requires a positive width")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")

    def __call__(self, x) -> np.ndarray:
        """Noiseless target values at rows of x (N, dim)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise DimensionMismatchError(f"expected (N, {self.dim}) inputs, got {x.shape}")
        if self.kind == "si_gauss_1d":
            x0 = x[:, 0]
            return sine_integral(x0 / self.width) * np.exp(-(x0**2) / 2.0)
        if self.kind == "si_gauss_5d":
            return sine_integral(x[:, 0] / self.width) * np.exp(-(x**2).sum(axis=1) / 2.0)
        if self.kind == "aniso_gauss_2d":
            return np.exp(-((32.0 * x[:, 0]) ** 2) / 2.0) * np.exp(-((x[:, 1] / 32.0) ** 2) / 2.0)
        return np.exp(-(x**2).sum(axis=1) / 2.0)


def case_target(case: int, noise_std: float = 0.0) -> TargetFunction:
    """The target function of benchmark case 1, 2 or 3."""
    if case == 1:
        return TargetFunction("si_gauss_1d", 1, width=CASE1_WIDTH, noise_std=noise_std)
    if case == 2:
        return TargetFunction("si_gauss_5d", 5, width=CASE2_WIDTH, noise_std=noise_std)
    if case == 3:
        return TargetFunction("aniso_gauss_2d", 2, noise_std=noise_std)
    raise ValueError(f"no synthetic target for case {case}")


def gauss_target(dim: int, noise_std: float = 0.0) -> TargetFunction:
    """exp(-|x|^2/2) in the given dimension; used by the frequency-std sweep."""
    return TargetFunction("gauss", dim, noise_std=noise_std)


def generate_dataset(target: TargetFunction, n: int, seed) -> Dataset:
    """Sample n standard-normal input rows, evaluate the target, add label noise.

    The returned data are raw; run :func:`arff.core.normalize_dataset` before
    training.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, target.dim))
    y = target(x)
    if target.noise_std > 0:
        y = y + target.noise_std * rng.standard_normal(n)
    return Dataset(x, y)


def fft_fhat_magnitude(target, num_points: int) -> tuple[np.ndarray, np.ndarray]:
    """|Fourier transform| of a 1-d target, approximated by an FFT on [-2pi, 2pi].

    The target is evaluated on ``num_points`` (a power of two) equidistributed
    points; magnitudes are scaled by the grid spacing so they approximate the
    continuous transform with the (2 pi)^{-1/2} convention.  Returns the
    frequency grid (ascending) and the magnitudes.
    """
    dim = getattr(target, "dim", 1)
    if dim != 1:
        raise NotOneDimensionalError(f"target has dim {dim}")
    if num_points < 2 or num_points & (num_points - 1):
        raise ValueError("num_points must be a power of two >= 2")
    dx = 4.0 * np.pi / num_points
    x = -2.0 * np.pi + dx * np.arange(num_points)
    f = np.asarray(target(x[:, None]), dtype=np.float64)
    spectrum = np.fft.fft(f)
    omega = 2.0 * np.pi * np.fft.fftfreq(num_points, d=dx)
    magnitude = dx * np.abs(spectrum) / np.sqrt(2.0 * np.pi)
    order = np.fft.fftshift(np.arange(num_points))
    return omega[order], magnitude[order]


def frequency_density(magnitude: np.ndarray) -> np.ndarray:
    """Normalize spectrum magnitudes on a uniform grid to a probability vector."""
    total = magnitude.sum()
    if total <= 0:
        raise ValueError("magnitudes sum to zero")
    return magnitude / total


def generalization_error(model: FourierModel, test: Dataset) -> float:
    """Root-sum-square complex residual on normalized test data (no 1/N factor)."""
    if test.dim != model.omega.shape[1]:
        raise DimensionMismatchError(
            f"test data has {test.dim} columns, model expects {model.omega.shape[1]}"
        )
    s = build_design_matrix(test.x, model.omega, model.activation)
    return float(np.linalg.norm(s @ model.beta - test.y))


@dataclass(frozen=True)
class ErrorBar:
    """Mean error over replicas with the two-sided 2-sigma interval."""

    mean: float
    std: float
    interval: tuple[float, float]
    replicas: int

    def __post_init__(self):
        if self.interval[0] > self.interval[1]:
            raise ValueError("interval endpoints out of order")
        if self.replicas < 1:
            raise ValueError("need at least one replica")


def error_bars(run: Callable[[int], float], replicas: int) -> ErrorBar:
    """Mean and sample std of ``run(i)`` over i = 0..replicas-1, interval mean +- 2 std."""
    values = np.array([float(run(i)) for i in range(replicas)])
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if replicas > 1 else 0.0
    return ErrorBar(mean, std, (mean - 2 * std, mean + 2 * std), replicas)


def classification_scores(model: FourierModel, x_raw) -> np.ndarray:
    """Per-class score moduli |sum_k beta[k, c] s(omega_k, x)| on raw inputs."""
    x = model.stats.normalize_x(x_raw)
    if model.activation == "sigmoid":
        x = augment_bias(x)
    s = build_design_matrix(x, model.omega, model.activation)
    return np.abs(s @ model.beta)


def misclassification_rate(model: FourierModel, test: Dataset) -> float:
    """Fraction of rows whose argmax score differs from the one-hot label index.

    Ties in the score moduli resolve toward the smallest class index.
    """
    y = test.y
    if y.shape[1] < 2:
        raise DimensionMismatchError("classification needs one-hot label rows")
    if not np.array_equal(y.sum(axis=1), np.ones(y.shape[0])) or not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("test labels must be one-hot rows")
    scores = classification_scores(model, test.x)
    predicted = scores.argmax(axis=1)
    truth = y.argmax(axis=1)
    return float(np.mean(predicted != truth))


# ----------------------------------------------------------------------- drivers


_METHOD_TAG = {m: i + 1 for i, m in enumerate(
    ("arff", "arff_adaptive_cov", "fixed_rff", "sgd", "arff_sigmoid")
)}


def run_seed(base_seed: int, case: int, method: str, k: int, replica: int) -> int:
    """Deterministic per-run seed, independent of scheduling order."""
    ss = np.random.SeedSequence([base_seed, case, _METHOD_TAG[method], k, replica])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _data_seed(base_seed: int, case: int, replica: int, role: int):
    return np.random.SeedSequence([base_seed, case, 1_000_003 + role, replica])


@dataclass
class _ReplicaData:
    train: Dataset
    test: Dataset
    stats: object
    train_aug: Optional[Dataset] = None  # bias-augmented views for the sigmoid runs
    test_aug: Optional[Dataset] = None

    def for_activation(self, activation: str) -> tuple[Dataset, Dataset]:
        if activation != "sigmoid":
            return self.train, self.test
        if self.train_aug is None:
            self.train_aug = Dataset(augment_bias(self.train.x), self.train.y)
            self.test_aug = Dataset(augment_bias(self.test.x), self.test.y)
        return self.train_aug, self.test_aug


def _synthetic_replica(cfg: ExperimentConfig, target: TargetFunction, replica: int) -> _ReplicaData:
    raw_train = generate_dataset(target, cfg.n_train, _data_seed(cfg.seed, cfg.case, replica, 0))
    raw_test = generate_dataset(target, cfg.n_test, _data_seed(cfg.seed, cfg.case, replica, 1))
    train_n, stats = normalize_dataset(raw_train)
    test_n = apply_normalization(raw_test, stats)
    return _ReplicaData(train_n, test_n, stats)


def _sampler_config(settings, k: int, seed: int) -> SamplerConfig:
    adaptive = None
    if settings.burn_in is not None:
        adaptive = AdaptiveCovConfig(burn_in=settings.burn_in, max_radius=settings.max_radius)
    return SamplerConfig.from_iterations(
        num_features=k,
        iterations=settings.iterations,
        step_size=settings.step_size,
        exponent=settings.exponent,
        ridge=settings.ridge,
        refresh_every=settings.refresh_every,
        seed=seed,
        adaptive_cov=adaptive,
    )


def _train_method(
    cfg: ExperimentConfig,
    method: str,
    k: int,
    seed: int,
    data: _ReplicaData,
    callback=None,
):
    """Train one method; returns (model, acceptance_rate, test dataset to score)."""
    settings = cfg.settings_for(method)
    activation = "sigmoid" if method == "arff_sigmoid" else "fourier"
    train_data, test_data = data.for_activation(activation)
    if method in ("arff", "arff_adaptive_cov", "arff_sigmoid"):
        sampler_cfg = _sampler_config(settings, k, seed)
        model, trace = train(
            train_data, sampler_cfg, activation, data.stats, callback=callback
        )
        return model, float(trace.acceptance.mean()), test_data
    if method == "fixed_rff":
        rff_cfg = FixedRffConfig(
            num_features=k, freq_std=settings.freq_std, ridge=settings.ridge, seed=seed
        )
        return train_fixed_rff(train_data, rff_cfg, activation, data.stats), float("nan"), test_data
    if method == "sgd":
        sgd_cfg = SgdConfig(
            num_features=k,
            learning_rate=settings.learning_rate,
            iterations=settings.iterations,
            batch_size=settings.batch_size,
            init_std=settings.init_std,
            seed=seed,
        )
        callback_every = max(settings.iterations // 20, 1) if callback else 0
        model = train_sgd(
            train_data, sgd_cfg, activation, data.stats,
            callback=callback, callback_every=callback_every,
        )
        return model, float("nan"), test_data
    raise ValueError(f"unknown method {method!r}")


def _map_tasks(fn, tasks, threads: int):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def sweep_k(
    cfg: ExperimentConfig,
    *,
    mnist: Optional[tuple[Dataset, Dataset]] = None,
    threads: int = 1,
    timing: bool = False,
    log: Optional[LogCallback] = None,
) -> list[ResultRow]:
    """Run every (method, K, replica) cell of a case-1/2/4 sweep.

    For case 4 pass ``mnist=(train, test)`` with raw pixels and one-hot labels;
    zero-variance pixel columns are mean-centered with std 1.  The error column
    holds the misclassification percentage for case 4 and the root-sum-square
    test residual otherwise.
    """
    cfg.validate()
    if cfg.case not in (1, 2, 4):
        raise ValueError("sweep_k handles cases 1, 2 and 4")
    if cfg.case == 4:
        if mnist is None:
            raise ValueError("case 4 needs mnist=(train_dataset, test_dataset)")
        raw_train, raw_test = mnist
        train_n, stats = normalize_dataset(raw_train, constant_columns="unit")
        shared = _ReplicaData(train_n, raw_test, stats)
        data = {r: shared for r in range(cfg.replicas)}
    else:
        target = case_target(cfg.case, cfg.noise_std)
        data = {r: _synthetic_replica(cfg, target, r) for r in range(cfg.replicas)}

    def run_one(task):
        method, k, replica = task
        seed = run_seed(cfg.seed, cfg.case, method, k, replica)
        start = time.perf_counter()
        model, acc_rate, test_data = _train_method(cfg, method, k, seed, data[replica])
        if cfg.case == 4:
            error = 100.0 * misclassification_rate(model, test_data)
        else:
            error = generalization_error(model, test_data)
        wall = time.perf_counter() - start if timing else 0.0
        if log is not None:
            log(
                f"case {cfg.case} {method} K={k} replica={replica}: "
                f"error={error:.6g} acceptance={acc_rate:.3f}"
            )
        return ResultRow(cfg.case, method, k, replica, error, wall, acc_rate, seed)

    tasks = [
        (method, k, replica)
        for method in cfg.methods
        for k in cfg.k_grid
        for replica in range(cfg.replicas)
    ]
    rows = _map_tasks(run_one, tasks, threads)
    return sorted(rows, key=lambda r: (r.case, r.method, r.k, r.replica))


def run_case3(
    cfg: ExperimentConfig,
    *,
    threads: int = 1,
    timing: bool = False,
    log: Optional[LogCallback] = None,
) -> list[ResultRow]:
    """Anisotropic-target comparison at fixed K, logging error checkpoints.

    When a ``log`` callback is given, the generalization error is evaluated and
    logged at every amplitude refresh together with the elapsed wall time.
    """
    cfg.validate()
    if cfg.case != 3:
        raise ValueError("run_case3 requires a case-3 config")
    target = case_target(3, cfg.noise_std)
    k = cfg.k_grid[0]

    def run_one(task):
        method, replica = task
        data = replica_bundles[replica]
        seed = run_seed(cfg.seed, 3, method, k, replica)
        start = time.perf_counter()
        callback = None
        if log is not None:
            _, test_data = data.for_activation("fourier")

            def callback(iteration, omega, beta, _method=method, _replica=replica, _start=start):
                s = build_design_matrix(test_data.x, omega, "fourier")
                err = float(np.linalg.norm(s @ beta - test_data.y))
                log(
                    f"case 3 {_method} K={k} replica={_replica}: "
                    f"i={iteration} t={time.perf_counter() - _start:.2f}s error={err:.6g}"
                )

        model, acc_rate, test_data = _train_method(cfg, method, k, seed, data, callback=callback)
        error = generalization_error(model, test_data)
        wall = time.perf_counter() - start if timing else 0.0
        return ResultRow(3, method, k, replica, error, wall, acc_rate, seed)

    replica_bundles = {r: _synthetic_replica(cfg, target, r) for r in range(cfg.replicas)}
    tasks = [(method, replica) for method in cfg.methods for replica in range(cfg.replicas)]
    rows = _map_tasks(run_one, tasks, threads)
    return sorted(rows, key=lambda r: (r.case, r.method, r.k, r.replica))


def sweep_sigma_omega(
    sigmas,
    cfg: ExperimentConfig,
    *,
    threads: int = 1,
    timing: bool = False,
    log: Optional[LogCallback] = None,
) -> list[ResultRow]:
    """Fixed-distribution runs across frequency standard deviations.

    Labels carry the sigma value as ``fixed_rff(sigma=...)`` since the CSV
    schema has no dedicated column for it.
    """
    cfg.validate()
    sigmas = tuple(float(s) for s in sigmas)
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ValueError("sigmas must be positive")
    if cfg.fixed_rff is None:
        raise ValueError("config has no fixed_rff settings")
    target = gauss_target(cfg.sweep_dim, cfg.noise_std)
    k = cfg.k_grid[0]
    data = {r: _synthetic_replica(cfg, target, r) for r in range(cfg.replicas)}

    def run_one(task):
        sigma, replica = task
        # fold the sigma bit pattern into the stream so each sigma is independent
        sigma_bits = int(np.float64(sigma).view(np.uint64))
        ss = np.random.SeedSequence(
            [cfg.seed, cfg.case, _METHOD_TAG["fixed_rff"], k, replica, sigma_bits]
        )
        seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        bundle = data[replica]
        start = time.perf_counter()
        rff_cfg = FixedRffConfig(
            num_features=k, freq_std=sigma, ridge=cfg.fixed_rff.ridge, seed=seed
        )
        model = train_fixed_rff(bundle.train, rff_cfg, "fourier", bundle.stats)
        error = generalization_error(model, bundle.test)
        wall = time.perf_counter() - start if timing else 0.0
        if log is not None:
            log(f"sigma sweep sigma={sigma:g} replica={replica}: error={error:.6g}")
        return ResultRow(
            cfg.case, f"fixed_rff(sigma={sigma:g})", k, replica, error, wall, float("nan"), seed
        )

    tasks = [(sigma, replica) for sigma in sigmas for replica in range(cfg.replicas)]
    rows = _map_tasks(run_one, tasks, threads)
    return sorted(rows, key=lambda r: (r.case, r.method, r.k, r.replica))


def run_single(
    cfg: ExperimentConfig,
    method: str,
    k: int,
    replica: int = 0,
    *,
    mnist: Optional[tuple[Dataset, Dataset]] = None,
    timing: bool = False,
) -> ResultRow:
    """One ad-hoc training run drawn from a sweep configuration."""
    single = replace(cfg, methods=(method,), k_grid=(k,), replicas=replica + 1)
    single.validate()
    if cfg.case == 3:
        rows = run_case3(single, timing=timing)
    elif cfg.case in (1, 2, 4):
        rows = sweep_k(single, mnist=mnist, timing=timing)
    else:
        raise ValueError("run_single handles cases 1..4")
    return rows[-1]


def aggregate_error_bars(rows) -> dict[tuple[int, str, int], ErrorBar]:
    """Group result rows by (case, method, K) into error bars over replicas."""
    groups: dict[tuple[int, str, int], list[float]] = {}
    for r in rows:
        groups.setdefault((r.case, r.method, r.k), []).append(r.error)
    out = {}
    for key, values in groups.items():
        arr = np.asarray(values)
        mean = float(arr.mean())
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out[key] = ErrorBar(mean, std, (mean - 2 * std, mean + 2 * std), arr.size)
    return out
