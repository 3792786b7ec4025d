"""Metropolis-sampled frequency training for random Fourier feature models.

Every iteration proposes a joint random-walk move of all K frequencies, re-fits
all amplitudes in one least-squares solve for the proposed frequencies, and
then accepts or reverts each frequency individually with probability
``min(1, (|beta_new_k| / |beta_old_k|)^exponent)``; features with large
amplitudes thereby attract more frequency samples until the amplitude moduli
equidistribute.  Periodically (every ``refresh_every`` iterations, and once
after the loop) the full amplitude vector is re-solved for the mixed frequency
set.

The adaptive-covariance variant draws proposal steps from ``N(0, C)`` where C
is the running covariance of every frequency visited so far, switched on after
``burn_in`` iterations, and additionally rejects any proposal whose radius
exceeds ``max_radius`` (useful when the sampled spectrum has heavy tails).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Activation,
    Dataset,
    FourierModel,
    NormalizationStats,
    build_design_matrix,
)
from .errors import NonFiniteAmplitudeError
from .solver import SolveOptions, solve_amplitudes

ProgressCallback = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class AdaptiveCovConfig:
    """Burn-in before the learned proposal covariance activates, and radius cap."""

    burn_in: int
    max_radius: float = math.inf

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not self.max_radius > 0:
            raise ValueError("max_radius must be > 0")


@dataclass(frozen=True)
class SamplerConfig:
    """Hyperparameters of one training run.

    The iteration count is the integer part of ``sampling_time / step_size**2``,
    so the walk covers a fixed diffusion time budget regardless of step size.
    """

    num_features: int
    sampling_time: float
    step_size: float
    exponent: float
    ridge: float = 0.1
    refresh_every: int = 10
    seed: int = 0
    adaptive_cov: Optional[AdaptiveCovConfig] = None

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if not self.exponent > 0:
            raise ValueError("exponent must be > 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.refresh_every < 1:
            raise ValueError("refresh_every must be >= 1")
        if self.iterations < 1:
            raise ValueError(
                "sampling_time too small: floor(T / step_size^2) must be >= 1"
            )
        if self.adaptive_cov is not None and self.adaptive_cov.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than the iteration count")

    @property
    def iterations(self) -> int:
        return int(self.sampling_time / self.step_size**2)

    @classmethod
    def from_iterations(cls, num_features: int, iterations: int, step_size: float, **kw):
        """Build a config from an iteration count instead of a sampling time."""
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        # midpoint offset keeps floor(T / step^2) == iterations despite rounding
        return cls(
            num_features=num_features,
            sampling_time=(iterations + 0.5) * step_size**2,
            step_size=step_size,
            **kw,
        )


@dataclass
class RunningCovariance:
    """Streaming mean / outer-product accumulators over visited frequencies."""

    sum_vec: np.ndarray
    sum_outer: np.ndarray
    count: int = 0

    @classmethod
    def zero(cls, dim: int) -> "RunningCovariance":
        return cls(np.zeros(dim), np.zeros((dim, dim)), 0)

    def update(self, vec) -> None:
        vec = np.asarray(vec, dtype=np.float64)
        self.sum_vec += vec
        self.sum_outer += np.outer(vec, vec)
        self.count += 1

    def update_rows(self, rows: np.ndarray) -> None:
        self.sum_vec += rows.sum(axis=0)
        self.sum_outer += rows.T @ rows
        self.count += rows.shape[0]

    def mean(self) -> np.ndarray:
        return self.sum_vec / self.count

    def covariance(self) -> np.ndarray:
        """Population covariance of all accumulated vectors."""
        m = self.mean()
        return self.sum_outer / self.count - np.outer(m, m)


def covariance_update(acc: RunningCovariance, omega_k) -> RunningCovariance:
    """Pure accumulator update: returns a new accumulator including ``omega_k``."""
    out = RunningCovariance(acc.sum_vec.copy(), acc.sum_outer.copy(), acc.count)
    out.update(omega_k)
    return out


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix F with F F^T = cov, repairing tiny negative eigenvalues if needed."""
    cov = np.asarray(cov, dtype=np.float64)
    if not cov.any():
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        w = np.clip(w, 0.0, None) + 1e-12
        return v * np.sqrt(w)


def propose(omega: np.ndarray, step_size: float, cov, rng: np.random.Generator) -> np.ndarray:
    """Joint random-walk proposal: each row moves by step_size * F z, F F^T = cov.

    ``cov=None`` selects the identity (plain random walk).
    """
    z = rng.standard_normal(omega.shape)
    if cov is None:
        return omega + step_size * z
    factor = _psd_factor(cov)
    return omega + step_size * (z @ factor.T)


def _accept_mask(norm_old, norm_new, exponent, r_u) -> np.ndarray:
    # ratio form is exactly invariant under common power-of-two rescaling, and
    # overflow/underflow of ratio**exponent saturates to the correct decision
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        accept = (norm_new / norm_old) ** exponent > r_u
    return accept | (norm_old == 0.0)


def metropolis_accept(beta_old, beta_new, exponent: float, r_u: float) -> bool:
    """Accept a proposed frequency iff (|beta_new|/|beta_old|)^exponent > r_u.

    Amplitudes may be vectors (multi-output models); the modulus is then the
    Euclidean norm over outputs.  A zero old amplitude always accepts.
    """
    old = np.linalg.norm(np.atleast_1d(np.asarray(beta_old)))
    new = np.linalg.norm(np.atleast_1d(np.asarray(beta_new)))
    return bool(_accept_mask(old, new, exponent, r_u))


@dataclass(frozen=True)
class TrainTrace:
    """Per-iteration diagnostics of one training run."""

    acceptance: np.ndarray  # fraction of accepted features per iteration
    refresh_loss: np.ndarray  # training objective at every full amplitude refresh
    beta_cv: np.ndarray  # coefficient of variation of |beta_k| per iteration
    omega_snapshots: Optional[list] = None  # frequencies at each refresh, if recorded


def _row_norms(a: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return np.abs(a)
    if np.iscomplexobj(a):
        return np.sqrt((a.real**2 + a.imag**2).sum(axis=1))
    return np.sqrt((a**2).sum(axis=1))


def _coeff_variation(values: np.ndarray) -> float:
    m = values.mean()
    return float(values.std() / m) if m > 0 else 0.0


def _checked_solve(s, y, opts) -> np.ndarray:
    beta = solve_amplitudes(s, y, opts)
    if not np.isfinite(beta).all():
        raise NonFiniteAmplitudeError("amplitude solve returned NaN or Inf")
    return beta


def _objective(s, beta, y, ridge: float) -> float:
    r = s @ beta - y
    n = y.shape[0]
    return float((np.abs(r) ** 2).sum() / n + ridge * (np.abs(beta) ** 2).sum())


def train(
    data: Dataset,
    config: SamplerConfig,
    activation: Activation = "fourier",
    stats: Optional[NormalizationStats] = None,
    *,
    record_omega: bool = False,
    callback: Optional[ProgressCallback] = None,
) -> tuple[FourierModel, TrainTrace]:
    """Train a feature model on (already normalized) data.

    ``data`` is expected to be normalized to zero mean and unit std, with the
    bias column already appended when ``activation="sigmoid"``.  ``stats`` are
    attached to the returned model so raw inputs can be predicted later;
    identity statistics are used when omitted.

    ``callback(iteration, omega, beta)`` fires at every full amplitude refresh.
    """
    x, y = data.x, data.y
    k, d = config.num_features, data.dim
    iters = config.iterations
    rng = np.random.default_rng(config.seed)
    opts = SolveOptions(
        ridge=config.ridge,
        method="normal" if config.ridge > 0 else "svd",
        svd_cutoff=1e-8,
    )

    omega = np.zeros((k, d))
    s = build_design_matrix(x, omega, activation)
    beta = _checked_solve(s, y, opts)

    adaptive = config.adaptive_cov
    cov_bar = np.eye(d) if adaptive is not None else None
    acc_cov = RunningCovariance.zero(d) if adaptive is not None else None

    acceptance = np.empty(iters)
    beta_cv = np.empty(iters)
    refresh_loss: list[float] = []
    snapshots: Optional[list] = [] if record_omega else None

    for i in range(1, iters + 1):
        omega_prop = propose(omega, config.step_size, cov_bar, rng)
        s_prop = build_design_matrix(x, omega_prop, activation)
        beta_prop = _checked_solve(s_prop, y, opts)

        r_u = rng.random(k)
        accept = _accept_mask(_row_norms(beta), _row_norms(beta_prop), config.exponent, r_u)
        if adaptive is not None and math.isfinite(adaptive.max_radius):
            accept &= _row_norms(omega_prop) < adaptive.max_radius
        if accept.any():
            omega[accept] = omega_prop[accept]
            beta[accept] = beta_prop[accept]
            s[:, accept] = s_prop[:, accept]
        acceptance[i - 1] = accept.mean()
        beta_cv[i - 1] = _coeff_variation(_row_norms(beta))

        if adaptive is not None:
            acc_cov.update_rows(omega)
            if i > adaptive.burn_in:
                cov_bar = acc_cov.covariance()

        if i % config.refresh_every == 0:
            beta = _checked_solve(s, y, opts)
            refresh_loss.append(_objective(s, beta, y, config.ridge))
            if record_omega:
                snapshots.append(omega.copy())
            if callback is not None:
                callback(i, omega, beta)

    beta = _checked_solve(s, y, opts)
    refresh_loss.append(_objective(s, beta, y, config.ridge))
    if record_omega:
        snapshots.append(omega.copy())
    if callback is not None:
        callback(iters, omega, beta)

    if stats is None:
        stats = NormalizationStats.identity(d, data.n_outputs)
    model = FourierModel(omega=omega, beta=beta, activation=activation, stats=stats)
    trace = TrainTrace(
        acceptance=acceptance,
        refresh_loss=np.asarray(refresh_loss),
        beta_cv=beta_cv,
        omega_snapshots=snapshots,
    )
    return model, trace
