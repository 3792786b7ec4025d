"""Reference trainers: fixed-distribution random features and plain SGD.

``train_fixed_rff`` draws frequencies once from an isotropic Gaussian and fits
amplitudes with a single regularized solve.  ``train_sgd`` trains both the
frequencies and the complex amplitudes by minibatch stochastic gradient descent
on the unregularized empirical least-squares loss.
"""

from __future__ import annotations

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
from .errors import DivergedLossError, NonFiniteAmplitudeError
from .solver import SolveOptions, solve_amplitudes


@dataclass(frozen=True)
class FixedRffConfig:
    """Feature count, frequency standard deviation, ridge weight, seed."""

    num_features: int
    freq_std: float = 1.0
    ridge: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if not self.freq_std > 0:
            raise ValueError("freq_std must be > 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


def train_fixed_rff(
    data: Dataset,
    config: FixedRffConfig,
    activation: Activation = "fourier",
    stats: Optional[NormalizationStats] = None,
) -> FourierModel:
    """Sample i.i.d. N(0, freq_std^2) frequency components, fit amplitudes once."""
    rng = np.random.default_rng(config.seed)
    omega = config.freq_std * rng.standard_normal((config.num_features, data.dim))
    s = build_design_matrix(data.x, omega, activation)
    opts = SolveOptions(
        ridge=config.ridge, method="normal" if config.ridge > 0 else "svd", svd_cutoff=1e-8
    )
    beta = solve_amplitudes(s, data.y, opts)
    if not np.isfinite(beta).all():
        raise NonFiniteAmplitudeError("amplitude solve returned NaN or Inf")
    if stats is None:
        stats = NormalizationStats.identity(data.dim, data.n_outputs)
    return FourierModel(omega=omega, beta=beta, activation=activation, stats=stats)


@dataclass(frozen=True)
class SgdConfig:
    """Learning rate, iteration count, minibatch size, frequency init std, seed."""

    num_features: int
    learning_rate: float
    iterations: int
    batch_size: int = 1
    init_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be >= 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.init_std > 0:
            raise ValueError("init_std must be > 0")


def _as_columns(y) -> np.ndarray:
    y = np.asarray(y)
    return y[:, None] if y.ndim == 1 else y


def sgd_loss(omega, beta, x, y) -> float:
    """Empirical loss mean_n sum_c |sum_k beta[k,c] e^{i omega_k . x_n} - y[n,c]|^2."""
    s = np.exp(1j * (np.asarray(x) @ np.asarray(omega).T))
    r = s @ _as_columns(beta) - _as_columns(y)
    return float((np.abs(r) ** 2).sum() / x.shape[0])


def sgd_gradients(omega, beta, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of :func:`sgd_loss` on the given batch.

    Returns ``(g_beta, g_omega)`` where ``g_beta`` is complex with the real
    part holding the derivative w.r.t. Re(beta) and the imaginary part the
    derivative w.r.t. Im(beta).
    """
    omega = np.asarray(omega, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    beta = _as_columns(beta)
    y = _as_columns(y)
    n = x.shape[0]
    s = np.exp(1j * (x @ omega.T))  # (n, K)
    r = s @ beta - y  # (n, C)
    g_beta = (2.0 / n) * np.conj(s.T @ np.conj(r))  # = (2/n) S^H r
    # d loss / d omega[k, j] = (2/n) sum_{n,c} Re(i beta[k,c] s[n,k] conj(r[n,c])) x[n,j]
    a = s * (np.conj(r) @ beta.T)  # (n, K)
    g_omega = (2.0 / n) * (-a.imag).T @ x  # Re(i z) = -Im(z)
    return g_beta, g_omega


def train_sgd(
    data: Dataset,
    config: SgdConfig,
    activation: Activation = "fourier",
    stats: Optional[NormalizationStats] = None,
    *,
    check_every: int = 1000,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
    callback_every: int = 0,
) -> FourierModel:
    """Minibatch SGD over frequencies and amplitudes on normalized data.

    Amplitudes start at zero, frequency components at N(0, init_std^2).
    Raises :class:`DivergedLossError` when the full-batch loss exceeds 1e6
    times its initial value (checked every ``check_every`` iterations).
    """
    if activation != "fourier":
        raise NotImplementedError("SGD training is implemented for the Fourier activation")
    x, y = data.x, data.y
    rng = np.random.default_rng(config.seed)
    omega = config.init_std * rng.standard_normal((config.num_features, data.dim))
    beta = np.zeros((config.num_features, data.n_outputs), dtype=np.complex128)
    loss0 = max(sgd_loss(omega, beta, x, y), np.finfo(float).tiny)
    lr = config.learning_rate

    for it in range(1, config.iterations + 1):
        idx = rng.integers(0, data.n, size=config.batch_size)
        g_beta, g_omega = sgd_gradients(omega, beta, x[idx], y[idx])
        beta -= lr * g_beta
        omega -= lr * g_omega
        if check_every and it % check_every == 0:
            loss = sgd_loss(omega, beta, x, y)
            if not np.isfinite(loss) or loss > 1e6 * loss0:
                raise DivergedLossError(
                    f"loss {loss:.3e} exceeded 1e6 x initial {loss0:.3e} at iteration {it}"
                )
        if callback is not None and callback_every and it % callback_every == 0:
            callback(it, omega, beta)

    if not np.isfinite(beta).all() or not np.isfinite(omega).all():
        raise DivergedLossError("SGD produced non-finite parameters")
    if stats is None:
        stats = NormalizationStats.identity(data.dim, data.n_outputs)
    return FourierModel(omega=omega, beta=beta, activation=activation, stats=stats)
