"""Core data types, normalization, activations, and design-matrix assembly.

The model approximates a target as a sum of K features
``x -> sum_k beta[k] * s(omega[k], x)`` where ``s`` is either the complex
exponential ``exp(i <omega, x>)`` or the real sigmoid ``1/(1 + exp(-<omega, x>))``.
All training happens on data normalized to zero mean and unit sample standard
deviation; the statistics are kept on the model so raw inputs can be predicted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit

from .errors import ConstantColumnError, DimensionMismatchError

Activation = Literal["fourier", "sigmoid"]

# sincos constants (Cody-Waite split of pi/2 and fdlibm minimax coefficients);
# the jitted kernel below auto-vectorizes, unlike scalar libm calls
_INV_PIO2 = 6.36619772367581382433e-01
_PIO2_1 = 1.57079632673412561417e+00
_PIO2_1T = 6.07710050650619224932e-11
_PIO2_2 = 6.07710050630396597660e-11
_PIO2_2T = 2.02226624879595063154e-21
_SIN_COEF = (
    -1.66666666666666324348e-01, 8.33333333332248946124e-03,
    -1.98412698298579493134e-04, 2.75573137070700676789e-06,
    -2.50507602534068634195e-08, 1.58969099521155010221e-10,
)
_COS_COEF = (
    4.16666666666666019037e-02, -1.38888888888741095749e-03,
    2.48015872894767294178e-05, -2.75573143513906633035e-07,
    2.08757232129817482790e-09, -1.13596475577881948265e-11,
)
#: largest |angle| the two-stage reduction handles at full precision
_CIS_MAX_ANGLE = float(2**18)

try:
    from numba import njit as _njit

    @_njit(cache=True, fastmath=True)
    def _cis_kernel(theta, out):  # pragma: no cover - exercised via build_design_matrix
        s1, s2, s3, s4, s5, s6 = _SIN_COEF
        c1, c2, c3, c4, c5, c6 = _COS_COEF
        rows, cols = theta.shape
        for i in range(rows):
            for j in range(cols):
                t = theta[i, j]
                fn = np.rint(t * _INV_PIO2)
                q = np.int64(fn) & 3
                head = t - fn * _PIO2_1
                w = fn * _PIO2_2
                r = head - w
                w = fn * _PIO2_2T - ((head - r) - w)
                r = r - w
                z = r * r
                sin_r = r * (1.0 + z * (s1 + z * (s2 + z * (s3 + z * (s4 + z * (s5 + z * s6))))))
                cos_r = 1.0 - 0.5 * z + z * z * (c1 + z * (c2 + z * (c3 + z * (c4 + z * (c5 + z * c6)))))
                if q == 0:
                    c, s = cos_r, sin_r
                elif q == 1:
                    c, s = -sin_r, cos_r
                elif q == 2:
                    c, s = -cos_r, -sin_r
                else:
                    c, s = sin_r, -cos_r
                out[i, j] = complex(c, s)

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def _as_2d(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-d, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Dataset:
    """N feature rows ``x`` (N, d) with targets ``y`` (N, C); C=1 for regression."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise DimensionMismatchError(f"x must be 2-d, got shape {x.shape}")
        if y.ndim == 1:
            y = y[:, None]
        if y.ndim != 2:
            raise DimensionMismatchError(f"y must be 1-d or 2-d, got shape {y.shape}")
        y = np.ascontiguousarray(y)
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatchError(
                f"x has {x.shape[0]} rows but y has {y.shape[0]}"
            )
        if x.shape[0] < 1 or x.shape[1] < 1 or y.shape[1] < 1:
            raise DimensionMismatchError("need N >= 1, d >= 1, C >= 1")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class NormalizationStats:
    """Column means and sample standard deviations of a training set."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    @classmethod
    def identity(cls, dim: int, n_outputs: int = 1) -> "NormalizationStats":
        return cls(np.zeros(dim), np.ones(dim), np.zeros(n_outputs), np.ones(n_outputs))

    def normalize_x(self, x) -> np.ndarray:
        x = _as_2d(x, "x")
        if x.shape[1] != self.x_mean.shape[0]:
            raise DimensionMismatchError(
                f"x has {x.shape[1]} columns, stats expect {self.x_mean.shape[0]}"
            )
        return (x - self.x_mean) / self.x_std

    def denormalize_x(self, x) -> np.ndarray:
        return _as_2d(x, "x") * self.x_std + self.x_mean

    def normalize_y(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.y_mean) / self.y_std

    def denormalize_y(self, y) -> np.ndarray:
        return np.asarray(y) * self.y_std + self.y_mean


def normalize_dataset(
    data: Dataset, *, constant_columns: str = "error"
) -> tuple[Dataset, NormalizationStats]:
    """Shift/scale every column to empirical mean 0 and sample std 1 (N-1 denominator).

    ``constant_columns="error"`` raises :class:`ConstantColumnError` on any
    zero-variance column.  ``constant_columns="unit"`` instead assigns std 1 to
    such columns so they are only mean-centered; this is needed for image data
    whose border pixels never vary.
    """
    if constant_columns not in ("error", "unit"):
        raise ValueError("constant_columns must be 'error' or 'unit'")
    if data.n < 2:
        raise ValueError("need at least two samples to normalize")
    x_mean = data.x.mean(axis=0)
    x_std = data.x.std(axis=0, ddof=1)
    y_mean = data.y.mean(axis=0)
    y_std = data.y.std(axis=0, ddof=1)
    for arr, which in ((x_std, "x"), (y_std, "y")):
        zero = np.flatnonzero(arr == 0.0)
        if zero.size:
            if constant_columns == "error":
                raise ConstantColumnError(int(zero[0]), which)
            arr[zero] = 1.0
    stats = NormalizationStats(x_mean, x_std, y_mean, y_std)
    return apply_normalization(data, stats), stats


def apply_normalization(data: Dataset, stats: NormalizationStats) -> Dataset:
    """Normalize a dataset with previously computed statistics (e.g. test data)."""
    return Dataset(stats.normalize_x(data.x), stats.normalize_y(data.y))


def denormalize_dataset(data: Dataset, stats: NormalizationStats) -> Dataset:
    return Dataset(stats.denormalize_x(data.x), stats.denormalize_y(data.y))


def augment_bias(x) -> np.ndarray:
    """Append a column of ones; used with the sigmoid activation to add a bias."""
    x = _as_2d(x, "x")
    return np.concatenate([x, np.ones((x.shape[0], 1))], axis=1)


def _angle_bound(x: np.ndarray, omega: np.ndarray) -> float:
    """Cauchy-Schwarz bound on max |<omega_k, x_n>|."""
    x_max = np.sqrt((x**2).sum(axis=1).max(initial=0.0))
    omega_max = np.sqrt((omega**2).sum(axis=1).max(initial=0.0))
    return float(x_max * omega_max)


def build_design_matrix(x, omega, activation: Activation = "fourier") -> np.ndarray:
    """Feature matrix S with S[n, k] = s(omega[k], x[n]), complex (N, K), Fortran order.

    Fourier entries are ``exp(i <omega_k, x_n>)``; sigmoid entries are real
    logistic values stored with zero imaginary part.
    """
    x = _as_2d(x, "x")
    omega = _as_2d(omega, "omega")
    if x.shape[1] != omega.shape[1]:
        raise DimensionMismatchError(
            f"x has {x.shape[1]} feature columns but omega has {omega.shape[1]}"
        )
    # (K, N) C-ordered product doubles as the (N, K) Fortran-ordered transpose,
    # which is what the Hermitian rank-k Gram update in the solver wants.
    theta_t = omega @ x.T
    if activation == "fourier":
        s = np.empty((x.shape[0], omega.shape[0]), dtype=np.complex128, order="F")
        st = s.T
        if _HAVE_NUMBA and _angle_bound(x, omega) < _CIS_MAX_ANGLE:
            _cis_kernel(theta_t, st)
        else:
            np.cos(theta_t, out=st.real)
            np.sin(theta_t, out=st.imag)
        return s
    if activation == "sigmoid":
        s = np.empty((x.shape[0], omega.shape[0]), dtype=np.complex128, order="F")
        st = s.T
        st.real = expit(theta_t)
        st.imag = 0.0
        return s
    raise ValueError(f"unknown activation {activation!r}")


@dataclass(frozen=True)
class FourierModel:
    """Trained feature expansion: frequencies, complex amplitudes, activation, stats."""

    omega: np.ndarray  # (K, d)
    beta: np.ndarray  # (K, C) complex
    activation: Activation
    stats: NormalizationStats

    def __post_init__(self):
        omega = _as_2d(self.omega, "omega")
        beta = np.asarray(self.beta, dtype=np.complex128)
        if beta.ndim == 1:
            beta = beta[:, None]
        if beta.ndim != 2 or beta.shape[0] != omega.shape[0]:
            raise DimensionMismatchError(
                f"beta shape {beta.shape} does not match omega shape {omega.shape}"
            )
        if omega.shape[0] < 1:
            raise DimensionMismatchError("need at least one feature")
        if not np.isfinite(beta).all():
            raise ValueError("beta contains non-finite entries")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "beta", beta)

    @property
    def num_features(self) -> int:
        return self.omega.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.beta.shape[1]


def predict(model: FourierModel, x_raw, *, with_diagnostics: bool = False):
    """Evaluate the model on raw inputs, returning de-normalized real predictions.

    The complex feature sum is collapsed with its real part; the discarded
    maximum absolute imaginary part is available via ``with_diagnostics=True``
    as ``(predictions, max_imag)``.
    """
    x = model.stats.normalize_x(x_raw)
    if model.activation == "sigmoid":
        x = augment_bias(x)
    s = build_design_matrix(x, model.omega, model.activation)
    z = s @ model.beta
    y = model.stats.denormalize_y(z.real)
    if with_diagnostics:
        return y, float(np.abs(z.imag).max(initial=0.0))
    return y
