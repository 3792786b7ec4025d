"""Regularized complex least squares for the amplitudes.

Solves ``min_beta N^{-1} |S beta - y|^2 + ridge |beta|^2`` column by column for
a shared feature matrix S, either through the shifted normal equations
``(S^H S + ridge * N * I) beta = S^H y`` (Hermitian positive definite solve) or
through an SVD of S.  One factorization serves every right-hand-side column.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from scipy.linalg import blas as _blas

from .errors import DimensionMismatchError, SingularSystemError


@dataclass(frozen=True)
class SolveOptions:
    """Ridge weight, solve method, and the relative SVD cutoff used when ridge=0."""

    ridge: float = 0.1
    method: Literal["normal", "svd"] = "normal"
    svd_cutoff: float = 1e-12

    def __post_init__(self):
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if not 0 <= self.svd_cutoff < 1:
            raise ValueError("svd_cutoff must lie in [0, 1)")
        if self.method not in ("normal", "svd"):
            raise ValueError(f"unknown method {self.method!r}")


def gram_matrix(s: np.ndarray) -> np.ndarray:
    """Hermitian Gram matrix S^H S, via a BLAS rank-k update when S is Fortran-ordered."""
    if s.dtype == np.complex128 and s.flags.f_contiguous:
        upper = _blas.zherk(1.0, s, trans=2, lower=0)
        g = upper + upper.conj().T
        idx = np.diag_indices_from(g)
        g[idx] = upper[idx]
        return g
    return s.conj().T @ s


def _rhs(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    # S^H y without materializing conj(S): S^H y = conj(S^T conj(y))
    if np.iscomplexobj(y):
        return np.conj(s.T @ np.conj(y))
    return np.conj(s.T @ y)


def solve_amplitudes(s, y, opts: SolveOptions = SolveOptions()) -> np.ndarray:
    """Minimize ``N^{-1}|S beta - y_c|^2 + ridge |beta_c|^2`` for each column c of y.

    Returns complex amplitudes shaped (K, C), or (K,) when y is one-dimensional.
    Raises :class:`SingularSystemError` when ridge=0 and the Gram matrix is rank
    deficient under the normal-equations method (use ``method="svd"`` instead).
    """
    s = np.asarray(s)
    if s.ndim != 2:
        raise DimensionMismatchError(f"S must be 2-d, got shape {s.shape}")
    y = np.asarray(y, dtype=np.float64 if not np.iscomplexobj(y) else None)
    squeeze = y.ndim == 1
    y2 = y[:, None] if squeeze else y
    if y2.ndim != 2 or y2.shape[0] != s.shape[0]:
        raise DimensionMismatchError(
            f"y shape {y.shape} does not match S shape {s.shape}"
        )
    n = s.shape[0]
    if opts.method == "normal":
        g = gram_matrix(s)
        if opts.ridge > 0:
            g[np.diag_indices_from(g)] += opts.ridge * n
        rhs = _rhs(s, y2)
        try:
            with warnings.catch_warnings():
                if opts.ridge == 0:
                    # without the ridge shift, near-singular pivots mean rank deficiency
                    warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                beta = scipy.linalg.solve(g, rhs, assume_a="pos")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise SingularSystemError(
                "Gram matrix is singular or nearly so; use method='svd'"
            ) from exc
    else:
        u, sv, vh = np.linalg.svd(s, full_matrices=False)
        uhy = _rhs(u, y2)
        if opts.ridge > 0:
            filt = sv / (sv**2 + opts.ridge * n)
        else:
            keep = sv > opts.svd_cutoff * (sv[0] if sv.size else 0.0)
            filt = np.zeros_like(sv)
            np.divide(1.0, sv, out=filt, where=keep)
        beta = vh.conj().T @ (filt[:, None] * uhy)
    return beta[:, 0] if squeeze else beta


def normal_equation_residual(s, y, beta, ridge: float) -> float:
    """Relative residual of ``(S^H S + ridge N I) beta = S^H y``; a solve diagnostic."""
    s = np.asarray(s)
    y2 = np.asarray(y)
    if y2.ndim == 1:
        y2 = y2[:, None]
    b2 = np.asarray(beta)
    if b2.ndim == 1:
        b2 = b2[:, None]
    n = s.shape[0]
    rhs = _rhs(s, y2)
    lhs = _rhs(s, s @ b2) + ridge * n * b2
    denom = np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / (denom if denom > 0 else 1.0))
