"""Truncation-based estimators for partially observed or noisy matrices.

Each estimator is the same two-step recipe: build an unbiased (or exact)
symmetric surrogate of the target matrix, then keep its top-k eigenpairs.
The theory in :mod:`spectrunc.bounds` is precisely about when that second
step is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eig_sym, require_symmetric, truncate

__all__ = [
    "ObservationSet",
    "SampleSet",
    "CompletionResult",
    "zero_fill_rescale",
    "complete",
    "denoise",
    "sample_covariance",
    "covariance_reduced",
]


@dataclass(frozen=True)
class ObservationSet:
    """Entrywise observations of a symmetric matrix.

    Indices are 0-based upper-triangular (rows <= cols, diagonal allowed);
    each stored value is an exact entry of the unknown matrix, recorded
    once.  ``p`` is the independent observation probability used by the
    rescaling estimator.
    """

    n: int
    p: float
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise ValueError("rows, cols and values must have equal length")
        if self.rows.size:
            if self.rows.min() < 0 or self.cols.max() >= self.n:
                raise ValueError("observation indices out of range")
            if np.any(self.rows > self.cols):
                raise ValueError("observations must be upper-triangular (row <= col)")
            flat = self.rows.astype(np.int64) * self.n + self.cols.astype(np.int64)
            if np.unique(flat).size != flat.size:
                raise ValueError("duplicate observation positions")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("observed values must be finite")

    @property
    def count(self) -> int:
        return int(self.rows.size)


@dataclass(frozen=True)
class SampleSet:
    """N observations of an n-dimensional random vector, one per row of X."""

    N: int
    n: int
    X: np.ndarray

    def __post_init__(self):
        if self.X.shape != (self.N, self.n):
            raise ValueError(f"X must have shape ({self.N}, {self.n}), got {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("samples must be finite")


@dataclass(frozen=True)
class CompletionResult:
    """Rank-k completion estimate together with basic provenance."""

    estimate: np.ndarray
    k: int
    p: float
    observed_count: int


def zero_fill_rescale(obs: ObservationSet) -> np.ndarray:
    """Unbiased dense surrogate: observed entries divided by p, rest zero.

    Dividing by the observation probability makes every entry of the result
    an unbiased estimate of the corresponding entry of the unknown matrix.
    """
    M = np.zeros((obs.n, obs.n))
    M[obs.rows, obs.cols] = obs.values / obs.p
    off = obs.rows != obs.cols
    M[obs.cols[off], obs.rows[off]] = obs.values[off] / obs.p
    return M


def complete(obs: ObservationSet, k: int) -> CompletionResult:
    """Rank-k estimate of a partially observed symmetric matrix."""
    filled = zero_fill_rescale(obs)
    est = truncate(eig_sym(filled), k)
    return CompletionResult(estimate=est, k=k, p=obs.p, observed_count=obs.count)


def denoise(Y: np.ndarray, k: int) -> np.ndarray:
    """Rank-k truncation of a noisy symmetric observation."""
    return truncate(eig_sym(Y), k)


def sample_covariance(samples: SampleSet, center: bool = False) -> np.ndarray:
    """Sample covariance of the rows of X.

    The default assumes a known-zero mean (X^T X / N).  With
    ``center=True`` the empirical mean is removed and the usual N - 1
    normalization applies.
    """
    X = samples.X
    if center:
        if samples.N < 2:
            raise ValueError("centering requires at least 2 samples")
        X = X - X.mean(axis=0)
        S = X.T @ X / (samples.N - 1)
    else:
        S = X.T @ X / samples.N
    return (S + S.T) / 2.0


def covariance_reduced(samples: SampleSet, k: int, center: bool = False) -> np.ndarray:
    """Rank-k truncation of the sample covariance."""
    S = require_symmetric(sample_covariance(samples, center=center))
    return truncate(eig_sym(S), k)
