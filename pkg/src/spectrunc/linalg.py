"""Symmetric spectral primitives with deterministic output conventions.

Everything downstream (bounds, estimators, the experiment harness) funnels
through this module, so the conventions here are load-bearing:

* eigenvalues are always reported in descending algebraic order;
* eigenvectors are canonicalized (sign and tie order) so that repeated runs
  on identical input produce bit-identical decompositions;
* truncation keeps the top-k eigenpairs in algebraic order, which for
  indefinite input may discard large negative eigenvalues by design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as _sla
import scipy.sparse.linalg as _spla

__all__ = [
    "SpectralDecomposition",
    "NormTriple",
    "SpectrumStats",
    "eig_sym",
    "truncate",
    "norms",
    "spectral_norm_sym",
    "spectrum_stats",
    "principal_angle_sin",
    "spikeness",
    "require_symmetric",
]

#: absolute entrywise tolerance for accepting a matrix as symmetric
SYMMETRY_TOL = 1e-12


def require_symmetric(A: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate that ``A`` is square, finite and symmetric; return it as float64.

    Symmetry is checked entrywise with absolute tolerance ``tol``; the
    returned array is exactly symmetrized so later algebra never sees the
    sub-tolerance asymmetry.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    asym = np.max(np.abs(A - A.T)) if A.size else 0.0
    if asym > tol:
        raise ValueError(
            f"matrix is not symmetric: max |A - A^T| = {asym:.3e} exceeds {tol:.1e}"
        )
    return (A + A.T) / 2.0


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : (n,) ndarray
        Descending algebraic order.
    basis : (n, n) ndarray
        Orthonormal eigenvectors, column i paired with ``eigenvalues[i]``,
        canonicalized for determinism.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def matrix(self) -> np.ndarray:
        """Reassemble the (symmetrized) matrix from the decomposition."""
        B = (self.basis * self.eigenvalues) @ self.basis.T
        return (B + B.T) / 2.0


@dataclass(frozen=True)
class NormTriple:
    spectral: float
    frobenius: float
    max_abs: float


@dataclass(frozen=True)
class SpectrumStats:
    """Scalar summaries of a descending spectrum relative to a cut at ``k``."""

    k: int
    tail_2: float
    tail_F: float
    head_F: float
    gap: float
    gamma_k: float
    stable_rank: float
    effective_rank: float


def _canonicalize(w: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fix eigenvector order within exact eigenvalue ties and normalize signs.

    Within each run of bitwise-equal eigenvalues, columns are ordered by the
    row index of their largest-magnitude component; every column is then
    scaled so that its largest-magnitude component (first such index on
    magnitude ties) is positive.
    """
    n = w.shape[0]
    if n == 0:
        return w, V
    anchor = np.argmax(np.abs(V), axis=0)
    # stable reorder inside each maximal run of identical eigenvalues
    start = 0
    for stop in range(1, n + 1):
        if stop == n or w[stop] != w[start]:
            if stop - start > 1:
                order = start + np.argsort(anchor[start:stop], kind="stable")
                V[:, start:stop] = V[:, order]
                anchor[start:stop] = anchor[order]
            start = stop
    signs = np.sign(V[anchor, np.arange(n)])
    signs[signs == 0] = 1.0
    V *= signs
    return w, V


def eig_sym(A: np.ndarray) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    A : (n, n) array_like
        Symmetric with finite entries (validated; entrywise tolerance 1e-12).

    Returns
    -------
    SpectralDecomposition
        Eigenvalues descending; basis orthonormal and canonicalized so that
        identical input yields bit-identical output across runs.

    Notes
    -----
    Backed by LAPACK's symmetric solver; eigenvalues carry absolute error
    O(n * macheps * ||A||_2), far inside the 1e-10 * ||A||_2 envelope the
    rest of the package assumes.
    """
    A = require_symmetric(A)
    w, V = np.linalg.eigh(A)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    w, V = _canonicalize(w, V)
    return SpectralDecomposition(eigenvalues=w, basis=V)


def truncate(dec: SpectralDecomposition, k: int) -> np.ndarray:
    """Rank-k truncation: keep the top ``k`` eigenpairs in algebraic order.

    ``k`` may be 0 (zero matrix) up to ``n`` (full reconstruction). The
    result is exactly symmetric.
    """
    n = dec.n
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    if k == 0:
        return np.zeros((n, n))
    Uk = dec.basis[:, :k]
    B = (Uk * dec.eigenvalues[:k]) @ Uk.T
    return (B + B.T) / 2.0


def spectral_norm_sym(A: np.ndarray, dense_cutoff: int = 512) -> float:
    """Spectral norm of a symmetric matrix (largest eigenvalue magnitude).

    Small matrices go through the dense symmetric eigenvalue solver; large
    ones through a Lanczos iteration run to machine precision from a fixed
    deterministic start vector, so repeated calls agree bitwise.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if n == 0:
        return 0.0
    if n <= dense_cutoff:
        w = np.linalg.eigvalsh(A)
        return float(max(abs(w[0]), abs(w[-1])))
    v0 = np.full(n, 1.0 / np.sqrt(n))
    ncv = min(n, 100)
    vals = _spla.eigsh(
        A, k=1, which="LM", v0=v0, ncv=ncv, tol=0, return_eigenvectors=False
    )
    return float(abs(vals[0]))


def norms(A: np.ndarray) -> NormTriple:
    """Spectral norm, Frobenius norm and largest absolute entry of ``A``.

    The spectral norm is exact (symmetric eigenvalues), not a power-method
    estimate.
    """
    A = require_symmetric(A)
    return NormTriple(
        spectral=spectral_norm_sym(A),
        frobenius=float(np.linalg.norm(A, "fro")),
        max_abs=float(np.max(np.abs(A))) if A.size else 0.0,
    )


def spectrum_stats(eigenvalues: np.ndarray, k: int) -> SpectrumStats:
    """Summaries of a descending spectrum split after position ``k``.

    Parameters
    ----------
    eigenvalues : (n,) array_like
        Nonincreasing; the leading value must be positive. Intended for
        (numerically) positive semidefinite spectra -- tiny negative tail
        values are tolerated.
    k : int
        Cut position, ``1 <= k <= n - 1``.

    Returns
    -------
    SpectrumStats
        tail_2 = sigma_{k+1}; tail_F and head_F are the Frobenius masses of
        the discarded and kept parts; gap = sigma_k - sigma_{k+1};
        gamma_k = sigma_k / sigma_{k+1} (+inf when the tail vanishes);
        stable rank = ||.||_F^2 / sigma_1^2; effective rank = trace / sigma_1.
    """
    sig = np.asarray(eigenvalues, dtype=np.float64)
    if sig.ndim != 1:
        raise ValueError("eigenvalues must be one-dimensional")
    n = sig.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}], got {k}")
    if np.any(np.diff(sig) > 0):
        raise ValueError("eigenvalues must be nonincreasing")
    if sig[0] <= 0:
        raise ValueError("leading eigenvalue must be positive")
    head = sig[:k]
    tail = sig[k:]
    tail_2 = float(tail[0])
    if tail_2 > 0:
        gamma = float(sig[k - 1] / tail_2)
    else:
        gamma = float("inf")
    return SpectrumStats(
        k=k,
        tail_2=tail_2,
        tail_F=float(np.sqrt(np.sum(tail**2))),
        head_F=float(np.sqrt(np.sum(head**2))),
        gap=float(sig[k - 1] - tail[0]),
        gamma_k=gamma,
        stable_rank=float(np.sum(sig**2) / sig[0] ** 2),
        effective_rank=float(np.sum(sig) / sig[0]),
    )


def principal_angle_sin(U: np.ndarray, V: np.ndarray) -> float:
    """Sine of the largest principal angle from Range(U) into Range(V).

    Computed as ``|| (I - V V^T) U ||_2``; equals 0 when Range(U) is a
    subspace of Range(V) and 1 when some direction of U is orthogonal to V.
    Both inputs need orthonormal columns (validated to 1e-8). An empty U
    gives 0; an empty V gives 1 for nonempty U.
    """
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if U.ndim != 2 or V.ndim != 2 or U.shape[0] != V.shape[0]:
        raise ValueError("U and V must share the ambient dimension")
    for name, M in (("U", U), ("V", V)):
        if M.shape[1]:
            g = M.T @ M
            if np.max(np.abs(g - np.eye(M.shape[1]))) > 1e-8:
                raise ValueError(f"{name} does not have orthonormal columns")
    if U.shape[1] == 0:
        return 0.0
    R = U - V @ (V.T @ U)
    s = np.linalg.svd(R, compute_uv=False)
    return float(min(1.0, s[0]))


def spikeness(A: np.ndarray) -> float:
    """Coherence-style flatness measure ``n * ||A||_max / ||A||_F``.

    Equals 1 for perfectly flat matrices (all entries the same magnitude)
    and n when all mass sits in a single diagonal entry. Requires A != 0.
    """
    A = require_symmetric(A)
    fro = float(np.linalg.norm(A, "fro"))
    if fro == 0.0:
        raise ValueError("spikeness is undefined for the zero matrix")
    return float(A.shape[0] * np.max(np.abs(A)) / fro)
