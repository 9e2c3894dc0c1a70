"""Generalized symmetric eigenproblem ``K u = lambda M u``.

The pencil is reduced to a standard symmetric problem with the Cholesky
factor of ``M`` and solved densely. Eigenvalues are then normalized by
``n^2`` and split into inliers and outliers against the maximum of the
symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh, lapack, solve_triangular

from .assembly import BandedSymmetricMatrix, assemble_mass, assemble_stiffness
from .errors import InvalidArgumentError, NumericalError
from .reparam import Reparametrization
from .symbol import FullSymbol

__all__ = ["DiscreteSpectrum", "solve_spectrum", "compute_spectrum", "write_spectrum_csv"]

OUTLIER_RTOL = 1e-10
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Sorted eigenvalues of ``M^{-1} K`` and their normalized frequencies."""

    p: int
    n: int
    eigenvalues: npt.NDArray[np.float64]
    max_range: float
    eigenvectors: npt.NDArray[np.float64] | None = field(default=None, repr=False, compare=False)

    @property
    def N(self) -> int:  # noqa: N802
        return len(self.eigenvalues)

    @cached_property
    def normalized_eigenvalues(self) -> npt.NDArray[np.float64]:
        return self.eigenvalues / self.n**2

    @cached_property
    def normalized_frequencies(self) -> npt.NDArray[np.float64]:
        return np.sqrt(self.normalized_eigenvalues)

    @cached_property
    def outlier_mask(self) -> npt.NDArray[np.bool_]:
        return self.normalized_eigenvalues > self.max_range * (1.0 + OUTLIER_RTOL)

    @property
    def outlier_count(self) -> int:
        return int(self.outlier_mask.sum())

    @property
    def inlier_indices(self) -> range:
        """1-based indices ``1 .. N - OUT``."""
        return range(1, self.N - self.outlier_count + 1)

    @cached_property
    def near_ties(self) -> npt.NDArray[np.int64]:
        """1-based ``k`` with ``lambda_{k+1} - lambda_k < 1e-12 lambda_{k+1}``."""
        lam = self.eigenvalues
        gaps = np.diff(lam)
        return np.nonzero(gaps < TIE_RTOL * np.abs(lam[1:]))[0] + 1


def _cholesky(m: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    c, info = lapack.dpotrf(m, lower=1, clean=1)
    if info > 0:
        raise NumericalError(f"mass matrix is not positive definite (pivot {info})", pivot=int(info))
    if info < 0:
        raise NumericalError(f"dpotrf argument {-info} invalid")
    return c


def solve_spectrum(
    M: BandedSymmetricMatrix | npt.ArrayLike,  # noqa: N803
    K: BandedSymmetricMatrix | npt.ArrayLike,  # noqa: N803
    p: int,
    n: int,
    max_range: float,
    vectors: bool = False,
) -> DiscreteSpectrum:
    """Solve ``K u = lambda M u`` and package the sorted spectrum.

    Args:
        M, K: Mass and stiffness matrices of equal size.
        p, n: Degree and number of intervals, used for normalization.
        max_range: Maximum of the symbol ``omega``; normalized eigenvalues
            above it (with relative guard 1e-10) are outliers.
        vectors: Keep M-orthonormal eigenvectors for residual checks.

    Raises:
        NumericalError: if ``M`` is not SPD or an eigenvalue comes out negative.
    """
    m = M.to_dense() if isinstance(M, BandedSymmetricMatrix) else np.asarray(M, dtype=np.float64)
    k = K.to_dense() if isinstance(K, BandedSymmetricMatrix) else np.asarray(K, dtype=np.float64)
    if m.shape != k.shape or m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"shape mismatch: M {m.shape}, K {k.shape}")
    if m.shape[0] == 0:
        raise InvalidArgumentError("empty matrices")
    low = _cholesky(m)
    tmp = solve_triangular(low, k, lower=True)
    c = solve_triangular(low, tmp.T, lower=True)
    c = 0.5 * (c + c.T)
    if vectors:
        lam, y = eigh(c)
        vec = solve_triangular(low, y, lower=True, trans="T")
    else:
        lam = eigh(c, eigvals_only=True)
        vec = None
    if lam[0] <= 0.0:
        raise NumericalError(f"non-positive eigenvalue {lam[0]!r}; check assembly")
    return DiscreteSpectrum(p=p, n=n, eigenvalues=lam, max_range=max_range, eigenvectors=vec)


def compute_spectrum(p: int, n: int, phi: Reparametrization, vectors: bool = False) -> DiscreteSpectrum:
    """Assemble and solve for one ``(p, n, phi)``."""
    M = assemble_mass(p, n, phi)  # noqa: N806
    K = assemble_stiffness(p, n, phi)  # noqa: N806
    return solve_spectrum(M, K, p, n, FullSymbol.build(p, phi).max_value, vectors=vectors)


def write_spectrum_csv(spec: DiscreteSpectrum, path: str | Path) -> None:
    """Columns ``k, lambda, normalized_frequency, is_outlier``."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "lambda", "normalized_frequency", "is_outlier"])
        for i, (lam, f, out) in enumerate(
            zip(spec.eigenvalues, spec.normalized_frequencies, spec.outlier_mask), start=1
        ):
            w.writerow([i, f"{lam:.17g}", f"{f:.17g}", int(out)])
