"""Mass and stiffness matrices of the reparametrized Dirichlet Laplacian.

The trial space is spanned by the interior B-splines ``N_1^p .. N_{p+n-2}^p``
(the two end functions are dropped to impose homogeneous Dirichlet
conditions). Entries are

    M_ij = int_0^1 |phi'| N_i N_j dx,     K_ij = int_0^1 N_i' N_j' / |phi'| dx,

integrated element by element with ``p + 3`` Gauss-Legendre points.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from .bspline import BSplineBasis, tabulate_basis
from .errors import InvalidArgumentError, InvalidReparametrizationError
from .reparam import Reparametrization

__all__ = [
    "BandedSymmetricMatrix",
    "assemble_mass",
    "assemble_stiffness",
    "assemble",
    "write_triplets",
]

_CHUNK = 256


@dataclass(frozen=True)
class BandedSymmetricMatrix:
    """Symmetric matrix in LAPACK upper band storage.

    ``band[bandwidth + i - j, j]`` holds entry ``(i, j)`` for ``i <= j``.
    """

    band: npt.NDArray[np.float64]

    @property
    def bandwidth(self) -> int:
        return self.band.shape[0] - 1

    @property
    def size(self) -> int:
        return self.band.shape[1]

    def __getitem__(self, idx: tuple[int, int]) -> float:
        i, j = idx
        if i > j:
            i, j = j, i
        if j - i > self.bandwidth:
            return 0.0
        return float(self.band[self.bandwidth + i - j, j])

    def to_dense(self) -> npt.NDArray[np.float64]:
        n, w = self.size, self.bandwidth
        out = np.zeros((n, n))
        for d in range(w + 1):
            diag = self.band[w - d, d:]
            idx = np.arange(n - d)
            out[idx, idx + d] = diag
            out[idx + d, idx] = diag
        return out

    @classmethod
    def from_dense(cls, a: npt.ArrayLike, bandwidth: int) -> BandedSymmetricMatrix:
        a = np.asarray(a, dtype=np.float64)
        n = a.shape[0]
        band = np.zeros((bandwidth + 1, n))
        for d in range(bandwidth + 1):
            band[bandwidth - d, d:] = np.diagonal(a, d)
        return cls(band)


def _check_sizes(p: int, n: int) -> None:
    if p < 1:
        raise InvalidArgumentError(f"degree must be >= 1, got {p}")
    if n < 2:
        raise InvalidArgumentError(f"number of intervals must be >= 2, got {n}")
    if n + p - 2 < 1:
        raise InvalidArgumentError("the interior space is empty")


def _element_values(p: int, n: int, phi: Reparametrization, deriv_order: int):
    """Quadrature data per element: values (n, q, p+1), weights*jacobian (n, q), phi' (n, q)."""
    q = p + 3
    gx, gw = np.polynomial.legendre.leggauss(q)
    basis = BSplineBasis.uniform(p, n)
    h = 1.0 / n
    left = np.arange(n) * h
    pts = left[:, None] + 0.5 * h * (gx[None, :] + 1.0)
    wts = np.broadcast_to(0.5 * h * gw[None, :], pts.shape)
    local = np.empty((n, q, p + 1))
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        tab = tabulate_basis(basis, pts[start:stop].ravel(), deriv_order)
        tab = tab.reshape(stop - start, q, basis.count)
        for e in range(start, stop):
            # element e carries N_e .. N_{e+p}
            local[e] = tab[e - start, :, e : e + p + 1]
    dphi = phi.deriv1(pts)
    if np.any(dphi <= 0.0):
        raise InvalidReparametrizationError(f"{phi.name}: phi' <= 0 at a quadrature point")
    return local, wts, dphi


def _scatter(local: npt.NDArray[np.float64], p: int, n: int) -> BandedSymmetricMatrix:
    size = n + p - 2
    band = np.zeros((p + 1, size))
    elems = np.arange(n)
    for a in range(p + 1):
        for b in range(a, p + 1):
            i = elems + a - 1
            j = elems + b - 1
            keep = (i >= 0) & (j < size)
            np.add.at(band, (p + i[keep] - j[keep], j[keep]), local[keep, a, b])
    return BandedSymmetricMatrix(band)


def assemble(p: int, n: int, phi: Reparametrization, kind: str) -> BandedSymmetricMatrix:
    """Assemble ``"mass"`` or ``"stiffness"`` for degree ``p`` on ``n`` intervals."""
    _check_sizes(p, n)
    if kind == "mass":
        vals, wts, dphi = _element_values(p, n, phi, 0)
        weight = wts * np.abs(dphi)
    elif kind == "stiffness":
        vals, wts, dphi = _element_values(p, n, phi, 1)
        weight = wts / np.abs(dphi)
    else:
        raise InvalidArgumentError(f"unknown matrix kind {kind!r}")
    local = np.einsum("eqa,eq,eqb->eab", vals, weight, vals)
    return _scatter(local, p, n)


def assemble_mass(p: int, n: int, phi: Reparametrization) -> BandedSymmetricMatrix:
    return assemble(p, n, phi, "mass")


def assemble_stiffness(p: int, n: int, phi: Reparametrization) -> BandedSymmetricMatrix:
    return assemble(p, n, phi, "stiffness")


def write_triplets(mat: BandedSymmetricMatrix, path: str | Path) -> None:
    """Write every stored entry of the band as ``i j value`` (1-based, both triangles, row-major)."""
    n, w = mat.size, mat.bandwidth
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            for j in range(max(0, i - w), min(n, i + w + 1)):
                fh.write(f"{i + 1} {j + 1} {mat[i, j]:.17g}\n")
