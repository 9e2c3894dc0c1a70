"""Cardinal B-splines and open uniform B-spline bases on [0, 1].

Basis functions follow the Cox-de Boor recursion over the full knot vector,
with the convention that a fraction with zero denominator is zero. Degree-0
pieces are indicator functions of half-open intervals, so evaluation is
right-continuous at interior knots. The point ``t = 1`` is assigned to the
last non-empty interval so the basis still sums to one there.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .errors import InvalidArgumentError

__all__ = [
    "CardinalSpline",
    "KnotVector",
    "BSplineBasis",
    "eval_cardinal",
    "make_knot_vector",
    "eval_basis",
    "tabulate_basis",
    "cardinal_integer_samples",
]


def _cardinal(p: int, x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    if p == 0:
        return ((x >= 0.0) & (x < 1.0)).astype(np.float64)
    return (x / p) * _cardinal(p - 1, x) + ((p + 1 - x) / p) * _cardinal(p - 1, x - 1.0)


def _cardinal_deriv(p: int, x: npt.NDArray[np.float64], d: int) -> npt.NDArray[np.float64]:
    # N_p^(d)(x) = sum_i (-1)^i C(d, i) N_{p-d}(x - i)
    if d == 0:
        return _cardinal(p, x)
    if d > p:
        return np.zeros_like(x)
    out = np.zeros_like(x)
    coeff = 1
    for i in range(d + 1):
        out += (-1) ** i * coeff * _cardinal(p - d, x - i)
        coeff = coeff * (d - i) // (i + 1)
    return out


def eval_cardinal(p: int, x, deriv_order: int = 0):
    """Evaluate the cardinal B-spline of degree ``p`` or one of its derivatives.

    Args:
        p: Degree, ``p >= 0``. The support is ``[0, p + 1]``.
        x: Scalar or array of evaluation points.
        deriv_order: 0, 1 or 2. Derivatives come from differentiating the
            recursion, so ``N_p' = N_{p-1}(x) - N_{p-1}(x - 1)`` and so on.
            Where a derivative is discontinuous the right limit is returned.

    Returns:
        Same shape as ``x``. Exactly zero outside the support.

    Raises:
        ValueError: if ``p`` is negative or ``deriv_order`` is not 0, 1 or 2.
    """
    if p < 0:
        raise InvalidArgumentError(f"degree must be non-negative, got {p}")
    if deriv_order not in (0, 1, 2):
        raise InvalidArgumentError(f"deriv_order must be 0, 1 or 2, got {deriv_order}")
    arr = np.asarray(x, dtype=np.float64)
    out = _cardinal_deriv(p, np.atleast_1d(arr), deriv_order)
    out[(np.atleast_1d(arr) < 0.0) | (np.atleast_1d(arr) > p + 1)] = 0.0
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@lru_cache(maxsize=None)
def cardinal_integer_samples(p: int, deriv_order: int = 0) -> tuple[float, ...]:
    """Values ``N_p^(d)(k)`` for ``k = 0 .. p + 1``, cached per ``(p, d)``."""
    return tuple(eval_cardinal(p, np.arange(p + 2, dtype=np.float64), deriv_order).tolist())


@dataclass(frozen=True)
class CardinalSpline:
    """Degree-``p`` cardinal B-spline as a callable."""

    degree: int

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise InvalidArgumentError(f"degree must be non-negative, got {self.degree}")

    def __call__(self, x, deriv_order: int = 0):
        return eval_cardinal(self.degree, x, deriv_order)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, float(self.degree + 1))


@dataclass(frozen=True)
class KnotVector:
    """Open uniform knot vector with ``n`` intervals and end multiplicity ``p + 1``."""

    degree: int
    intervals: int
    knots: tuple[float, ...]

    @property
    def array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.knots, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.knots)


def make_knot_vector(p: int, n: int) -> KnotVector:
    """Build ``(0,...,0, 1/n, ..., (n-1)/n, 1,...,1)`` with ``p + 1`` repeated ends.

    Raises:
        ValueError: if ``p < 1`` or ``n < 1``.
    """
    if p < 1:
        raise InvalidArgumentError(f"degree must be >= 1, got {p}")
    if n < 1:
        raise InvalidArgumentError(f"number of intervals must be >= 1, got {n}")
    interior = [j / n for j in range(1, n)]
    knots = (0.0,) * (p + 1) + tuple(interior) + (1.0,) * (p + 1)
    return KnotVector(degree=p, intervals=n, knots=knots)


@dataclass(frozen=True)
class BSplineBasis:
    """The ``p + n`` B-splines ``N_0^p, ..., N_{p+n-1}^p`` on an open uniform knot vector."""

    knot_vector: KnotVector

    @classmethod
    def uniform(cls, p: int, n: int) -> BSplineBasis:
        return cls(make_knot_vector(p, n))

    @property
    def degree(self) -> int:
        return self.knot_vector.degree

    @property
    def intervals(self) -> int:
        return self.knot_vector.intervals

    @property
    def count(self) -> int:
        return self.degree + self.intervals

    def support(self, j: int) -> tuple[float, float]:
        t = self.knot_vector.knots
        return (t[j], t[j + self.degree + 1])


def _degree_zero(t_knots: npt.NDArray[np.float64], t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    lo = t_knots[:-1]
    hi = t_knots[1:]
    vals = ((t[:, None] >= lo[None, :]) & (t[:, None] < hi[None, :])).astype(np.float64)
    # t == 1 belongs to the last non-empty interval
    at_end = t >= t_knots[-1]
    if np.any(at_end):
        last = int(np.nonzero(hi > lo)[0][-1])
        vals[at_end, :] = 0.0
        vals[at_end, last] = 1.0
    return vals


def _safe_ratio(num: npt.NDArray[np.float64], den: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    out = np.zeros(np.broadcast(num, den).shape)
    mask = np.broadcast_to(den != 0.0, out.shape)
    np.divide(num, den, out=out, where=mask)
    return out


def tabulate_basis(
    basis: BSplineBasis, t, deriv_order: int = 0
) -> npt.NDArray[np.float64]:
    """Evaluate every basis function at every point.

    The recursion runs degree by degree over all ``j`` at once, which is the
    textbook formula vectorized over points rather than a de Boor pyramid.

    Args:
        basis: The spline basis.
        t: Points in ``[0, 1]``.
        deriv_order: 0 or 1.

    Returns:
        Array of shape ``(len(t), basis.count)``.
    """
    if deriv_order not in (0, 1):
        raise InvalidArgumentError(f"deriv_order must be 0 or 1, got {deriv_order}")
    tk = basis.knot_vector.array
    p = basis.degree
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any((tt < 0.0) | (tt > 1.0)):
        raise InvalidArgumentError("evaluation points must lie in [0, 1]")
    vals = _degree_zero(tk, tt)
    top = p if deriv_order == 0 else p - 1
    for k in range(1, top + 1):
        m = len(tk) - 1 - k
        j = np.arange(m)
        left = _safe_ratio(tt[:, None] - tk[j][None, :], (tk[j + k] - tk[j])[None, :])
        right = _safe_ratio(tk[j + k + 1][None, :] - tt[:, None], (tk[j + k + 1] - tk[j + 1])[None, :])
        vals = left * vals[:, :m] + right * vals[:, 1 : m + 1]
    if deriv_order == 0:
        return vals
    m = len(tk) - 1 - p
    j = np.arange(m)
    a = _safe_ratio(np.full(m, float(p)), tk[j + p] - tk[j])
    b = _safe_ratio(np.full(m, float(p)), tk[j + p + 1] - tk[j + 1])
    return a[None, :] * vals[:, :m] - b[None, :] * vals[:, 1 : m + 1]


def eval_basis(basis: BSplineBasis, j: int, t: float, deriv_order: int = 0) -> float:
    """Value of ``N_j^p(t)`` (``deriv_order=0``) or its derivative (``deriv_order=1``)."""
    if not 0 <= j < basis.count:
        raise InvalidArgumentError(f"basis index {j} out of range [0, {basis.count - 1}]")
    return float(tabulate_basis(basis, [t], deriv_order)[0, j])
