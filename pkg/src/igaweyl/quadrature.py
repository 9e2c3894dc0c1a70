"""Batched adaptive Simpson quadrature.

Many one-dimensional integrals are refined together: every active interval
of every integral is bisected in the same pass, so the integrand is called
once per refinement level with all new nodes. Each integrand call receives
the node coordinates and the index of the integral they belong to.
"""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
import numpy.typing as npt

__all__ = ["adaptive_simpson", "QuadratureWarning"]

_ROUNDOFF = 64.0 * np.finfo(np.float64).eps

Integrand = Callable[[npt.NDArray[np.float64], npt.NDArray[np.intp]], npt.NDArray[np.float64]]


class QuadratureWarning(RuntimeWarning):
    pass


def adaptive_simpson(
    f: Integrand,
    a: npt.ArrayLike,
    b: npt.ArrayLike,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> npt.NDArray[np.float64]:
    """Integrate ``f(., k)`` over ``[a[k], b[k]]`` for every ``k``.

    An interval with tolerance ``eps`` is accepted when its two-halves
    Simpson estimate differs from the whole-interval estimate by at most
    ``15 eps``; otherwise both halves are refined with ``eps / 2``, floored
    at ``tol * 2^-20``. The
    accepted value includes the Richardson correction. Intervals whose
    estimates agree to within a few ulps are accepted as well. Integrable
    endpoint singularities are handled by this local refinement alone.

    Args:
        f: Vectorized integrand ``f(x, owner)``.
        a, b: Lower and upper limits, one pair per integral. ``b < a`` is
            not supported; empty intervals integrate to zero.
        tol: Absolute tolerance per integral.
        max_depth: Refinement cap; intervals still unresolved at this depth
            are accepted and a ``QuadratureWarning`` is issued.

    Returns:
        Array of integrals, one per ``(a, b)`` pair.
    """
    lo = np.atleast_1d(np.asarray(a, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(b, dtype=np.float64))
    lo, hi = np.broadcast_arrays(lo, hi)
    count = lo.size
    result = np.zeros(count)
    owner = np.nonzero(hi > lo)[0]
    if owner.size == 0:
        return result
    x0, x2 = lo[owner], hi[owner]
    x1 = 0.5 * (x0 + x2)
    vals = f(np.concatenate([x0, x1, x2]), np.concatenate([owner, owner, owner]))
    m = owner.size
    f0, f1, f2 = vals[:m], vals[m : 2 * m], vals[2 * m :]
    whole = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)
    eps = np.full(m, tol)
    # endpoint singularities would otherwise demand an ever-shrinking eps
    eps_floor = tol * 2.0**-20
    accepted_owner: list[np.ndarray] = []
    accepted_val: list[np.ndarray] = []
    for depth in range(max_depth + 1):
        ql = 0.5 * (x0 + x1)
        qr = 0.5 * (x1 + x2)
        fv = f(np.concatenate([ql, qr]), np.concatenate([owner, owner]))
        k = owner.size
        fl, fr = fv[:k], fv[k:]
        h = (x2 - x0) / 12.0
        left = h * (f0 + 4.0 * fl + f1)
        right = h * (f1 + 4.0 * fr + f2)
        diff = left + right - whole
        # the second test stops refinement that floating point can no longer resolve
        done = (np.abs(diff) <= 15.0 * eps) | (
            np.abs(diff) <= _ROUNDOFF * (np.abs(left) + np.abs(right))
        )
        if depth == max_depth and not np.all(done):
            warnings.warn(
                f"adaptive Simpson hit max depth on {int((~done).sum())} intervals",
                QuadratureWarning,
                stacklevel=2,
            )
            done[:] = True
        if np.any(done):
            accepted_owner.append(owner[done])
            accepted_val.append(left[done] + right[done] + diff[done] / 15.0)
        keep = ~done
        if not np.any(keep):
            break
        owner = np.concatenate([owner[keep], owner[keep]])
        nx0 = np.concatenate([x0[keep], x1[keep]])
        nx1 = np.concatenate([ql[keep], qr[keep]])
        nx2 = np.concatenate([x1[keep], x2[keep]])
        nf0 = np.concatenate([f0[keep], f1[keep]])
        nf1 = np.concatenate([fl[keep], fr[keep]])
        nf2 = np.concatenate([f1[keep], f2[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.maximum(np.concatenate([eps[keep], eps[keep]]) * 0.5, eps_floor)
        x0, x1, x2, f0, f1, f2 = nx0, nx1, nx2, nf0, nf1, nf2
    own = np.concatenate(accepted_owner)
    val = np.concatenate(accepted_val)
    order = np.argsort(own, kind="stable")
    np.add.at(result, own[order], val[order])
    return result
