"""Counting function of the symbol and its monotone rearrangement.

``Psi(y)`` is the area of ``{(x, theta) : sqrt(omega(x, theta)) <= y}`` in
[0, 1] x [0, pi], and the rearranged frequency symbol is
``sqrt(xi)(x) = Psi^{-1}(pi x)``. Four ways to evaluate ``Psi`` are provided:

``explicit_p1``
    Degree one only. ``e_1`` inverts to an arccos, which turns the area into
    a single integral in ``x`` with a square-root endpoint singularity.
``integral_1d``
    Any degree, strictly monotone ``phi'``. For each ``theta`` the set of
    admissible ``x`` is an interval ending at ``(phi')^{-1}(sqrt(e_p)/y)``,
    which leaves an integral in ``theta``.
``neutral_exact``
    Constant ``phi'``; ``Psi`` is a single inverse of ``e_p``.
``grid_2d_oracle``
    Midpoint indicator counting on a tensor grid. Slow to converge, kept as
    an independent check.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from .errors import InvalidArgumentError, UnsupportedOperationError
from .quadrature import adaptive_simpson
from .reparam import Convexity, bisect, inverse_deriv
from .symbol import FullSymbol, eval_ep, inverse_ep

__all__ = [
    "PsiMethod",
    "PsiFunction",
    "Rearrangement",
    "GammaSlope",
    "NumericalWarning",
    "eval_psi",
    "eval_xi",
    "explicit_p1_branches",
    "slope_at_zero",
    "xi_linear_check",
    "slope_bounds",
    "write_psi_csv",
    "write_xi_csv",
]

QUAD_TOL = 1e-10
XI_TOL = 1e-11
GRID_RESOLUTION = 2048
SQRT12 = math.sqrt(12.0)


class NumericalWarning(RuntimeWarning):
    pass


class PsiMethod(enum.Enum):
    EXPLICIT_P1 = "explicit_p1"
    INTEGRAL_1D = "integral_1d"
    NEUTRAL_EXACT = "neutral_exact"
    GRID_2D_ORACLE = "grid_2d_oracle"


@dataclass(frozen=True)
class PsiFunction:
    """``Psi`` for a given symbol, evaluated with a fixed method."""

    sym: FullSymbol
    method: PsiMethod
    grid_resolution: int = GRID_RESOLUTION

    @classmethod
    def build(cls, sym: FullSymbol, method: str | PsiMethod | None = None, **kw) -> PsiFunction:
        if method is None:
            if not sym.phi.is_strict:
                method = PsiMethod.NEUTRAL_EXACT
            elif sym.degree == 1:
                method = PsiMethod.EXPLICIT_P1
            else:
                method = PsiMethod.INTEGRAL_1D
        method = PsiMethod(method)
        if method in (PsiMethod.EXPLICIT_P1, PsiMethod.INTEGRAL_1D) and not sym.phi.is_strict:
            raise UnsupportedOperationError(f"{method.value} needs a strictly convex or concave map")
        if method is PsiMethod.EXPLICIT_P1 and sym.degree != 1:
            raise InvalidArgumentError("explicit_p1 is only valid for degree 1")
        if method is PsiMethod.NEUTRAL_EXACT and sym.phi.is_strict:
            raise InvalidArgumentError("neutral_exact needs a constant phi'")
        return cls(sym, method, **kw)

    @property
    def max_y(self) -> float:
        """Top of the range of ``sqrt(omega)``, where ``Psi`` reaches ``pi``."""
        return self.sym.max_sqrt_value

    def __call__(self, y):
        return eval_psi(self, y)


def _explicit_p1(psi: PsiFunction, y: np.ndarray) -> np.ndarray:
    phi = psi.sym.phi
    convex = phi.convexity is Convexity.STRICTLY_CONVEX
    d0, d1 = phi.deriv_at_0, phi.deriv_at_1
    dmin, dmax = min(d0, d1), max(d0, d1)
    out = np.full(y.shape, np.pi)
    out[y <= 0.0] = 0.0
    live = (y > 0.0) & (y * dmin < SQRT12)
    yy = y[live]
    # where y phi'(x) >= sqrt(12) the whole theta column is inside the set
    cut = np.full(yy.shape, 1.0 if convex else 0.0)
    partial = yy * dmax > SQRT12
    if np.any(partial):
        cut[partial] = inverse_deriv(phi, SQRT12 / yy[partial])
    if convex:
        a, b = np.zeros_like(yy), cut
        full = np.pi * (1.0 - cut)
    else:
        a, b = cut, np.ones_like(yy)
        full = np.pi * cut

    def integrand(x, k):
        s2 = (yy[k] * phi.deriv1(x)) ** 2
        return np.arccos(np.clip((6.0 - 2.0 * s2) / (6.0 + s2), -1.0, 1.0))

    out[live] = adaptive_simpson(integrand, a, b, tol=QUAD_TOL) + full
    return out


def _integral_1d(psi: PsiFunction, y: np.ndarray) -> np.ndarray:
    sym = psi.sym
    phi = sym.phi
    convex = phi.convexity is Convexity.STRICTLY_CONVEX
    top = sym.ep.max_value
    dmin, dmax = phi.min_deriv, phi.max_deriv
    out = np.zeros(y.shape)
    live = y > 0.0
    yy = y[live]
    # theta below t_lo: every x qualifies; above t_hi: none does
    t_lo = np.asarray(inverse_ep(sym.ep, np.minimum((yy * dmin) ** 2, top)))
    t_hi = np.asarray(inverse_ep(sym.ep, np.minimum((yy * dmax) ** 2, top)))

    def integrand(theta, k):
        v = np.sqrt(np.maximum(eval_ep(sym.ep, theta), 0.0)) / yy[k]
        x = inverse_deriv(phi, np.clip(v, dmin, dmax))
        return 1.0 - x if convex else x

    out[live] = t_lo + adaptive_simpson(integrand, t_lo, t_hi, tol=QUAD_TOL)
    return out


def _neutral_exact(psi: PsiFunction, y: np.ndarray) -> np.ndarray:
    sym = psi.sym
    c = sym.phi.deriv_at_0
    top = sym.ep.max_value
    return np.asarray(inverse_ep(sym.ep, np.minimum((np.maximum(y, 0.0) * c) ** 2, top)))


def _grid_oracle(psi: PsiFunction, y: np.ndarray) -> np.ndarray:
    sym = psi.sym
    r = psi.grid_resolution
    mid = (np.arange(r) + 0.5) / r
    e_sorted = np.asarray(eval_ep(sym.ep, np.pi * mid))
    dphi = sym.phi.deriv1(mid)
    out = np.empty(y.shape)
    for i, yi in enumerate(y):
        counts = np.searchsorted(e_sorted, (max(yi, 0.0) * dphi) ** 2, side="right")
        out[i] = np.pi * counts.sum() / (r * r)
    return out


_METHODS = {
    PsiMethod.EXPLICIT_P1: _explicit_p1,
    PsiMethod.INTEGRAL_1D: _integral_1d,
    PsiMethod.NEUTRAL_EXACT: _neutral_exact,
    PsiMethod.GRID_2D_ORACLE: _grid_oracle,
}


def eval_psi(psi: PsiFunction, y):
    """Area of the sublevel set ``{sqrt(omega) <= y}``; scalar or array ``y >= 0``."""
    arr = np.asarray(y, dtype=np.float64)
    if np.any(arr < 0.0):
        raise InvalidArgumentError("Psi is evaluated at y >= 0")
    flat = arr.reshape(-1)
    out = np.full(flat.shape, np.pi)
    below = flat < psi.max_y
    if np.any(below):
        out[below] = _METHODS[psi.method](psi, flat[below])
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def explicit_p1_branches(psi: PsiFunction, y: float) -> tuple[float, float]:
    """Both closed-form branches at one ``y``: the full-interval integral and
    the split one. They must agree at the breakpoint ``sqrt(12)/max phi'``."""
    phi = psi.sym.phi
    if psi.sym.degree != 1 or not phi.is_strict:
        raise UnsupportedOperationError("branches exist for degree 1 and strict maps only")
    convex = phi.convexity is Convexity.STRICTLY_CONVEX

    def integrand(x, k):
        s2 = (y * phi.deriv1(x)) ** 2
        return np.arccos(np.clip((6.0 - 2.0 * s2) / (6.0 + s2), -1.0, 1.0))

    whole = float(adaptive_simpson(integrand, 0.0, 1.0, tol=QUAD_TOL)[0])
    v = min(max(SQRT12 / y, phi.min_deriv), phi.max_deriv)
    cut = inverse_deriv(phi, v)
    if convex:
        split = float(adaptive_simpson(integrand, 0.0, cut, tol=QUAD_TOL)[0]) + np.pi * (1.0 - cut)
    else:
        split = float(adaptive_simpson(integrand, cut, 1.0, tol=QUAD_TOL)[0]) + np.pi * cut
    return whole, split


@dataclass(frozen=True)
class Rearrangement:
    """``sqrt(xi)(x) = Psi^{-1}(pi x)`` on [0, 1]."""

    psi: PsiFunction

    def __call__(self, x):
        return eval_xi(self, x)


def eval_xi(re: Rearrangement, x):
    """Invert ``Psi`` by bisection on ``[0, max sqrt(omega)]`` to ``1e-11``.

    Vectorized: all ``x`` are bisected together.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidArgumentError("x must lie in [0, 1]")
    flat = arr.reshape(-1)
    top = re.psi.max_y
    target = np.pi * flat
    y = bisect(
        lambda t: eval_psi(re.psi, t) - target,
        np.zeros_like(flat),
        np.full_like(flat, top),
        tol=XI_TOL,
    )
    y = np.where(flat <= 0.0, 0.0, np.where(flat >= 1.0, top, y))
    y = y.reshape(arr.shape)
    return float(y) if arr.ndim == 0 else y


def slope_bounds(p: int) -> tuple[float, float]:
    """Admissible interval for ``Psi'(0)``: exactly 1 for ``p = 1``,
    ``[(2/pi)^((p+1)/2), (pi/2)^((p-1)/2)]`` otherwise."""
    if p == 1:
        return (1.0, 1.0)
    return ((2.0 / np.pi) ** ((p + 1) / 2), (np.pi / 2.0) ** ((p - 1) / 2))


@dataclass(frozen=True)
class GammaSlope:
    psi_prime_at_zero: float
    bounds: tuple[float, float]

    @property
    def gamma(self) -> float:
        return np.pi / self.psi_prime_at_zero

    @property
    def within_bounds(self) -> bool:
        lo, hi = self.bounds
        return lo * 0.95 <= self.psi_prime_at_zero <= hi * 1.05


def slope_at_zero(psi: PsiFunction) -> GammaSlope:
    """Estimate ``Psi'(0)`` by Richardson extrapolation of ``Psi(y)/y``.

    Samples ``y = h, h/2, h/4`` with ``h = 0.01 max sqrt(omega)`` and
    eliminates the first two error orders. A ``NumericalWarning`` is issued
    when the estimate leaves the theoretical bounds by more than 5%.
    """
    if not psi.sym.phi.is_strict:
        raise UnsupportedOperationError("the slope theorem needs a strictly convex or concave map")
    h = 1e-2 * psi.max_y
    ys = np.array([h, h / 2.0, h / 4.0])
    r = eval_psi(psi, ys) / ys
    first = 2.0 * r[1:] - r[:-1]
    est = (4.0 * first[1] - first[0]) / 3.0
    out = GammaSlope(float(est), slope_bounds(psi.sym.degree))
    if not out.within_bounds:
        warnings.warn(
            f"Psi'(0) estimate {est:.6g} outside bounds {out.bounds}",
            NumericalWarning,
            stacklevel=2,
        )
    return out


def xi_linear_check(re: Rearrangement, gamma: GammaSlope, x_small: float) -> float:
    """Ratio ``sqrt(xi)(x) / (gamma x)``; tends to 1 as ``x -> 0``."""
    if not 0.0 < x_small <= 0.05:
        raise InvalidArgumentError(f"x_small must lie in (0, 0.05], got {x_small}")
    return eval_xi(re, x_small) / (gamma.gamma * x_small)


def _write_table(path: str | Path, header: tuple[str, str], a, b) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for u, v in zip(a, b):
            w.writerow([f"{u:.17g}", f"{v:.17g}"])


def write_psi_csv(psi: PsiFunction, ys, path: str | Path) -> None:
    ys = np.asarray(ys, dtype=np.float64)
    _write_table(path, ("y", "psi"), ys, np.atleast_1d(eval_psi(psi, ys)))


def write_xi_csv(re: Rearrangement, xs, path: str | Path) -> None:
    xs = np.asarray(xs, dtype=np.float64)
    _write_table(path, ("x", "sqrt_xi"), xs, np.atleast_1d(eval_xi(re, xs)))
