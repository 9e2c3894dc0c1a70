"""Admissible reparametrizations of [0, 1].

A reparametrization is an increasing C^2 bijection ``phi`` of [0, 1] whose
second derivative has one sign. It is stored as three vectorized callables
plus a declared convexity class. The identity map is accepted with the
``NEUTRAL`` class so that the pipeline can be checked against the uniform
mesh, but operations that need a strictly monotone ``phi'`` refuse it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidReparametrizationError,
    OutOfRangeError,
    UnsupportedOperationError,
)

__all__ = [
    "Convexity",
    "Reparametrization",
    "ExpConvexParams",
    "LogConcaveParams",
    "identity",
    "make_exp_convex",
    "make_log_concave",
    "mirror",
    "inverse_deriv",
    "bisect",
]

BISECT_TOL = 1e-13
BISECT_MAXITER = 200
VALIDATION_POINTS = 1000
VALIDATION_TOL = 1e-9

ArrayFn = Callable[[np.ndarray], np.ndarray]


class Convexity(enum.Enum):
    STRICTLY_CONVEX = "strictly_convex"
    STRICTLY_CONCAVE = "strictly_concave"
    NEUTRAL = "neutral"


def bisect(f, lo, hi, tol: float = BISECT_TOL, maxiter: int = BISECT_MAXITER):
    """Vectorized bisection for an increasing function ``f``.

    Returns the midpoint of the final bracket for each target. ``lo`` and
    ``hi`` broadcast together; ``f(lo) <= 0 <= f(hi)`` is assumed.
    """
    lo = np.array(lo, dtype=np.float64, copy=True)
    hi = np.array(hi, dtype=np.float64, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    for _ in range(maxiter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        up = f(mid) > 0.0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Reparametrization:
    """A C^2 map ``phi`` with ``phi(0) = 0``, ``phi(1) = 1`` and ``phi' > 0``.

    Callables must accept and return numpy arrays. ``inv_deriv`` is an
    optional closed form for ``(phi')^{-1}``; without it, inversion falls
    back to bisection.
    """

    eval: ArrayFn
    deriv1: ArrayFn
    deriv2: ArrayFn
    convexity: Convexity
    name: str = "custom"
    params: dict = field(default_factory=dict)
    inv_deriv: ArrayFn | None = None
    validate: bool = True

    def __post_init__(self) -> None:
        if self.validate:
            _validate(self)

    @property
    def is_strict(self) -> bool:
        return self.convexity is not Convexity.NEUTRAL

    @property
    def deriv_at_0(self) -> float:
        return float(self.deriv1(np.array([0.0]))[0])

    @property
    def deriv_at_1(self) -> float:
        return float(self.deriv1(np.array([1.0]))[0])

    @property
    def min_deriv(self) -> float:
        """``min phi'`` on [0, 1]; an endpoint since ``phi'`` is monotone."""
        return min(self.deriv_at_0, self.deriv_at_1)

    @property
    def max_deriv(self) -> float:
        return max(self.deriv_at_0, self.deriv_at_1)

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({inner})"


def _validate(phi: Reparametrization) -> None:
    x = np.linspace(0.0, 1.0, VALIDATION_POINTS)
    ends = phi.eval(np.array([0.0, 1.0]))
    if abs(ends[0]) > VALIDATION_TOL or abs(ends[1] - 1.0) > VALIDATION_TOL:
        raise InvalidReparametrizationError(
            f"{phi.name}: phi(0)={ends[0]!r}, phi(1)={ends[1]!r}; expected 0 and 1"
        )
    d1 = phi.deriv1(x)
    if np.any(d1 <= 0.0):
        raise InvalidReparametrizationError(f"{phi.name}: phi' is not positive on [0, 1]")
    d2 = phi.deriv2(x)
    if phi.convexity is Convexity.STRICTLY_CONVEX and np.any(d2 <= 0.0):
        raise InvalidReparametrizationError(f"{phi.name}: declared strictly convex but phi'' <= 0 somewhere")
    if phi.convexity is Convexity.STRICTLY_CONCAVE and np.any(d2 >= 0.0):
        raise InvalidReparametrizationError(f"{phi.name}: declared strictly concave but phi'' >= 0 somewhere")
    if phi.convexity is Convexity.NEUTRAL and np.any(np.abs(d2) > VALIDATION_TOL):
        raise InvalidReparametrizationError(f"{phi.name}: neutral maps must have phi'' = 0")


def identity() -> Reparametrization:
    return Reparametrization(
        eval=lambda x: np.asarray(x, dtype=np.float64) * 1.0,
        deriv1=lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
        deriv2=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        convexity=Convexity.NEUTRAL,
        name="identity",
    )


@dataclass(frozen=True)
class ExpConvexParams:
    a: float
    gamma: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise InvalidArgumentError(f"a must be > 0, got {self.a}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgumentError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def b(self) -> float:
        denom = math.expm1(self.a) - self.a
        assert denom > 0.0
        return -math.log(denom / (1.0 - self.gamma))


def make_exp_convex(a: float, gamma: float) -> Reparametrization:
    """``phi(x) = e^{ax+b} - e^b + (gamma - a e^b) x`` with ``phi'(0) = gamma``."""
    prm = ExpConvexParams(a, gamma)
    eb = math.exp(prm.b)
    slope = gamma - a * eb

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return eb * np.expm1(a * x) + slope * x

    def d1(x):
        x = np.asarray(x, dtype=np.float64)
        return gamma + a * eb * np.expm1(a * x)

    def d2(x):
        x = np.asarray(x, dtype=np.float64)
        return a * a * eb * np.exp(a * x)

    def inv(v):
        v = np.asarray(v, dtype=np.float64)
        return np.log1p((v - gamma) / (a * eb)) / a

    return Reparametrization(
        eval=f,
        deriv1=d1,
        deriv2=d2,
        convexity=Convexity.STRICTLY_CONVEX,
        name="exp_convex",
        params={"a": a, "gamma": gamma},
        inv_deriv=inv,
    )


def _log_family_residual(x: float, gamma: float) -> float:
    return 1.0 - (math.log1p(x) - x / (1.0 + x)) - gamma


def solve_log_anchor(gamma: float) -> float:
    """Root ``x* > 0`` of ``gamma = 1 - (ln(x+1) - x/(x+1))``.

    The right-hand side decreases from 1 to -inf on (0, inf), so the root is
    unique for every ``gamma < 1``. It exceeds 1 when ``gamma < 1.5 - ln 2``.
    """
    if not 0.0 < gamma < 1.0:
        raise InvalidArgumentError(f"gamma must lie in (0, 1), got {gamma}")
    hi = 1.0
    while _log_family_residual(hi, gamma) > 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("could not bracket the log-family anchor")
    lo = 0.0
    for _ in range(BISECT_MAXITER):
        mid = 0.5 * (lo + hi)
        if _log_family_residual(mid, gamma) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LogConcaveParams:
    a: float
    gamma: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise InvalidArgumentError(f"a must be > 0, got {self.a}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgumentError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def x_star(self) -> float:
        return solve_log_anchor(self.gamma)

    @property
    def b(self) -> float:
        return self.a / self.x_star


def make_log_concave(a: float, gamma: float) -> Reparametrization:
    """``phi(x) = ln(ax+b) - ln(b) + (gamma - a/(a+b)) x`` with ``phi'(1) = gamma``.

    Note that with ``b = a / x*`` the map reduces to
    ``ln(1 + x* x) + (gamma - x*/(1+x*)) x``, so it does not depend on ``a``.
    """
    prm = LogConcaveParams(a, gamma)
    b = prm.b
    c = gamma - a / (a + b)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return np.log1p(a * x / b) + c * x

    def d1(x):
        x = np.asarray(x, dtype=np.float64)
        return a / (a * x + b) + c

    def d2(x):
        x = np.asarray(x, dtype=np.float64)
        return -(a * a) / (a * x + b) ** 2

    def inv(v):
        v = np.asarray(v, dtype=np.float64)
        return (a / (v - c) - b) / a

    return Reparametrization(
        eval=f,
        deriv1=d1,
        deriv2=d2,
        convexity=Convexity.STRICTLY_CONCAVE,
        name="log_concave",
        params={"a": a, "gamma": gamma},
        inv_deriv=inv,
    )


def mirror(phi: Reparametrization) -> Reparametrization:
    """The map ``x -> 1 - phi(1 - x)``; swaps convex and concave."""
    flip = {
        Convexity.STRICTLY_CONVEX: Convexity.STRICTLY_CONCAVE,
        Convexity.STRICTLY_CONCAVE: Convexity.STRICTLY_CONVEX,
        Convexity.NEUTRAL: Convexity.NEUTRAL,
    }
    inv = None
    if phi.inv_deriv is not None:
        base_inv = phi.inv_deriv

        def inv(v):
            return 1.0 - base_inv(v)

    return Reparametrization(
        eval=lambda x: 1.0 - phi.eval(1.0 - np.asarray(x, dtype=np.float64)),
        deriv1=lambda x: phi.deriv1(1.0 - np.asarray(x, dtype=np.float64)),
        deriv2=lambda x: -phi.deriv2(1.0 - np.asarray(x, dtype=np.float64)),
        convexity=flip[phi.convexity],
        name=f"mirror_{phi.name}",
        params=dict(phi.params),
        inv_deriv=inv,
    )


def inverse_deriv(phi: Reparametrization, v, method: str = "auto"):
    """Solve ``phi'(x) = v`` for ``x`` in [0, 1].

    Args:
        phi: A strictly convex or strictly concave map.
        v: Scalar or array inside the range of ``phi'``.
        method: ``"bisect"``, ``"closed_form"`` or ``"auto"`` (closed form
            when the map provides one).

    Raises:
        UnsupportedOperationError: for a neutral map.
        OutOfRangeError: if some ``v`` lies outside ``[min phi', max phi']``.
    """
    if not phi.is_strict:
        raise UnsupportedOperationError(f"{phi.name}: phi' is constant, its inverse is undefined")
    arr = np.asarray(v, dtype=np.float64)
    d0, d1 = phi.deriv_at_0, phi.deriv_at_1
    lo_v, hi_v = min(d0, d1), max(d0, d1)
    slack = 1e-12 * max(1.0, hi_v)
    if np.any(arr < lo_v - slack) or np.any(arr > hi_v + slack):
        raise OutOfRangeError(f"value outside the range [{lo_v}, {hi_v}] of phi'")
    arr = np.clip(arr, lo_v, hi_v)
    if method == "auto":
        method = "closed_form" if phi.inv_deriv is not None else "bisect"
    if method == "closed_form":
        if phi.inv_deriv is None:
            raise InvalidArgumentError(f"{phi.name} has no closed-form inverse derivative")
        x = np.clip(phi.inv_deriv(arr), 0.0, 1.0)
    elif method == "bisect":
        sign = 1.0 if phi.convexity is Convexity.STRICTLY_CONVEX else -1.0
        x = bisect(lambda t: sign * (phi.deriv1(t) - arr), np.zeros_like(arr), np.ones_like(arr))
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    if np.ndim(x) == 0 or arr.ndim == 0:
        return float(np.asarray(x).reshape(-1)[0])
    return x
