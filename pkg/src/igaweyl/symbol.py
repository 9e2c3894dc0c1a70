"""Symbol of the normalized IGA Laplacian.

For degree ``p`` the uniform-mesh symbol is ``e_p = f_p / g_p`` where

    f_p(t) = -N''(p+1) - 2 sum_{k=1..p} N''(p+1-k) cos(k t)
    g_p(t) =  N(p+1)   + 2 sum_{k=1..p} N(p+1-k)   cos(k t)

and ``N`` is the cardinal B-spline of degree ``2p+1``. Under a
reparametrization the symbol becomes ``e_p(theta) / phi'(x)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bspline import cardinal_integer_samples
from .errors import InvalidArgumentError, OutOfRangeError
from .reparam import Reparametrization, bisect

__all__ = [
    "SymbolEp",
    "FullSymbol",
    "eval_fp",
    "eval_gp",
    "eval_fp_gp",
    "eval_ep",
    "inverse_ep",
    "eval_omega",
    "write_omega_csv",
]

_DOMAIN_SLACK = 1e-14


def _check_theta(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=np.float64)
    if np.any(th < -_DOMAIN_SLACK) or np.any(th > np.pi + _DOMAIN_SLACK):
        raise InvalidArgumentError("theta must lie in [0, pi]")
    return np.clip(th, 0.0, np.pi)


@lru_cache(maxsize=None)
def _coefficients(p: int) -> tuple[np.ndarray, np.ndarray]:
    # cosine coefficients c_0 + 2 sum c_k cos(k t) for f_p and g_p
    vals = cardinal_integer_samples(2 * p + 1, 0)
    dd = cardinal_integer_samples(2 * p + 1, 2)
    g = np.array([vals[p + 1 - k] for k in range(p + 1)])
    f = np.array([-dd[p + 1 - k] for k in range(p + 1)])
    return f, g


def _cos_series(coef: np.ndarray, th: np.ndarray) -> np.ndarray:
    k = np.arange(1, len(coef))
    return coef[0] + 2.0 * np.cos(np.multiply.outer(th, k)) @ coef[1:]


def _f_series(coef: np.ndarray, th: np.ndarray) -> np.ndarray:
    # f_p(0) = 0 exactly, so c_0 = -2 sum c_k and cos(k t) - 1 = -2 sin^2(k t / 2);
    # this form keeps full relative accuracy as t -> 0
    k = np.arange(1, len(coef))
    return -4.0 * np.sin(0.5 * np.multiply.outer(th, k)) ** 2 @ coef[1:]


def _scalar_or_array(x, shape):
    return float(x) if shape == () else x


def eval_gp(p: int, theta):
    """``g_p(theta)``; defined for ``p >= 0``."""
    if p < 0:
        raise InvalidArgumentError(f"degree must be >= 0, got {p}")
    th = _check_theta(theta)
    out = _cos_series(_coefficients(p)[1], th.reshape(-1)).reshape(th.shape)
    return _scalar_or_array(out, th.shape)


def eval_fp(p: int, theta):
    """``f_p(theta)``; defined for ``p >= 1``."""
    if p < 1:
        raise InvalidArgumentError(f"f_p needs degree >= 1, got {p}")
    th = _check_theta(theta)
    out = _f_series(_coefficients(p)[0], th.reshape(-1)).reshape(th.shape)
    return _scalar_or_array(out, th.shape)


def eval_fp_gp(p: int, theta):
    return eval_fp(p, theta), eval_gp(p, theta)


@dataclass(frozen=True)
class SymbolEp:
    """``e_p`` for a fixed degree, with its integer spline samples cached."""

    degree: int
    values: tuple[float, ...] = field(init=False, repr=False)
    second_derivs: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise InvalidArgumentError(f"degree must be >= 1, got {self.degree}")
        q = 2 * self.degree + 1
        object.__setattr__(self, "values", cardinal_integer_samples(q, 0))
        object.__setattr__(self, "second_derivs", cardinal_integer_samples(q, 2))

    def __call__(self, theta):
        return eval_ep(self, theta)

    @property
    def max_value(self) -> float:
        return eval_ep(self, np.pi)


def eval_ep(ep: SymbolEp, theta, path: str = "definition"):
    """``e_p(theta)`` by ``f_p / g_p`` or by the factored form.

    The factored form is ``(2 - 2 cos theta) g_{p-1}(theta) / g_p(theta)``,
    which follows from ``N''_{2p+1}`` being the second difference of
    ``N_{2p-1}``.
    """
    p = ep.degree
    th = _check_theta(theta)
    flat = th.reshape(-1)
    fcoef, gcoef = _coefficients(p)
    g = _cos_series(gcoef, flat)
    if path == "definition":
        out = _f_series(fcoef, flat) / g
    elif path == "factored":
        out = 4.0 * np.sin(0.5 * flat) ** 2 * _cos_series(_coefficients(p - 1)[1], flat) / g
    else:
        raise InvalidArgumentError(f"unknown path {path!r}")
    return _scalar_or_array(out.reshape(th.shape), th.shape)


def inverse_ep(ep: SymbolEp, v):
    """``theta`` in [0, pi] with ``e_p(theta) = v``, by bisection.

    Raises:
        OutOfRangeError: if ``v`` is outside ``[0, e_p(pi)]``.
    """
    arr = np.asarray(v, dtype=np.float64)
    top = ep.max_value
    slack = 1e-12 * max(1.0, top)
    if np.any(arr < -slack) or np.any(arr > top + slack):
        raise OutOfRangeError(f"value outside [0, {top}]")
    arr = np.clip(arr, 0.0, top)
    fcoef, gcoef = _coefficients(ep.degree)

    def resid(t):
        return _f_series(fcoef, t.reshape(-1)).reshape(t.shape) / _cos_series(
            gcoef, t.reshape(-1)
        ).reshape(t.shape) - arr

    th = bisect(resid, np.zeros_like(arr), np.full_like(arr, np.pi))
    th = np.where(arr <= 0.0, 0.0, np.where(arr >= top, np.pi, th))
    return _scalar_or_array(th, arr.shape)


@dataclass(frozen=True)
class FullSymbol:
    """``omega(x, theta) = e_p(theta) / phi'(x)^2`` on [0, 1] x [0, pi]."""

    ep: SymbolEp
    phi: Reparametrization

    @classmethod
    def build(cls, p: int, phi: Reparametrization) -> FullSymbol:
        return cls(SymbolEp(p), phi)

    @property
    def degree(self) -> int:
        return self.ep.degree

    @property
    def max_value(self) -> float:
        """Maximum of ``omega``; ``phi'`` is monotone so its minimum is at an endpoint."""
        return self.ep.max_value / self.phi.min_deriv**2

    @property
    def max_sqrt_value(self) -> float:
        return float(np.sqrt(self.max_value))

    def __call__(self, x, theta):
        return eval_omega(self, x, theta)


def eval_omega(sym: FullSymbol, x, theta):
    xx = np.asarray(x, dtype=np.float64)
    if np.any(xx < 0.0) or np.any(xx > 1.0):
        raise InvalidArgumentError("x must lie in [0, 1]")
    e = np.asarray(eval_ep(sym.ep, theta))
    out = e / sym.phi.deriv1(xx) ** 2
    return _scalar_or_array(out, np.shape(out))


def write_omega_csv(sym: FullSymbol, nx: int, ntheta: int, path) -> None:
    """Tensor grid of ``omega`` as rows ``x, theta, omega`` (x outer, theta inner)."""
    import csv

    if nx < 2 or ntheta < 2:
        raise InvalidArgumentError("grid needs at least two points per axis")
    xs = np.linspace(0.0, 1.0, nx)
    th = np.linspace(0.0, np.pi, ntheta)
    e = np.asarray(eval_ep(sym.ep, th))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "theta", "omega"])
        for x, d in zip(xs, sym.phi.deriv1(xs)):
            for t, v in zip(th, e / d**2):
                w.writerow([f"{x:.17g}", f"{t:.17g}", f"{v:.17g}"])
