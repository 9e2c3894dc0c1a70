"""Checks of the asymptotic spectral results on finite meshes.

Every report here is a plain dataclass computed by a pure function. Reports
serialize to JSON through :func:`write_json` and their tables to CSV through
:func:`write_csv`.

Throughout, ``N = n + p - 2`` is the matrix size, the normalized frequencies
are ``sqrt(lambda_k / n^2)`` in ascending order, and inliers are the indices
``k = 1 .. N - OUT``.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt

from .distribution import GammaSlope, PsiFunction, Rearrangement, eval_psi, eval_xi
from .eigensolve import DiscreteSpectrum, compute_spectrum
from .errors import InvalidArgumentError, InvalidPairError, UnsupportedOperationError
from .reparam import Convexity, Reparametrization, bisect
from .symbol import SymbolEp

__all__ = [
    "WeylReport",
    "EstimateReport",
    "OrderingReport",
    "PackReport",
    "OutlierTrend",
    "Monotonic",
    "counting_function",
    "weyl_counting",
    "merge_weyl_reports",
    "estimate_errors",
    "verify_ordering",
    "ordering_hypothesis_from_family",
    "orient_pair",
    "pack_counts",
    "concave_window",
    "outlier_trend",
    "spectra_for_ladder",
    "report_dict",
    "write_json",
    "write_csv",
]

DEFAULT_PROBES = 1000
ENDPOINT_TOL = 1e-10
# a gap this small is indistinguishable from quadrature noise in Psi
GAP_TOL = 1e-9


def _nonincreasing(values: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def spectra_for_ladder(
    p: int, phi: Reparametrization, n_values: Sequence[int], workers: int | None = None
) -> list[DiscreteSpectrum]:
    """Spectra for each ``n``, computed concurrently and returned in input order."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda n: compute_spectrum(p, n, phi), n_values))


# ---------------------------------------------------------------- Weyl law


def counting_function(spec: DiscreteSpectrum, y) -> npt.NDArray[np.float64]:
    """``G_n(y) = #{k : f_k <= y} / (N + 1)`` for normalized frequencies ``f_k``."""
    f = spec.normalized_frequencies
    return np.searchsorted(f, np.asarray(y, dtype=np.float64), side="right") / (spec.N + 1)


@dataclass(frozen=True)
class WeylReport:
    """Distance between ``G_n`` and ``Psi / pi`` for one or more ``n``.

    ``pointwise_errors[i][j]`` is ``|G_n(y_j) - Psi(y_j)/pi|`` for
    ``n = n_values[i]``.
    """

    n_values: list[int]
    sup_errors: list[float]
    probe_y: list[float]
    pointwise_errors: list[list[float]]

    @property
    def nonincreasing(self) -> bool:
        return _nonincreasing(self.sup_errors)

    def table(self) -> tuple[list[str], list[list[Any]]]:
        header = ["y"] + [f"error_n{n}" for n in self.n_values]
        rows = [[y] + [errs[j] for errs in self.pointwise_errors] for j, y in enumerate(self.probe_y)]
        return header, rows


def weyl_counting(
    spec: DiscreteSpectrum, psi: PsiFunction, probe_y: Sequence[float] | None = None
) -> WeylReport:
    """Compare the counting function of ``spec`` with ``Psi / pi``.

    The supremum over ``[0, max sqrt(omega)]`` is taken over the probe values
    and over both one-sided limits of ``G_n`` at each of its jumps in range.

    Args:
        spec: Discrete spectrum for ``(p, n, phi)``.
        psi: Counting function of the same ``(p, phi)``.
        probe_y: Probe values; defaults to 1000 uniform points on the range.

    Raises:
        InvalidArgumentError: for an empty spectrum or probes out of range.
    """
    if spec.N == 0:
        raise InvalidArgumentError("empty spectrum")
    top = psi.max_y
    if probe_y is None:
        probes = np.linspace(0.0, top, DEFAULT_PROBES)
    else:
        probes = np.asarray(probe_y, dtype=np.float64)
        if np.any(probes < 0.0) or np.any(probes > top * (1.0 + 1e-12)):
            raise InvalidArgumentError(f"probe values must lie in [0, {top}]")
    scale = spec.N + 1
    point_err = np.abs(counting_function(spec, probes) - np.asarray(eval_psi(psi, probes)) / np.pi)

    f = spec.normalized_frequencies
    jumps = np.unique(f[f <= top])
    jumps = np.append(jumps, top)
    target = np.asarray(eval_psi(psi, jumps)) / np.pi
    right = np.searchsorted(f, jumps, side="right") / scale
    left = np.searchsorted(f, jumps, side="left") / scale
    sup = max(
        float(point_err.max(initial=0.0)),
        float(np.abs(right - target).max()),
        float(np.abs(left - target).max()),
    )
    return WeylReport(
        n_values=[spec.n],
        sup_errors=[sup],
        probe_y=probes.tolist(),
        pointwise_errors=[point_err.tolist()],
    )


def merge_weyl_reports(reports: Sequence[WeylReport]) -> WeylReport:
    """Stack single-``n`` reports sharing the same probe grid, sorted by ``n``."""
    if not reports:
        raise InvalidArgumentError("nothing to merge")
    probes = reports[0].probe_y
    if any(r.probe_y != probes for r in reports):
        raise InvalidArgumentError("reports use different probe grids")
    items = sorted(
        ((n, s, e) for r in reports for n, s, e in zip(r.n_values, r.sup_errors, r.pointwise_errors)),
        key=lambda t: t[0],
    )
    return WeylReport(
        n_values=[t[0] for t in items],
        sup_errors=[t[1] for t in items],
        probe_y=probes,
        pointwise_errors=[t[2] for t in items],
    )


# --------------------------------------------------------------- estimates


@dataclass(frozen=True)
class EstimateReport:
    """Maximum deviations between normalized frequencies and sampled ``sqrt(xi)``.

    Attributes:
        abs_error: ``max |f_k - s_k|`` over inliers, ``s_k = sqrt(xi)(k/(N+1))``.
        scaled_error: ``max (N+1)/k |f_k - s_k|``.
        weighted_rel_error: ``max k/(N+1) |f_k / s_k - 1|``.
        uniform_rel_error: ``max |f_k / s_k - 1|``.
        beta_k: Indices used for the small-``k`` probe.
        beta_probe: ``f_k / (gamma k/(N+1))`` at ``beta_k``.
    """

    n: int
    abs_error: float
    scaled_error: float
    weighted_rel_error: float
    uniform_rel_error: float
    beta_k: list[int]
    beta_probe: list[float]


def estimate_errors(spec: DiscreteSpectrum, re: Rearrangement, gamma: GammaSlope) -> EstimateReport:
    """Evaluate the sampling estimates on the inliers of ``spec``."""
    k = np.asarray(spec.inlier_indices, dtype=np.float64)
    if k.size == 0:
        raise InvalidArgumentError("spectrum has no inliers")
    scale = spec.N + 1
    x = k / scale
    f = spec.normalized_frequencies[: k.size]
    s = np.asarray(eval_xi(re, x))
    diff = np.abs(f - s)
    rel = np.abs(f / s - 1.0)
    beta_k = sorted({1, 2, math.ceil(math.sqrt(spec.N))})
    beta_k = [j for j in beta_k if j <= spec.N]
    beta = [float(spec.normalized_frequencies[j - 1] / (gamma.gamma * j / scale)) for j in beta_k]
    return EstimateReport(
        n=spec.n,
        abs_error=float(diff.max()),
        scaled_error=float((diff / x).max()),
        weighted_rel_error=float((x * rel).max()),
        uniform_rel_error=float(rel.max()),
        beta_k=beta_k,
        beta_probe=beta,
    )


# ---------------------------------------------------------------- ordering


@dataclass(frozen=True)
class OrderingReport:
    """Same-index comparison of two spectra on an interval of normalized eigenvalues.

    ``violations`` lists the ``k`` (1-based) with both normalized eigenvalues
    in the interval but ``f_k(phi1) >= f_k(phi2)``. The conclusion is only
    meaningful when ``hypothesis_verified`` holds.
    """

    interval: tuple[float, float]
    psi_gap_min: float
    pair_count: int
    violations: list[int]
    hypothesis_verified: bool

    @property
    def ordering_holds(self) -> bool:
        return self.hypothesis_verified and not self.violations


def verify_ordering(
    spec1: DiscreteSpectrum,
    spec2: DiscreteSpectrum,
    psi1: PsiFunction,
    psi2: PsiFunction,
    interval: tuple[float, float],
    probe_count: int = 64,
) -> OrderingReport:
    """Check ``Psi1(sqrt y) > Psi2(sqrt y)`` on the interval and the induced ordering.

    The hypothesis is probed at ``probe_count`` interior points of the
    interval, which is read as a set of normalized eigenvalues.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise InvalidArgumentError(f"empty interval ({lo}, {hi})")
    if (spec1.p, spec1.n) != (spec2.p, spec2.n):
        raise InvalidArgumentError("spectra must share (p, n)")
    if probe_count < 1:
        raise InvalidArgumentError("probe_count must be positive")
    ys = lo + (hi - lo) * np.arange(1, probe_count + 1) / (probe_count + 1)
    root = np.sqrt(ys)
    gap = np.asarray(eval_psi(psi1, np.minimum(root, psi1.max_y))) - np.asarray(
        eval_psi(psi2, np.minimum(root, psi2.max_y))
    )
    gap_min = float(gap.min())
    l1 = spec1.normalized_eigenvalues
    l2 = spec2.normalized_eigenvalues
    inside = (l1 >= lo) & (l1 <= hi) & (l2 >= lo) & (l2 <= hi)
    idx = np.nonzero(inside)[0]
    bad = idx[~(np.sqrt(l1[idx]) < np.sqrt(l2[idx]))]
    return OrderingReport(
        interval=(lo, hi),
        psi_gap_min=gap_min,
        pair_count=int(idx.size),
        violations=(bad + 1).tolist(),
        hypothesis_verified=gap_min > GAP_TOL,
    )


def _family_side(phi1: Reparametrization, phi2: Reparametrization) -> Convexity:
    if phi1.convexity is not phi2.convexity or not phi1.is_strict:
        raise InvalidPairError("both maps must be strictly convex or both strictly concave")
    return phi1.convexity


def _anchor(phi: Reparametrization, convex: bool) -> float:
    return phi.deriv_at_0 if convex else phi.deriv_at_1


def orient_pair(
    phi1: Reparametrization, phi2: Reparametrization
) -> tuple[Reparametrization, Reparametrization]:
    """Return the pair ordered so that the first derivative dominates near the anchor.

    The anchor is ``x = 0`` for convex maps and ``x = 1`` for concave ones.
    """
    convex = _family_side(phi1, phi2) is Convexity.STRICTLY_CONVEX
    x = np.linspace(0.0, 1.0, 1001)[1:-1]
    d = phi1.deriv1(x) - phi2.deriv1(x)
    probe = d[0] if convex else d[-1]
    return (phi1, phi2) if probe >= 0.0 else (phi2, phi1)


def ordering_hypothesis_from_family(
    phi1: Reparametrization, phi2: Reparametrization, p: int
) -> tuple[float, float]:
    """Interval of normalized eigenvalues on which ``Psi1(sqrt y) > Psi2(sqrt y)`` holds.

    For convex maps sharing ``phi'(0)``, ``x0`` is the first interior zero of
    ``phi1' - phi2'`` and the interval is
    ``(e_p(pi)/phi1'(x0)^2, e_p(pi)/phi1'(0)^2)``. For concave maps sharing
    ``phi'(1)``, ``x0`` is the last zero and ``phi1'(1)`` replaces ``phi1'(0)``.

    Raises:
        InvalidPairError: mixed convexity, anchor mismatch above 1e-10, no
            sign change of ``phi1' - phi2'``, or ``phi1' < phi2'`` on the
            side of the anchor.
    """
    convex = _family_side(phi1, phi2) is Convexity.STRICTLY_CONVEX
    a1, a2 = _anchor(phi1, convex), _anchor(phi2, convex)
    if abs(a1 - a2) > ENDPOINT_TOL:
        side = "phi'(0)" if convex else "phi'(1)"
        raise InvalidPairError(f"{side} differs: {a1!r} vs {a2!r}")

    def diff(x):
        return phi1.deriv1(x) - phi2.deriv1(x)

    grid = np.linspace(0.0, 1.0, 1001)
    d = diff(grid)
    inner = d[1:-1]
    sign = np.sign(inner)
    change = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if change.size == 0:
        raise InvalidPairError("phi1' - phi2' has no sign change in (0, 1)")
    # interior grid index i maps to grid[i + 1]
    i = change[0] if convex else change[-1]
    xa, xb = grid[i + 1], grid[i + 2]
    if d[i + 1] < 0:
        x0 = float(bisect(lambda t: diff(t), np.array([xa]), np.array([xb]))[0])
    else:
        x0 = float(bisect(lambda t: -diff(t), np.array([xa]), np.array([xb]))[0])
    side = grid[grid <= x0] if convex else grid[grid >= x0]
    if np.any(diff(side) < -ENDPOINT_TOL):
        raise InvalidPairError("phi1' < phi2' on the anchor side of x0; swap the pair")
    top = SymbolEp(p).max_value
    lo = top / float(phi1.deriv1(x0)) ** 2
    hi = top / a1**2
    return (lo, hi)


# ------------------------------------------------------------- pack counts


class Monotonic(str, enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    MIXED = "mixed"


@dataclass(frozen=True)
class PackReport:
    """Counts of normalized frequencies per cell ``(y_{i-1}, y_i]`` of a uniform partition."""

    interval: tuple[float, float]
    r: int
    counts: list[int]
    monotonic: Monotonic
    edges: list[float] = field(repr=False)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def table(self) -> tuple[list[str], list[list[Any]]]:
        rows = [[i + 1, self.edges[i], self.edges[i + 1], c] for i, c in enumerate(self.counts)]
        return ["cell", "y_left", "y_right", "count"], rows


def pack_counts(spec: DiscreteSpectrum, interval: tuple[float, float], r: int) -> PackReport:
    """Split the interval into ``r`` equal cells and count frequencies in each."""
    if r < 2:
        raise InvalidArgumentError(f"r must be >= 2, got {r}")
    lo, hi = float(interval[0]), float(interval[1])
    if not 0.0 <= lo < hi:
        raise InvalidArgumentError(f"invalid interval ({lo}, {hi})")
    edges = lo + (hi - lo) * np.arange(r + 1) / r
    edges[-1] = hi
    cum = np.searchsorted(spec.normalized_frequencies, edges, side="right")
    counts = np.diff(cum).astype(int).tolist()
    if all(b > a for a, b in zip(counts, counts[1:])):
        mono = Monotonic.INCREASING
    elif _strictly_decreasing(counts):
        mono = Monotonic.DECREASING
    else:
        mono = Monotonic.MIXED
    return PackReport((lo, hi), r, counts, mono, edges.tolist())


def concave_window(phi: Reparametrization, lo: float = 0.1, hi: float = 0.9) -> tuple[float, float]:
    """``[lo, hi] * sqrt(6) / max phi'``; for degree one ``Psi`` is strictly concave there."""
    if not 0.0 <= lo < hi <= 1.0:
        raise InvalidArgumentError("need 0 <= lo < hi <= 1")
    if not phi.is_strict:
        raise UnsupportedOperationError("the concavity window needs a strictly convex or concave map")
    w = math.sqrt(6.0) / phi.max_deriv
    return (lo * w, hi * w)


# ---------------------------------------------------------------- outliers


@dataclass(frozen=True)
class OutlierTrend:
    p: int
    n_values: list[int]
    sizes: list[int]
    outliers: list[int]

    @property
    def ratios(self) -> list[float]:
        return [o / s for o, s in zip(self.outliers, self.sizes)]

    @property
    def constant(self) -> bool:
        return len(set(self.outliers)) == 1

    @property
    def ratio_scales_inversely(self) -> bool:
        """``OUT/N`` shrinks in proportion to ``1/N`` between consecutive ``n``."""
        r = self.ratios
        return self.constant and all(
            math.isclose(r[i + 1], r[i] * self.sizes[i] / self.sizes[i + 1], rel_tol=1e-12, abs_tol=0.0)
            for i in range(len(r) - 1)
        )

    @property
    def ratio_nonincreasing(self) -> bool:
        return _nonincreasing(self.ratios)

    def table(self) -> tuple[list[str], list[list[Any]]]:
        rows = [[n, s, o, q] for n, s, o, q in zip(self.n_values, self.sizes, self.outliers, self.ratios)]
        return ["n", "N", "out", "out_over_N"], rows


def outlier_trend(
    p: int, phi: Reparametrization, n_values: Sequence[int], spectra: Sequence[DiscreteSpectrum] | None = None
) -> OutlierTrend:
    """Outlier counts across an ascending ladder of at least three ``n``."""
    ns = list(n_values)
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvalidArgumentError("need at least three ascending n values")
    if spectra is None:
        spectra = spectra_for_ladder(p, phi, ns)
    return OutlierTrend(
        p=p,
        n_values=ns,
        sizes=[s.N for s in spectra],
        outliers=[s.outlier_count for s in spectra],
    )


# ------------------------------------------------------------ serialization


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def report_dict(report: Any) -> dict[str, Any]:
    """Dataclass fields in declaration order, plus derived flags."""
    out = _jsonable(asdict(report))
    for name in ("nonincreasing", "ordering_holds", "total", "ratios", "constant", "ratio_scales_inversely"):
        if hasattr(type(report), name):
            out[name] = _jsonable(getattr(report, name))
    return out


def write_json(report: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report if isinstance(report, dict) else report_dict(report), fh, indent=2)
        fh.write("\n")


def _fmt(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return v


def write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
