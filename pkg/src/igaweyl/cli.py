"""Command-line experiment driver.

Each subcommand builds one report, writes CSV and JSON files into the output
directory and prints a short summary. Options can also come from a
``key = value`` file passed with ``--config``; flags given on the command
line take precedence. With ``--check`` the exit status reflects the
property the report is meant to exhibit.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import importlib
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import analysis as an
from .assembly import assemble_mass, assemble_stiffness, write_triplets
from .distribution import (
    GammaSlope,
    PsiFunction,
    PsiMethod,
    Rearrangement,
    eval_psi,
    eval_xi,
    slope_at_zero,
    slope_bounds,
)
from .eigensolve import compute_spectrum, write_spectrum_csv
from .errors import (
    InvalidArgumentError,
    InvalidPairError,
    InvalidReparametrizationError,
    NumericalError,
    OutOfRangeError,
    UnsupportedOperationError,
)
from .reparam import Reparametrization, identity, make_exp_convex, make_log_concave, mirror
from .symbol import FullSymbol, eval_ep, write_omega_csv

__all__ = ["main", "ExperimentConfig", "ConfigError", "build_parser", "load_config", "make_reparam"]

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

FAMILIES = ("identity", "exp_convex", "log_concave", "mirror_exp", "custom")
PAIR_ALIASES = {
    "exp": "exp_convex",
    "exp_convex": "exp_convex",
    "log": "log_concave",
    "log_concave": "log_concave",
    "mexp": "mirror_exp",
    "mirror_exp": "mirror_exp",
}
DEFAULT_LADDER = (64, 128, 256, 512)
DEFAULT_OUTLIER_LADDER = (32, 64, 128)
ESTIMATE_THRESHOLD = 0.02


class ConfigError(ValueError):
    """Invalid or incomplete configuration; maps to exit code 2."""


def _parse_ladder(text: str) -> list[int]:
    try:
        values = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"n_ladder: expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise ConfigError("n_ladder: empty")
    return values


def _parse_pair(text: str) -> list[tuple[str, float]]:
    items = [s.strip() for s in str(text).split(",")]
    if len(items) != 2:
        raise ConfigError(f"pair: expected 'family:a,family:a', got {text!r}")
    out = []
    for item in items:
        fam, _, a = item.partition(":")
        if fam not in PAIR_ALIASES or not a:
            raise ConfigError(f"pair: bad member {item!r}; use exp:A, log:A or mexp:A")
        try:
            out.append((PAIR_ALIASES[fam], float(a)))
        except ValueError as exc:
            raise ConfigError(f"pair: {a!r} is not a number") from exc
    return out


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# key -> converter; the same table validates flags and config-file entries
KEYS: dict[str, Callable[[str], Any]] = {
    "p": int,
    "n": int,
    "n_ladder": _parse_ladder,
    "family": str,
    "a": float,
    "gamma": float,
    "custom": str,
    "pair": _parse_pair,
    "psi_method": str,
    "probes": int,
    "r": int,
    "window": str,
    "out": Path,
    "seed": int,
    "check": _parse_bool,
    "dump_matrices": _parse_bool,
}


@dataclass
class ExperimentConfig:
    """Validated options for one subcommand run."""

    command: str
    p: int = 1
    n: int | None = None
    n_ladder: list[int] = field(default_factory=list)
    family: str = "identity"
    a: float | None = None
    gamma: float | None = None
    custom: str | None = None
    pair: list[tuple[str, float]] | None = None
    psi_method: str | None = None
    probes: int = 1000
    r: int = 8
    window: str = "auto-concave"
    out: Path = Path("out")
    seed: int = 0
    check: bool = False
    dump_matrices: bool = False

    def echo(self) -> dict[str, Any]:
        d = {
            "command": self.command,
            "p": self.p,
            "n": self.n,
            "n_ladder": self.n_ladder,
            "family": self.family,
            "a": self.a,
            "gamma": self.gamma,
            "pair": [list(t) for t in self.pair] if self.pair else None,
            "psi_method": self.psi_method,
            "probes": self.probes,
            "seed": self.seed,
        }
        if self.command == "pack":
            d.update(r=self.r, window=self.window)
        return d


def load_config(path: str | Path) -> dict[str, Any]:
    """Read ``key = value`` lines; ``#`` starts a comment. Keys accept ``-`` or ``_``."""
    values: dict[str, Any] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = KEYS[key](val.strip())
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    return values


def make_reparam(family: str, a: float | None, gamma: float | None, custom: str | None = None) -> Reparametrization:
    """Build a map by family name, naming the missing field on failure."""
    if family == "identity":
        return identity()
    if family == "custom":
        if not custom:
            raise ConfigError("family custom requires --custom module:attribute")
        mod, _, attr = custom.partition(":")
        try:
            obj = getattr(importlib.import_module(mod), attr)
        except (ImportError, AttributeError) as exc:
            raise ConfigError(f"custom: cannot load {custom!r}: {exc}") from exc
        obj = obj() if callable(obj) and not isinstance(obj, Reparametrization) else obj
        if not isinstance(obj, Reparametrization):
            raise ConfigError(f"custom: {custom!r} is not a Reparametrization")
        return obj
    if family not in FAMILIES:
        raise ConfigError(f"family: unknown {family!r}; choose from {', '.join(FAMILIES)}")
    for name, val in (("a", a), ("gamma", gamma)):
        if val is None:
            raise ConfigError(f"--{name} is required for family {family}")
    if family == "exp_convex":
        return make_exp_convex(a, gamma)
    if family == "log_concave":
        return make_log_concave(a, gamma)
    return mirror(make_exp_convex(a, gamma))


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.p < 1:
        raise ConfigError(f"p: degree must be >= 1, got {cfg.p}")
    if cfg.command in ("spectrum", "order", "pack") and cfg.n is None:
        raise ConfigError(f"--n is required for {cfg.command}")
    if cfg.n is not None and cfg.n < 2:
        raise ConfigError(f"n: need at least 2 intervals, got {cfg.n}")
    if any(v < 2 for v in cfg.n_ladder) or any(b <= a for a, b in zip(cfg.n_ladder, cfg.n_ladder[1:])):
        raise ConfigError(f"n_ladder: must be ascending values >= 2, got {cfg.n_ladder}")
    if cfg.command == "outliers" and len(cfg.n_ladder) < 3:
        raise ConfigError("n_ladder: outliers needs at least three values")
    if cfg.probes < 2:
        raise ConfigError(f"probes: need at least 2, got {cfg.probes}")
    if cfg.r < 2:
        raise ConfigError(f"r: need at least 2 cells, got {cfg.r}")
    if cfg.psi_method is not None and cfg.psi_method not in {m.value for m in PsiMethod}:
        raise ConfigError(f"psi_method: unknown {cfg.psi_method!r}")
    if cfg.gamma is not None and not 0.0 < cfg.gamma < 1.0:
        raise ConfigError(f"gamma: must lie in (0, 1), got {cfg.gamma}")
    if cfg.a is not None and cfg.a <= 0.0:
        raise ConfigError(f"a: must be positive, got {cfg.a}")
    if cfg.command == "order":
        if not cfg.pair:
            raise ConfigError("--pair is required for order")
        if cfg.gamma is None:
            raise ConfigError("--gamma is required for order")


def _common(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="key = value file; flags override it")
    parser.add_argument("--p", type=int, default=s, help="spline degree")
    parser.add_argument("--family", default=s, help=f"one of {', '.join(FAMILIES)}")
    parser.add_argument("--a", type=float, default=s)
    parser.add_argument("--gamma", type=float, default=s)
    parser.add_argument("--custom", default=s, help="module:attribute for family custom")
    parser.add_argument("--psi-method", default=s, help=", ".join(m.value for m in PsiMethod))
    parser.add_argument("--probes", type=int, default=s, help="probe count for tables")
    parser.add_argument("--out", default=s, help="output directory")
    parser.add_argument("--seed", type=int, default=s)
    parser.add_argument("--check", action="store_const", const=True, default=s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="igaweyl", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    s = argparse.SUPPRESS
    specs = {
        "spectrum": "eigenvalues of the reparametrized problem",
        "symbol": "symbol, counting function and rearrangement tables",
        "weyl": "counting function against Psi / pi over an n ladder",
        "order": "same-index ordering for a pair of maps",
        "pack": "frequency counts per cell of a window",
        "estimate": "sampling estimates over an n ladder",
        "outliers": "outlier counts over an n ladder",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        _common(sp)
        if name in ("spectrum", "order", "pack"):
            sp.add_argument("--n", type=int, default=s, help="number of intervals")
        if name in ("weyl", "estimate", "outliers"):
            sp.add_argument("--n-ladder", default=s, help="comma-separated n values")
        if name == "spectrum":
            sp.add_argument("--dump-matrices", action="store_const", const=True, default=s)
        if name == "order":
            sp.add_argument("--pair", default=s, help="e.g. exp:2,exp:1")
        if name == "pack":
            sp.add_argument("--window", default=s, help="auto-concave or lo,hi")
            sp.add_argument("--r", type=int, default=s, help="number of cells")
    return parser


def resolve_config(ns: argparse.Namespace) -> ExperimentConfig:
    """Merge file values with flags (flags win), convert and validate."""
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    merged: dict[str, Any] = load_config(ns.config) if hasattr(ns, "config") else {}
    for key, val in given.items():
        merged[key] = KEYS[key](val) if isinstance(val, str) and KEYS[key] is not str else val
    if "n_ladder" not in merged:
        merged["n_ladder"] = list(DEFAULT_OUTLIER_LADDER if ns.command == "outliers" else DEFAULT_LADDER)
    cfg = ExperimentConfig(command=ns.command, **merged)
    if cfg.command in ("spectrum", "order", "pack"):
        cfg.n_ladder = []
    _validate(cfg)
    return cfg


# ---------------------------------------------------------------- commands


@dataclass
class Outcome:
    summary: str
    passed: bool
    detail: str = ""


def _psi(cfg: ExperimentConfig, p: int, phi: Reparametrization) -> PsiFunction:
    return PsiFunction.build(FullSymbol.build(p, phi), cfg.psi_method)


def cmd_spectrum(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    spec = compute_spectrum(cfg.p, cfg.n, phi)
    write_spectrum_csv(spec, cfg.out / "spectrum.csv")
    lam = spec.eigenvalues
    ok = spec.N == cfg.n + cfg.p - 2 and bool(np.all(lam > 0.0)) and bool(np.all(np.diff(lam) >= 0.0))
    an.write_json(
        {
            "config": cfg.echo(),
            "N": spec.N,
            "outliers": spec.outlier_count,
            "max_range": spec.max_range,
            "near_ties": spec.near_ties.tolist(),
        },
        cfg.out / "spectrum.json",
    )
    if cfg.dump_matrices:
        write_triplets(assemble_mass(cfg.p, cfg.n, phi), cfg.out / "mass.txt")
        write_triplets(assemble_stiffness(cfg.p, cfg.n, phi), cfg.out / "stiffness.txt")
    return Outcome(f"N={spec.N} OUT={spec.outlier_count} max_range={spec.max_range:.17g}", ok)


def cmd_symbol(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    sym = FullSymbol.build(cfg.p, phi)
    psi = _psi(cfg, cfg.p, phi)
    theta = np.linspace(0.0, np.pi, cfg.probes)
    an.write_csv(["theta", "e_p"], list(zip(theta, np.asarray(eval_ep(sym.ep, theta)))), cfg.out / "symbol.csv")
    side = max(2, int(math.isqrt(cfg.probes)))
    write_omega_csv(sym, side, side, cfg.out / "omega.csv")
    ys = np.linspace(0.0, psi.max_y, cfg.probes)
    an.write_csv(["y", "psi"], list(zip(ys, np.asarray(eval_psi(psi, ys)))), cfg.out / "psi.csv")
    xs = np.linspace(0.0, 1.0, cfg.probes)
    an.write_csv(["x", "sqrt_xi"], list(zip(xs, np.asarray(eval_xi(Rearrangement(psi), xs)))), cfg.out / "xi.csv")
    report: dict[str, Any] = {
        "config": cfg.echo(),
        "psi_method": psi.method.value,
        "e_p_max": sym.ep.max_value,
        "omega_max": sym.max_value,
        "slope_bounds": list(slope_bounds(cfg.p)),
    }
    if phi.is_strict:
        slope = slope_at_zero(psi)
        report.update(psi_prime_at_zero=slope.psi_prime_at_zero, gamma=slope.gamma, within_bounds=slope.within_bounds)
        ok = slope.within_bounds
        summary = f"omega_max={sym.max_value:.17g} psi'(0)={slope.psi_prime_at_zero:.17g}"
    else:
        # constant phi' = 1: Psi(y) = e_p^{-1}(y^2), slope 1 exactly
        report.update(psi_prime_at_zero=1.0, gamma=math.pi, within_bounds=True)
        ok = True
        summary = f"omega_max={sym.max_value:.17g} psi'(0)=1"
    an.write_json(report, cfg.out / "symbol.json")
    return Outcome(summary, ok)


def cmd_weyl(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    psi = _psi(cfg, cfg.p, phi)
    probes = np.linspace(0.0, psi.max_y, cfg.probes)
    specs = an.spectra_for_ladder(cfg.p, phi, cfg.n_ladder)
    rep = an.merge_weyl_reports([an.weyl_counting(s, psi, probes) for s in specs])
    an.write_csv(*rep.table(), cfg.out / "weyl.csv")
    d = an.report_dict(rep)
    del d["pointwise_errors"], d["probe_y"]
    an.write_json({"config": cfg.echo(), **d}, cfg.out / "weyl.json")
    ok = rep.nonincreasing and all(math.isfinite(e) and e >= 0.0 for e in rep.sup_errors)
    errs = " ".join(f"{e:.6g}" for e in rep.sup_errors)
    return Outcome(f"sup_errors=[{errs}] nonincreasing={rep.nonincreasing}", ok)


def cmd_order(cfg: ExperimentConfig, phi: Reparametrization | None) -> Outcome:
    maps = [make_reparam(fam, a, cfg.gamma) for fam, a in cfg.pair]
    phi1, phi2 = an.orient_pair(*maps)
    interval = an.ordering_hypothesis_from_family(phi1, phi2, cfg.p)
    s1 = compute_spectrum(cfg.p, cfg.n, phi1)
    s2 = compute_spectrum(cfg.p, cfg.n, phi2)
    rep = an.verify_ordering(s1, s2, _psi(cfg, cfg.p, phi1), _psi(cfg, cfg.p, phi2), interval)
    l1, l2 = s1.normalized_eigenvalues, s2.normalized_eigenvalues
    lo, hi = interval
    rows = [
        [k + 1, math.sqrt(u), math.sqrt(v), int(lo <= u <= hi and lo <= v <= hi), int(u < v)]
        for k, (u, v) in enumerate(zip(l1, l2))
    ]
    an.write_csv(["k", "freq_phi1", "freq_phi2", "in_interval", "phi1_below"], rows, cfg.out / "order.csv")
    an.write_json(
        {"config": cfg.echo(), "phi1": phi1.label(), "phi2": phi2.label(), **an.report_dict(rep)},
        cfg.out / "order.json",
    )
    return Outcome(
        f"phi1={phi1.label()} phi2={phi2.label()} interval=({lo:.6g}, {hi:.6g}) "
        f"pairs={rep.pair_count} violations={len(rep.violations)} hypothesis={rep.hypothesis_verified}",
        rep.ordering_holds,
    )


def _window(cfg: ExperimentConfig, phi: Reparametrization) -> tuple[tuple[float, float], bool]:
    if cfg.window == "auto-concave":
        # certified only for degree one
        return an.concave_window(phi), cfg.p == 1
    try:
        lo, hi = (float(v) for v in cfg.window.split(","))
    except ValueError as exc:
        raise ConfigError(f"window: expected auto-concave or lo,hi, got {cfg.window!r}") from exc
    return (lo, hi), False


def cmd_pack(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    interval, certified = _window(cfg, phi)
    spec = compute_spectrum(cfg.p, cfg.n, phi)
    rep = an.pack_counts(spec, interval, cfg.r)
    an.write_csv(*rep.table(), cfg.out / "pack.csv")
    an.write_json({"config": cfg.echo(), "certified_concave": certified, **an.report_dict(rep)}, cfg.out / "pack.json")
    ok = rep.monotonic is an.Monotonic.DECREASING if certified else True
    return Outcome(f"counts={rep.counts} monotonic={rep.monotonic.value} certified={certified}", ok)


def cmd_estimate(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    psi = _psi(cfg, cfg.p, phi)
    re = Rearrangement(psi)
    if phi.is_strict:
        gamma = slope_at_zero(psi)
    else:
        gamma = GammaSlope(1.0, slope_bounds(cfg.p))
    specs = an.spectra_for_ladder(cfg.p, phi, cfg.n_ladder)
    reps = [an.estimate_errors(s, re, gamma) for s in specs]
    header = ["n", "abs_error", "scaled_error", "weighted_rel_error", "uniform_rel_error"]
    rows = [[r.n, r.abs_error, r.scaled_error, r.weighted_rel_error, r.uniform_rel_error] for r in reps]
    an.write_csv(header, rows, cfg.out / "estimate.csv")
    an.write_json(
        {"config": cfg.echo(), "gamma": gamma.gamma, "reports": [an.report_dict(r) for r in reps]},
        cfg.out / "estimate.json",
    )
    errs = [r.abs_error for r in reps]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    ok = decreasing and errs[-1] < ESTIMATE_THRESHOLD
    shown = " ".join(f"{e:.6g}" for e in errs)
    return Outcome(f"abs_error=[{shown}] decreasing={decreasing}", ok)


def cmd_outliers(cfg: ExperimentConfig, phi: Reparametrization) -> Outcome:
    trend = an.outlier_trend(cfg.p, phi, cfg.n_ladder)
    an.write_csv(*trend.table(), cfg.out / "outliers.csv")
    an.write_json({"config": cfg.echo(), **an.report_dict(trend)}, cfg.out / "outliers.json")
    ok = trend.constant and trend.ratio_scales_inversely
    return Outcome(f"out={trend.outliers} constant={trend.constant}", ok)


COMMANDS: dict[str, Callable[[ExperimentConfig, Any], Outcome]] = {
    "spectrum": cmd_spectrum,
    "symbol": cmd_symbol,
    "weyl": cmd_weyl,
    "order": cmd_order,
    "pack": cmd_pack,
    "estimate": cmd_estimate,
    "outliers": cmd_outliers,
}

_USAGE_ERRORS = (
    ConfigError,
    InvalidArgumentError,
    InvalidPairError,
    InvalidReparametrizationError,
    OutOfRangeError,
    UnsupportedOperationError,
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        phi = None if cfg.command == "order" else make_reparam(cfg.family, cfg.a, cfg.gamma, cfg.custom)
        cfg.out.mkdir(parents=True, exist_ok=True)
        outcome = COMMANDS[cfg.command](cfg, phi)
    except _USAGE_ERRORS as exc:
        print(f"igaweyl {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError) as exc:
        print(f"igaweyl {ns.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{cfg.command}: {outcome.summary}")
    if cfg.check:
        print(f"check: {'PASS' if outcome.passed else 'FAIL'}")
        return EXIT_PASS if outcome.passed else EXIT_CHECK_FAILED
    return EXIT_PASS


if __name__ == "__main__":
    raise SystemExit(main())
