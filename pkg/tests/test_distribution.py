import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from igaweyl.distribution import (
    GammaSlope,
    NumericalWarning,
    PsiFunction,
    PsiMethod,
    Rearrangement,
    eval_psi,
    eval_xi,
    explicit_p1_branches,
    slope_at_zero,
    slope_bounds,
    write_psi_csv,
    write_xi_csv,
    xi_linear_check,
)
from igaweyl.errors import InvalidArgumentError, UnsupportedOperationError
from igaweyl.reparam import make_exp_convex, make_log_concave, mirror
from igaweyl.symbol import FullSymbol, SymbolEp, eval_ep

STRICT = {
    "exp": make_exp_convex(1.0, 0.5),
    "log": make_log_concave(1.0, 0.5),
    "mirror": mirror(make_exp_convex(2.0, 0.3)),
}


def psi_for(p, phi, method=None):
    return PsiFunction.build(FullSymbol.build(p, phi), method)


def probes(psi, count=32):
    return np.linspace(0.0, psi.max_y, count + 2)[1:-1]


class TestBuild:
    def test_defaults(self, exp_phi, id_phi):
        assert psi_for(1, exp_phi).method is PsiMethod.EXPLICIT_P1
        assert psi_for(2, exp_phi).method is PsiMethod.INTEGRAL_1D
        assert psi_for(2, id_phi).method is PsiMethod.NEUTRAL_EXACT

    def test_neutral_unsupported(self, id_phi):
        for m in ("explicit_p1", "integral_1d"):
            with pytest.raises(UnsupportedOperationError):
                psi_for(1, id_phi, m)

    def test_explicit_only_degree_one(self, exp_phi):
        with pytest.raises(InvalidArgumentError):
            psi_for(2, exp_phi, "explicit_p1")


class TestCrossValidation:
    @pytest.mark.parametrize("name", list(STRICT))
    def test_degree_one_methods_agree(self, name):
        phi = STRICT[name]
        ys = probes(psi_for(1, phi))
        ex = eval_psi(psi_for(1, phi, "explicit_p1"), ys)
        it = eval_psi(psi_for(1, phi, "integral_1d"), ys)
        gr = eval_psi(psi_for(1, phi, "grid_2d_oracle"), ys)
        np.testing.assert_allclose(ex, it, atol=1e-9)
        np.testing.assert_allclose(ex, gr, atol=2e-3)

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("name", list(STRICT))
    def test_integral_matches_grid(self, p, name):
        phi = STRICT[name]
        ys = probes(psi_for(p, phi))
        np.testing.assert_allclose(
            eval_psi(psi_for(p, phi), ys), eval_psi(psi_for(p, phi, "grid_2d_oracle"), ys), atol=2e-3
        )

    def test_identity_arccos_form(self, id_phi):
        ys = np.linspace(0, math.sqrt(12), 40)
        ref = np.arccos((6 - 2 * ys**2) / (6 + ys**2))
        np.testing.assert_allclose(eval_psi(psi_for(1, id_phi), ys), ref, atol=1e-12)
        np.testing.assert_allclose(eval_psi(psi_for(1, id_phi, "grid_2d_oracle"), ys), ref, atol=2e-3)
        assert eval_psi(psi_for(1, id_phi), math.sqrt(12)) == pytest.approx(math.pi)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("name", list(STRICT))
def test_psi_endpoints_and_monotone(p, name):
    psi = psi_for(p, STRICT[name])
    assert eval_psi(psi, 0.0) == 0.0
    assert eval_psi(psi, psi.max_y) == math.pi
    vals = eval_psi(psi, np.linspace(0, psi.max_y, 1000))
    assert np.all(np.diff(vals[:-1]) > 0)


def test_concave_on_certified_window(exp_phi):
    psi = psi_for(1, exp_phi)
    top = math.sqrt(6) / exp_phi.deriv_at_1
    ys = np.linspace(0, top, 66)[1:-1]
    second = np.diff(eval_psi(psi, ys), 2)
    assert np.all(second < 0)


@pytest.mark.parametrize("name", ["exp", "log"])
def test_breakpoint_glue(name):
    phi = STRICT[name]
    psi = psi_for(1, phi)
    yb = math.sqrt(12) / phi.max_deriv
    whole, split = explicit_p1_branches(psi, yb)
    assert abs(whole - split) <= 1e-8
    lo, hi = eval_psi(psi, yb * (1 - 1e-12)), eval_psi(psi, yb * (1 + 1e-12))
    assert abs(lo - hi) <= 1e-8


def test_psi_rejects_negative(exp_phi):
    with pytest.raises(InvalidArgumentError):
        eval_psi(psi_for(1, exp_phi), -1.0)


class TestRearrangement:
    @pytest.mark.parametrize("p", [1, 2])
    @pytest.mark.parametrize("name", ["exp", "log"])
    def test_round_trip(self, p, name, rng):
        re = Rearrangement(psi_for(p, STRICT[name]))
        x = rng.uniform(0, 1, 1000)
        np.testing.assert_allclose(eval_psi(re.psi, eval_xi(re, x)), math.pi * x, atol=1e-9)

    def test_identity_closed_form(self, id_phi):
        re = Rearrangement(psi_for(1, id_phi))
        x = np.linspace(0, 1, 64)
        np.testing.assert_allclose(eval_xi(re, x), np.sqrt(eval_ep(SymbolEp(1), np.pi * x)), atol=1e-8)

    def test_endpoints(self, log_phi):
        re = Rearrangement(psi_for(2, log_phi))
        assert eval_xi(re, 0.0) == 0.0
        assert eval_xi(re, 1.0) == re.psi.max_y

    def test_monotone_and_lipschitz(self, exp_phi):
        re = Rearrangement(psi_for(1, exp_phi))
        x = np.linspace(0, 0.9, 200)
        s = eval_xi(re, x)
        assert np.all(np.diff(s) > 0)
        # Psi' is bounded below on the probed range, so sqrt(xi) is Lipschitz there
        ys = np.linspace(0, s[-1], 400)
        slope_min = np.min(np.diff(eval_psi(re.psi, ys)) / np.diff(ys))
        assert np.all(np.abs(np.diff(s)) <= math.pi / slope_min * np.diff(x) * (1 + 1e-6))

    @given(st.floats(0, 1))
    def test_xi_in_range(self, x):
        re = Rearrangement(psi_for(1, STRICT["exp"]))
        assert 0 <= eval_xi(re, x) <= re.psi.max_y

    def test_domain(self, exp_phi):
        with pytest.raises(InvalidArgumentError):
            eval_xi(Rearrangement(psi_for(1, exp_phi)), 1.5)


class TestSlope:
    @pytest.mark.parametrize("name", list(STRICT))
    def test_degree_one(self, name):
        s = slope_at_zero(psi_for(1, STRICT[name]))
        assert s.psi_prime_at_zero == pytest.approx(1.0, abs=0.02)
        assert s.gamma == pytest.approx(math.pi, abs=0.07)

    @pytest.mark.parametrize("p", [2, 3, 4])
    @pytest.mark.parametrize("name", list(STRICT))
    def test_bounds(self, p, name):
        s = slope_at_zero(psi_for(p, STRICT[name]))
        assert s.within_bounds

    def test_bound_values(self):
        lo, hi = slope_bounds(2)
        assert lo == pytest.approx(0.5079, abs=1e-4) and hi == pytest.approx(1.2533, abs=1e-4)
        assert slope_bounds(1) == (1.0, 1.0)

    def test_warns_outside_bounds(self):
        s = GammaSlope(3.0, slope_bounds(2))
        assert not s.within_bounds

    def test_neutral_unsupported(self, id_phi):
        with pytest.raises(UnsupportedOperationError):
            slope_at_zero(psi_for(1, id_phi))

    def test_no_warning_for_families(self, exp_phi):
        with warnings.catch_warnings():
            warnings.simplefilter("error", NumericalWarning)
            slope_at_zero(psi_for(2, exp_phi))

    def test_linear_check(self, exp_phi):
        psi = psi_for(1, exp_phi)
        ratio = xi_linear_check(Rearrangement(psi), slope_at_zero(psi), 1e-3)
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_linear_check_domain(self, exp_phi):
        psi = psi_for(1, exp_phi)
        with pytest.raises(InvalidArgumentError):
            xi_linear_check(Rearrangement(psi), slope_at_zero(psi), 0.0)


def test_csv_exports(tmp_path, exp_phi):
    psi = psi_for(1, exp_phi)
    write_psi_csv(psi, [0.0, 1.0, psi.max_y], tmp_path / "psi.csv")
    write_xi_csv(Rearrangement(psi), [0.0, 0.5, 1.0], tmp_path / "xi.csv")
    psi_lines = (tmp_path / "psi.csv").read_text().splitlines()
    xi_lines = (tmp_path / "xi.csv").read_text().splitlines()
    assert psi_lines[0] == "y,psi" and len(psi_lines) == 4
    assert float(psi_lines[3].split(",")[1]) == math.pi
    assert xi_lines[0] == "x,sqrt_xi" and float(xi_lines[1].split(",")[1]) == 0.0
