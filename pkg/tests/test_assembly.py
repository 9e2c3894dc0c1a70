import numpy as np
import pytest
from scipy.integrate import quad
from scipy.interpolate import BSpline

from igaweyl.assembly import (
    BandedSymmetricMatrix,
    assemble,
    assemble_mass,
    assemble_stiffness,
    write_triplets,
)
from igaweyl.bspline import make_knot_vector
from igaweyl.errors import InvalidArgumentError, InvalidReparametrizationError
from igaweyl.reparam import Convexity, Reparametrization, identity, make_exp_convex, make_log_concave


def quad_oracle(p, n, phi, kind):
    """Entries by scipy adaptive quadrature over each knot interval, scipy B-splines."""
    knots = make_knot_vector(p, n).array
    size = n + p - 2
    funcs = []
    for j in range(1, p + n - 1):
        c = np.zeros(p + n)
        c[j] = 1.0
        s = BSpline(knots, c, p)
        funcs.append(s.derivative() if kind == "stiffness" else s)
    out = np.zeros((size, size))
    for i in range(size):
        for j in range(i, min(size, i + p + 1)):
            total = 0.0
            for e in range(n):
                a, b = e / n, (e + 1) / n

                def f(x):
                    d = float(phi.deriv1(np.array([x]))[0])
                    w = 1.0 / d if kind == "stiffness" else d
                    return float(funcs[i](x) * funcs[j](x)) * w

                total += quad(f, a, b, epsabs=1e-13, epsrel=1e-12)[0]
            out[i, j] = out[j, i] = total
    return out


class TestBandStorage:
    def test_round_trip(self, rng):
        a = rng.normal(size=(6, 6))
        a = a + a.T
        a[np.abs(np.subtract.outer(range(6), range(6))) > 2] = 0.0
        m = BandedSymmetricMatrix.from_dense(a, 2)
        np.testing.assert_array_equal(m.to_dense(), a)
        assert m[4, 2] == a[4, 2] and m[0, 5] == 0.0
        assert (m.size, m.bandwidth) == (6, 2)


class TestHatFunctions:
    def test_mass(self, id_phi):
        h = 0.25
        m = assemble_mass(1, 4, id_phi).to_dense()
        ref = h * (np.diag([2 / 3] * 3) + np.diag([1 / 6] * 2, 1) + np.diag([1 / 6] * 2, -1))
        np.testing.assert_allclose(m, ref, atol=1e-15)

    def test_stiffness(self, id_phi):
        k = assemble_stiffness(1, 4, id_phi).to_dense()
        ref = 4.0 * (np.diag([2.0] * 3) + np.diag([-1.0] * 2, 1) + np.diag([-1.0] * 2, -1))
        np.testing.assert_allclose(k, ref, atol=1e-13)

    def test_interior_row_sum(self, id_phi):
        m = assemble_mass(1, 4, id_phi).to_dense()
        assert m[1].sum() == pytest.approx(0.25)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_identity_matches_oracle(p, id_phi):
    n = 6
    for kind in ("mass", "stiffness"):
        np.testing.assert_allclose(
            assemble(p, n, id_phi, kind).to_dense(), quad_oracle(p, n, id_phi, kind), atol=1e-13 * n
        )


@pytest.mark.parametrize("phi", [make_exp_convex(1.0, 0.5), make_log_concave(1.0, 0.5)], ids=["exp", "log"])
def test_reparametrized_matches_oracle(phi):
    for kind in ("mass", "stiffness"):
        np.testing.assert_allclose(
            assemble(2, 8, phi, kind).to_dense(), quad_oracle(2, 8, phi, kind), atol=1e-10
        )


@pytest.mark.parametrize("p", [1, 2, 3, 5])
@pytest.mark.parametrize("phi", [identity(), make_exp_convex(2.0, 0.3), make_log_concave(0.5, 0.7)],
                         ids=["id", "exp", "log"])
class TestStructure:
    def test_symmetric_positive_definite(self, p, phi):
        for kind in ("mass", "stiffness"):
            a = assemble(p, 12, phi, kind).to_dense()
            np.testing.assert_array_equal(a, a.T)
            np.linalg.cholesky(a)

    def test_bandwidth(self, p, phi):
        a = assemble_mass(p, 12, phi)
        assert a.bandwidth == p
        dense = a.to_dense()
        i, j = np.nonzero(dense)
        assert np.max(np.abs(i - j)) <= p

    def test_interior_stiffness_rows_sum_to_zero(self, p, phi):
        n = 12
        k = assemble_stiffness(p, n, phi).to_dense()
        # interior index i (0-based) is N_{i+1}; its neighbours stay interior for p <= i+1 <= n-2
        for i in range(p, n - 2 - p + 1):
            assert abs(k[i].sum()) <= 1e-10 * np.abs(k[i]).max()


def test_toeplitz_scaling(id_phi):
    rows = []
    for n in (8, 16, 32):
        m = n * assemble_mass(3, n, id_phi).to_dense()
        k = assemble_stiffness(3, n, id_phi).to_dense() / n
        mid = (n + 1) // 2
        rows.append((m[mid, mid - 3 : mid + 4], k[mid, mid - 3 : mid + 4]))
    for m, k in rows[1:]:
        np.testing.assert_allclose(m, rows[0][0], atol=1e-13)
        np.testing.assert_allclose(k, rows[0][1], atol=1e-12)


def test_rejects_nonpositive_derivative():
    bad = Reparametrization(
        eval=lambda x: np.asarray(x, dtype=float),
        deriv1=lambda x: np.asarray(x, dtype=float) - 0.5,
        deriv2=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        convexity=Convexity.NEUTRAL,
        name="bad",
        validate=False,
    )
    with pytest.raises(InvalidReparametrizationError):
        assemble_mass(2, 4, bad)


@pytest.mark.parametrize("p, n", [(0, 4), (2, 1)])
def test_rejects_sizes(p, n, id_phi):
    with pytest.raises(InvalidArgumentError):
        assemble_mass(p, n, id_phi)


def test_unknown_kind(id_phi):
    with pytest.raises(InvalidArgumentError):
        assemble(2, 4, id_phi, "damping")


def test_triplets(tmp_path, id_phi):
    m = assemble_mass(1, 4, id_phi)
    path = tmp_path / "m.txt"
    write_triplets(m, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 7
    i, j, v = lines[1].split()
    assert (i, j) == ("1", "2") and float(v) == m[0, 1]
    back = np.zeros((3, 3))
    for line in lines:
        a, b, v = line.split()
        back[int(a) - 1, int(b) - 1] = float(v)
    np.testing.assert_array_equal(back, m.to_dense())
