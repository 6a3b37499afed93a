import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evitest.dependence import (
    PrecisionMatrix, ZetaVector, approx_omega_from_R, elliptical_tail_dependence, load_omega,
    omega_test, statistic_T_omega, tail_dependence_matrix, wald_statistic, wald_test, zeta,
)
from evitest.errors import ParameterError, ParseError, SingularityError
from evitest.hill import HillEstimates, KChoice, hill_estimates
from evitest.maxtest import NullSpec, statistic_T
from evitest.simulate import ModelSpec, SeedSpec, generate


def make_est(g, ks, n=1000):
    g = np.asarray(g, dtype=float)
    return HillEstimates(g, KChoice(tuple(ks), n), np.ones_like(g))


def test_tail_dependence_duplicate_and_diagonal():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((400, 3))
    x = np.column_stack([x, x[:, 1]])
    s = tail_dependence_matrix(x, 40).entries
    assert s[1, 3] == 1.0
    np.testing.assert_array_equal(np.diag(s), 1.0)
    np.testing.assert_array_equal(s, s.T)
    assert np.all((s >= 0) & (s <= 1))


def test_tail_dependence_independence_floor():
    rng = np.random.default_rng(1)
    s = tail_dependence_matrix(rng.standard_normal((5000, 2)), 500).entries
    # E = k/n = 0.1; sd of the count/k is about sqrt(k (k/n)^2 ... ) / k ~ 0.013
    assert s[0, 1] == pytest.approx(0.1, abs=0.04)


def test_tail_dependence_ties_reported():
    x = np.column_stack([np.r_[np.arange(10.0), 5.0, 5.0], np.arange(12.0)])
    s = tail_dependence_matrix(x, 5)  # threshold 5 is tied three ways
    assert s.entries[0, 0] < 1.0
    assert s.notes


def test_tail_dependence_model_c_adjacent():
    x = generate(ModelSpec("C", 5000, 4), SeedSpec(9))
    s = tail_dependence_matrix(x, 500).entries
    assert s[0, 1] == pytest.approx(0.5, abs=0.05)
    assert s[0, 2] == pytest.approx(0.1, abs=0.05)


def test_zeta_examples():
    z = zeta(make_est([1.2], [100]), NullSpec.specified([1.0]))
    assert z.values[0] == pytest.approx(2.0, abs=1e-12) and not z.starred
    assert not zeta(make_est([0.5, 2.0], [10, 10]), NullSpec.specified([0.5, 2.0])).values.any()
    est = make_est([0.9, 1.3, 1.1], [30, 80, 50])
    z = zeta(est, NullSpec.specified([1.0] * 3))
    assert np.max(z.values ** 2) == pytest.approx(statistic_T(est, [1.0] * 3)[0], rel=1e-14)
    assert zeta(est, NullSpec.equal()).starred


def test_wald_examples():
    assert wald_statistic([2.0], [[1.0]]) == pytest.approx(4.0)
    v = np.array([0.3, -1.2, 2.0])
    assert wald_statistic(v, np.eye(3)) == pytest.approx(float(v @ v), rel=1e-14)
    assert wald_statistic([1.0, 1.0], [[1, 0.5], [0.5, 1]]) == pytest.approx(4 / 3, rel=1e-14)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20))
def test_wald_identity_reduction(v):
    assert wald_statistic(v, np.eye(len(v))) == pytest.approx(sum(x * x for x in v), rel=1e-12, abs=1e-12)


def test_wald_singular_and_ridge():
    s = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularityError, match="smallest pivot") as info:
        wald_statistic([1.0, 0.0], s)
    assert info.value.pivot < 1e-10
    assert wald_statistic([1.0, 0.0], s, ridge=0.5) > 0
    with pytest.raises(SingularityError):
        wald_statistic([1.0, 1.0], [[1.0, 2.0], [2.0, 1.0]])


def test_omega_from_R():
    np.testing.assert_array_equal(approx_omega_from_R(np.eye(4)).entries, np.eye(4))
    s = np.array([[1.0, 0.5], [0.5, 1.0]])
    om = approx_omega_from_R(s)
    np.testing.assert_allclose(om.entries, np.array([[1, -0.5], [-0.5, 1]]) / 0.75, atol=1e-14)
    assert om.source == "inverted_r"


def test_omega_round_trip_on_data():
    x = generate(ModelSpec("A", 1000, 20), SeedSpec(2))
    for ridge in (0.0, 0.1):
        s = tail_dependence_matrix(x, 50)
        om = approx_omega_from_R(s, ridge)
        err = om.entries @ (s.entries + ridge * np.eye(20)) - np.eye(20)
        assert np.max(np.abs(err)) <= 1e-8


def test_T_omega_examples():
    z = ZetaVector(np.array([1.0, 0.0]))
    t, contribs, j = statistic_T_omega(z, np.array([[2.0, -1.0], [-1.0, 2.0]]))
    np.testing.assert_allclose(contribs, [2.0, 0.5])
    assert t == 2.0 and j == 0
    est = make_est([0.8, 1.25, 1.1], [50, 60, 70])
    zz = zeta(est, NullSpec.specified([1.0] * 3))
    assert statistic_T_omega(zz, np.eye(3))[0] == statistic_T(est, [1.0] * 3)[0]
    assert statistic_T_omega(zz, 2 * np.eye(3))[0] == 2 * statistic_T(est, [1.0] * 3)[0]
    with pytest.raises(ParameterError):
        statistic_T_omega(zz, np.diag([1.0, 0.0, 1.0]))


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(0.05, 3), st.integers(2, 500), st.floats(0.1, 3)),
                min_size=1, max_size=15))
def test_T_omega_identity_is_T_exactly(rows):
    g, ks, g0 = map(list, zip(*rows))
    est = make_est(g, ks)
    t, contribs, j = statistic_T(est, g0)
    to, contribs_o, jo = statistic_T_omega(zeta(est, NullSpec.specified(g0)), PrecisionMatrix(np.eye(len(g))))
    assert to == t and jo == j
    np.testing.assert_array_equal(contribs, contribs_o)


def test_permutation_equivariance():
    x = generate(ModelSpec("B", 1000, 8), SeedSpec(4))
    perm = [3, 0, 6, 1, 7, 2, 5, 4]
    s = tail_dependence_matrix(x, 60).entries
    sp = tail_dependence_matrix(x[:, perm], 60).entries
    np.testing.assert_array_equal(sp, s[np.ix_(perm, perm)])
    null = NullSpec.specified([1.0] * 8)
    a = wald_test(x, 60, null)
    b = wald_test(x[:, perm], 60, null)
    assert b.statistic == pytest.approx(a.statistic, rel=1e-10)
    a = omega_test(x, 60, null)
    b = omega_test(x[:, perm], 60, null)
    assert b.statistic == pytest.approx(a.statistic, rel=1e-10)


def test_wald_test_reports():
    x = generate(ModelSpec("B", 1000, 6), SeedSpec(5))
    rep = wald_test(x, 50, NullSpec.specified([1.0] * 6))
    assert rep.test == "TW" and rep.df == 6
    assert rep.reject == (rep.statistic > rep.threshold)
    star = wald_test(x, 50, NullSpec.equal())
    assert star.test == "TW*" and star.df == 5
    with pytest.raises(ParameterError, match="common k"):
        wald_test(x, KChoice((50, 60, 50, 50, 50, 50), 1000), NullSpec.equal())


def test_wald_scalar_is_squared_z():
    rng = np.random.default_rng(12)
    x = rng.random((800, 1)) ** -1.0
    rep = wald_test(x, 80, NullSpec.specified([1.0]))
    est = hill_estimates(x, KChoice.uniform(80, 1, 800))
    assert rep.statistic == pytest.approx(80 * (est.gamma_hat[0] - 1) ** 2, rel=1e-12)
    assert rep.threshold == pytest.approx(3.841458820694124, abs=1e-9)


def test_elliptical_tail_dependence():
    assert elliptical_tail_dependence(0.0, 1.0) == pytest.approx(1 - np.sqrt(0.5), abs=1e-12)
    assert elliptical_tail_dependence(0.7, 1.0) == pytest.approx(0.6127016653792583, abs=1e-12)


def test_load_omega(tmp_path):
    f = tmp_path / "omega.txt"
    f.write_text("2 -1\n-1 2\n")
    om = load_omega(f, 2)
    assert om.source == "supplied" and om.entries[0, 1] == -1.0
    f.write_text("2 -1\n-0.9 2\n")
    with pytest.raises(ParseError, match="symmetric"):
        load_omega(f)
    f.write_text("2 -1\n-1\n")
    with pytest.raises(ParseError, match="row 2"):
        load_omega(f)
    f.write_text("2 x\n-1 2\n")
    with pytest.raises(ParseError, match="column 2"):
        load_omega(f)
    f.write_text("2 -1\n-1 2\n")
    with pytest.raises(ParameterError):
        load_omega(f, 3)
