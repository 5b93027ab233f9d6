import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.special import kolmogorov

from isofield.errors import DomainError
from isofield.stat_tests import (
    TestReport,
    as_sample_matrix,
    binomial_band,
    distance_covariance,
    energy_two_sample,
    independence_test,
    jarque_bera,
    ks_two_sample,
)


def dcov_oracle(X, Y):
    """dCov^2 V-statistic from the three-sum formula, with explicit loops."""
    n = len(X)
    a = [[float(np.linalg.norm(X[i] - X[j])) for j in range(n)] for i in range(n)]
    b = [[float(np.linalg.norm(Y[i] - Y[j])) for j in range(n)] for i in range(n)]
    s1 = sum(a[i][j] * b[i][j] for i in range(n) for j in range(n)) / n ** 2
    s2 = sum(map(sum, a)) * sum(map(sum, b)) / n ** 4
    s3 = sum(a[i][j] * b[i][k] for i in range(n) for j in range(n) for k in range(n)) / n ** 3
    return s1 + s2 - 2 * s3


def energy_oracle(X, Y):
    n, m = len(X), len(Y)
    xy = sum(np.linalg.norm(x - y) for x in X for y in Y) / (n * m)
    xx = sum(np.linalg.norm(x - y) for x in X for y in X) / n ** 2
    yy = sum(np.linalg.norm(x - y) for x in Y for y in Y) / m ** 2
    return n * m / (n + m) * (2 * xy - xx - yy)


@pytest.mark.parametrize("n,dx,dy", [(5, 1, 1), (20, 2, 3), (40, 1, 2)])
def test_dcov_matches_oracle(n, dx, dy, gen):
    X, Y = gen.standard_normal((n, dx)), gen.standard_normal((n, dy))
    assert abs(distance_covariance(X, Y) - dcov_oracle(X, Y)) < 1e-12


def test_dcov_properties(gen):
    X = gen.standard_normal((30, 2))
    assert distance_covariance(X, X[:, :1] * 0 + 1.0) == pytest.approx(0.0, abs=1e-14)
    assert distance_covariance(X, X) > 0
    # invariant under translation and orthogonal maps of each argument
    Q, _ = np.linalg.qr(gen.standard_normal((2, 2)))
    Y = gen.standard_normal((30, 1))
    assert distance_covariance(X @ Q + 3.0, Y) == pytest.approx(distance_covariance(X, Y), rel=1e-10)


def test_complex_input_splits_into_real_parts():
    z = np.array([1 + 2j, 3 - 1j, 0.5j])
    np.testing.assert_array_equal(as_sample_matrix(z), [[1, 2], [3, -1], [0, 0.5]])
    with pytest.raises(DomainError):
        as_sample_matrix([1.0])
    with pytest.raises(DomainError):
        as_sample_matrix([1.0, np.nan])


def test_energy_statistic_matches_oracle(gen):
    X, Y = gen.standard_normal((15, 2)), gen.standard_normal((11, 2)) + 0.5
    rep = energy_two_sample(X, Y, n_perm=99, seed=0)
    assert rep.statistic == pytest.approx(energy_oracle(X, Y), rel=1e-12)


def test_independence_detects_dependence(gen):
    x = gen.standard_normal(200)
    y = x ** 2 + 0.1 * gen.standard_normal(200)  # uncorrelated but dependent
    assert independence_test(x, y, n_perm=199, seed=1).p_value <= 0.01


def test_energy_detects_shift(gen):
    rep = energy_two_sample(gen.standard_normal((200, 2)), gen.standard_normal((200, 2)) + 0.5, seed=1)
    assert rep.reject and rep.p_value == pytest.approx(1 / 200)


def test_permutation_p_value_form_and_determinism(gen):
    x, y = gen.standard_normal(50), gen.standard_normal(50)
    r1 = independence_test(x, y, n_perm=99, seed=7)
    r2 = independence_test(x, y, n_perm=99, seed=7)
    assert r1.to_dict() == r2.to_dict()
    assert (r1.p_value * 100) == pytest.approx(round(r1.p_value * 100))
    assert r1.n_permutations == 99 and not r1.asymptotic


def test_permutation_argument_validation(gen):
    x = gen.standard_normal(30)
    with pytest.raises(DomainError):
        independence_test(x, x, n_perm=50)
    with pytest.raises(DomainError):
        independence_test(x, x[:20])
    with pytest.raises(DomainError):
        energy_two_sample(x, x, n_perm=10)
    with pytest.raises(DomainError):
        energy_two_sample(gen.standard_normal((5, 2)), gen.standard_normal((5, 3)))


def test_ks_matches_scipy_statistic(gen):
    x, y = gen.standard_normal(300), gen.standard_normal(250) + 0.2
    rep = ks_two_sample(x, y)
    assert rep.statistic == pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-15)
    en = 300 * 250 / 550
    assert rep.p_value == pytest.approx(kolmogorov(np.sqrt(en) * rep.statistic), rel=1e-12)
    assert rep.asymptotic
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])


def test_jarque_bera_matches_scipy(gen):
    x = gen.exponential(size=500)
    rep = jarque_bera(x)
    ref = stats.jarque_bera(x)
    assert rep.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert rep.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-300)
    with pytest.raises(DomainError):
        jarque_bera(np.ones(10))
    with pytest.raises(DomainError):
        jarque_bera(np.ones(30))


def test_binomial_band():
    lo, hi = binomial_band(200, 0.05)
    assert lo < 10 < hi
    assert stats.binom.cdf(lo - 1, 200, 0.05) <= 0.005
    assert stats.binom.sf(hi, 200, 0.05) <= 0.005


@given(st.floats(-1, 2), st.floats(0.001, 0.5))
def test_report_clips_p_value(p, alpha):
    rep = TestReport("t", 1.0, p, alpha)
    assert 0.0 <= rep.p_value <= 1.0
    assert rep.reject == (rep.p_value <= alpha)
    assert rep.with_alpha(0.9).alpha == 0.9


def test_null_calibration_small():
    # quick version of the acceptance check: 60 null runs stay inside the 99% band
    gen = np.random.default_rng(0)
    rej = sum(independence_test(gen.standard_normal(30), gen.standard_normal(30), 99, seed=s).reject
              for s in range(60))
    lo, hi = binomial_band(60, 0.05)
    assert lo <= rej <= hi
