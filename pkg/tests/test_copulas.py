import itertools
import math

import numpy as np
import pytest
from scipy import integrate, stats

from evtest.copulas import (CopulaModel, Family, frank_tau, kendall_tau_empirical, param_to_tau,
                            plackett_cdf, positive_stable, sample, t4_cdf, tau_to_param)
from evtest.errors import InvalidModel, UnattainableTau


def kendall_loop(a, b):
    n = len(a)
    s = 0
    for i, k in itertools.combinations(range(n), 2):
        s += np.sign(a[i] - a[k]) * np.sign(b[i] - b[k])
    return s / (n * (n - 1) / 2)


# closed-form bivariate cdfs used as oracles for the samplers
def cdf_gh(u, v, th):
    return np.exp(-((-np.log(u)) ** th + (-np.log(v)) ** th) ** (1 / th))


def cdf_clayton(u, v, th):
    return (u ** -th + v ** -th - 1) ** (-1 / th)


def cdf_frank(u, v, th):
    return -np.log1p(np.expm1(-th * u) * np.expm1(-th * v) / np.expm1(-th)) / th


def cdf_normal(u, v, rho):
    mvn = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]])
    return np.array([mvn.cdf([stats.norm.ppf(a), stats.norm.ppf(b)]) for a, b in zip(u, v)])


def cdf_t4(u, v, rho):
    mvt = stats.multivariate_t([0, 0], [[1, rho], [rho, 1]], df=4)
    q = stats.t(4).ppf
    return np.array([mvt.cdf([q(a), q(b)], maxpts=200_000, random_state=1) for a, b in zip(u, v)])


def test_kendall_examples():
    assert kendall_tau_empirical(np.array([[1, 1], [2, 2], [3, 3]])) == 1.0
    assert kendall_tau_empirical(np.array([[1, 3], [2, 2], [3, 1]])) == -1.0
    assert kendall_tau_empirical(np.array([[1, 1], [2, 3], [3, 2]])) == pytest.approx(1 / 3)


@pytest.mark.parametrize("seed", range(5))
def test_kendall_matches_pair_loop(seed):
    x = np.random.default_rng(seed).integers(0, 6, size=(40, 2)).astype(float)
    assert kendall_tau_empirical(x) == pytest.approx(kendall_loop(x[:, 0], x[:, 1]), abs=1e-12)


@pytest.mark.parametrize("family,tau,theta", [
    (Family.GUMBEL_HOUGAARD, 0.75, 4.0),
    (Family.CLAYTON, 0.5, 2.0),
    (Family.NORMAL, 0.5, math.sqrt(0.5)),
    (Family.STUDENT_T4, 0.5, math.sqrt(0.5)),
])
def test_closed_form_calibration(family, tau, theta):
    assert tau_to_param(family, tau) == pytest.approx(theta, abs=1e-12)


@pytest.mark.parametrize("tau", [0.25, 0.5, 0.75, -0.3])
def test_frank_calibration_against_quadrature(tau):
    th = tau_to_param(Family.FRANK, tau)
    # independent form: tau = 1 - 4/theta + 4/theta^2 * int_0^theta t/(e^t-1) dt
    integral, _ = integrate.quad(lambda t: t / math.expm1(t) if t else 1.0, 0, abs(th))
    direct = 1 - 4 / abs(th) + 4 / th ** 2 * integral
    assert math.copysign(direct, th) == pytest.approx(tau, abs=1e-8)
    assert frank_tau(th) == pytest.approx(tau, abs=1e-10)


@pytest.mark.parametrize("tau", [0.25, 0.5, 0.75])
def test_plackett_calibration_against_derivative_form(tau):
    th = tau_to_param(Family.PLACKETT, tau)
    h = 1e-6

    def dcu(u, v):
        return (plackett_cdf(u + h, v, th) - plackett_cdf(u - h, v, th)) / (2 * h)

    def dcv(u, v):
        return (plackett_cdf(u, v + h, th) - plackett_cdf(u, v - h, th)) / (2 * h)

    val, _ = integrate.dblquad(lambda v, u: dcu(u, v) * dcv(u, v), 2e-6, 1 - 2e-6, 2e-6, 1 - 2e-6,
                               epsabs=1e-9)
    assert 1 - 4 * val == pytest.approx(tau, abs=2e-5)


def test_calibration_round_trip():
    for fam in (Family.GUMBEL_HOUGAARD, Family.CLAYTON, Family.FRANK, Family.NORMAL,
                Family.STUDENT_T4, Family.PLACKETT):
        for tau in (0.1, 0.4, 0.8):
            m = CopulaModel.from_tau(fam, tau)
            assert param_to_tau(m) == pytest.approx(tau, abs=1e-9)


def test_unattainable_tau():
    with pytest.raises(UnattainableTau):
        tau_to_param(Family.GUMBEL_HOUGAARD, -0.2)
    with pytest.raises(UnattainableTau):
        tau_to_param(Family.CLAYTON, 0.0)
    with pytest.raises(UnattainableTau):
        tau_to_param(Family.NORMAL, 1.0)
    with pytest.raises(UnattainableTau):
        tau_to_param(Family.INDEPENDENCE, 0.3)


def test_model_validation():
    bad = [
        dict(family=Family.GUMBEL_HOUGAARD, theta=0.5),
        dict(family=Family.CLAYTON, theta=-1.0),
        dict(family=Family.FRANK, theta=0.0),
        dict(family=Family.FRANK, theta=-2.0, d=3),
        dict(family=Family.NORMAL, theta=-0.6, d=3),
        dict(family=Family.PLACKETT, theta=2.0, d=3),
        dict(family=Family.KHOUDRAJI_GH, theta=2.0, lam=(0.5, 0.5)),
        dict(family=Family.KHOUDRAJI_GH, theta=2.0, lam=(0.5, 1.0)),
        dict(family=Family.INDEPENDENCE, d=1),
    ]
    for kw in bad:
        with pytest.raises(InvalidModel):
            CopulaModel(**kw)


def test_family_parse():
    assert Family.parse("gumbel") is Family.GUMBEL_HOUGAARD
    assert Family.parse("t") is Family.STUDENT_T4
    with pytest.raises(InvalidModel):
        Family.parse("joe")


ALL_MODELS = [
    CopulaModel.from_tau(Family.GUMBEL_HOUGAARD, 0.5, 3),
    CopulaModel(Family.KHOUDRAJI_GH, 3, 4.0, (0.2, 0.4, 0.95)),
    CopulaModel.from_tau(Family.CLAYTON, 0.75, 4),
    CopulaModel.from_tau(Family.FRANK, 0.75, 3),
    CopulaModel.from_tau(Family.FRANK, -0.5, 2),
    CopulaModel.from_tau(Family.NORMAL, 0.75, 5),
    CopulaModel.from_tau(Family.STUDENT_T4, 0.25, 3),
    CopulaModel.from_tau(Family.PLACKETT, 0.75),
    CopulaModel(Family.INDEPENDENCE, 4),
    CopulaModel(Family.COMONOTONE, 3),
]


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.family.value}-d{m.d}")
def test_samples_inside_unit_cube_and_reproducible(model):
    u = sample(model, 2000, 5)
    assert u.shape == (2000, model.d)
    assert np.all((u > 0) & (u < 1))
    assert sample(model, 2000, 5).tobytes() == u.tobytes()
    assert sample(model, 2000, 6).tobytes() != u.tobytes()


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.family.value}-d{m.d}")
def test_margins_uniform(model):
    u = sample(model, 20000, 8)
    for j in range(model.d):
        assert stats.kstest(u[:, j], "uniform").pvalue > 1e-4


def test_comonotone_rows_share_ranks():
    u = sample(CopulaModel(Family.COMONOTONE, 3), 100, 1)
    r = np.argsort(np.argsort(u, axis=0), axis=0)
    assert np.all(r[:, 0] == r[:, 1]) and np.all(r[:, 1] == r[:, 2])


def test_independence_tau_near_zero():
    u = sample(CopulaModel(Family.INDEPENDENCE, 2), 20000, 3)
    assert abs(kendall_tau_empirical(u)) < 0.015


GRID = np.array([(a, b) for a in (0.1, 0.3, 0.5, 0.7, 0.9) for b in (0.2, 0.5, 0.8)])


@pytest.mark.parametrize("family,tau,cdf", [
    (Family.GUMBEL_HOUGAARD, 0.5, cdf_gh),
    (Family.CLAYTON, 0.5, cdf_clayton),
    (Family.FRANK, 0.5, cdf_frank),
    (Family.FRANK, -0.4, cdf_frank),
    (Family.NORMAL, 0.5, cdf_normal),
    (Family.STUDENT_T4, 0.5, cdf_t4),
    (Family.PLACKETT, 0.5, plackett_cdf),
])
def test_sampler_matches_cdf(family, tau, cdf):
    model = CopulaModel.from_tau(family, tau)
    n = 100_000
    u = sample(model, n, 21)
    emp = np.array([np.mean((u[:, 0] <= a) & (u[:, 1] <= b)) for a, b in GRID])
    truth = cdf(GRID[:, 0], GRID[:, 1], model.theta)
    se = np.sqrt(truth * (1 - truth) / n)
    assert np.all(np.abs(emp - truth) <= 4.5 * se)


def test_higher_dimensional_pairs_share_tau():
    u = sample(CopulaModel.from_tau(Family.CLAYTON, 0.5, 4), 4000, 2)
    for j, k in itertools.combinations(range(4), 2):
        assert kendall_tau_empirical(u, j, k) == pytest.approx(0.5, abs=0.03)


def test_khoudraji_tau():
    # pairwise tau of the asymmetric model with shapes (0.4, 0.95), theta = 4
    u = sample(CopulaModel(Family.KHOUDRAJI_GH, 2, 4.0, (0.4, 0.95)), 40000, 4)
    assert abs(kendall_tau_empirical(u) - 0.34) <= 0.01


def test_khoudraji_margins_ks():
    n = 100_000
    u = sample(CopulaModel(Family.KHOUDRAJI_GH, 3, 4.0, (0.2, 0.4, 0.95)), n, 9)
    for j in range(3):
        s = np.sort(u[:, j])
        grid = np.arange(1, n + 1) / n
        dev = max(np.max(grid - s), np.max(s - (grid - 1 / n)))
        assert dev < 1.63 / math.sqrt(n)


def test_t4_cdf_against_scipy():
    x = np.array([-1e6, -50, -3.2, -1, -1e-3, 0, 0.5, 2, 40, 1e8])
    np.testing.assert_allclose(t4_cdf(x), stats.t(4).cdf(x), rtol=1e-10, atol=1e-300)


def test_positive_stable_laplace_transform():
    rng = np.random.default_rng(0)
    alpha = 0.5
    v = positive_stable(alpha, 200_000, rng)
    for s in (0.25, 1.0, 2.0):
        assert np.mean(np.exp(-s * v)) == pytest.approx(math.exp(-s ** alpha), abs=0.005)


def test_generator_seed_accepted():
    rng = np.random.default_rng(3)
    a = sample(CopulaModel(Family.INDEPENDENCE, 2), 5, rng)
    b = sample(CopulaModel(Family.INDEPENDENCE, 2), 5, np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)
