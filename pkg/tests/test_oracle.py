import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal, norm

from adaoais.core.proposals import BetaFamily, BetaProposalParams, GaussianFamily
from adaoais.core.targets import GaussianSpec, MixtureSpec, gaussian_target, make_experiment_target, mixture_target
from adaoais.exceptions.errors import AccuracyError, DomainError, OracleUnavailableError
from adaoais.features.oracle import (
    QuadratureGrid,
    QuadratureScheme,
    R_gaussian_mean,
    R_quadrature,
    fd_gradient,
    gradient_oracle,
    grad_R_gaussian_mean,
    logitnormal_interval_prob,
    pl_check,
    rect_prob,
    refine_rect_prob,
    rho_for,
    rho_gaussian,
    rho_gaussian_mean_gradient,
    rho_quadrature,
)


def _normal_1d(mean, std):
    return GaussianSpec(mean=np.array([mean]), covariance=np.array([[std * std]]))


def test_rho_is_one_when_proposal_is_target():
    spec = GaussianSpec(mean=np.array([1.0, -1.0]), covariance=np.array([[2.0, -0.5], [-0.5, 2.0]]))
    assert rho_gaussian(spec, spec) == pytest.approx(1.0, abs=1e-12)


def test_rho_for_shifted_mean():
    assert rho_gaussian(_normal_1d(0.0, 1.0), _normal_1d(1.0, 1.0)) == pytest.approx(math.e, rel=1e-12)
    assert rho_gaussian(_normal_1d(0.0, 1.0), _normal_1d(0.5, 1.0)) == pytest.approx(R_gaussian_mean(0.5), rel=1e-12)


def test_rho_infinite_for_narrow_proposal():
    assert rho_gaussian(_normal_1d(0.0, 1.0), _normal_1d(0.0, 1.0 / math.sqrt(2.0) - 1e-3)) == math.inf


def _random_pair(rng, dim):
    pi_cov = np.diag(rng.uniform(0.5, 1.5, size=dim) ** 2)
    if dim == 2:
        rotation = np.array([[1.0, 0.0], [rng.uniform(-0.5, 0.5), 1.0]])
        pi_cov = rotation @ pi_cov @ rotation.T
    extra = rng.normal(scale=0.7, size=(dim, dim))
    q_cov = pi_cov + extra @ extra.T
    pi_spec = GaussianSpec(mean=rng.uniform(-1.0, 1.0, size=dim), covariance=pi_cov)
    q_spec = GaussianSpec(mean=rng.uniform(-1.0, 1.0, size=dim), covariance=q_cov)
    return pi_spec, q_spec


@pytest.mark.parametrize("dim, nodes", [(1, 2048), (2, 512)])
def test_closed_form_rho_matches_quadrature(dim, nodes):
    rng = np.random.default_rng(dim)
    for _ in range(10):
        pi_spec, q_spec = _random_pair(rng, dim)
        family = GaussianFamily(dim)
        grid = QuadratureGrid((nodes,) * dim, ((-15.0, 15.0),) * dim)
        quadrature = R_quadrature(gaussian_target(pi_spec), family, family.pack(q_spec), grid)
        assert rho_gaussian(pi_spec, q_spec) == pytest.approx(quadrature, rel=1e-6)


def test_rho_mean_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    for _ in range(5):
        pi_spec, q_spec = _random_pair(rng, 2)

        def rho_at(mean):
            return rho_gaussian(pi_spec, GaussianSpec(mean=mean, covariance=q_spec.covariance))

        fd = fd_gradient(rho_at, q_spec.mean)
        np.testing.assert_allclose(rho_gaussian_mean_gradient(pi_spec, q_spec), fd, rtol=1e-6, atol=1e-9)


def test_rho_for_uses_quadrature_for_beta():
    target = make_experiment_target("logitnormal")
    family = BetaFamily()
    theta = family.pack(BetaProposalParams.from_shape(2.0, 3.0))
    assert rho_for(target, family, theta) == pytest.approx(rho_quadrature(target, family, theta), rel=1e-12)
    assert rho_for(target, family, theta) > 1.0


def test_fd_gradient_exact_for_linear_functions():
    slope = np.array([1.5, -2.0, 0.25])
    grad = fd_gradient(lambda t: float(slope @ t), np.array([0.3, -0.7, 1.1]), h=0.25)
    np.testing.assert_allclose(grad, slope, atol=1e-12)
    with pytest.raises(DomainError):
        fd_gradient(lambda t: math.inf, np.zeros(1))


def test_fd_of_R_for_shifted_mean():
    fd = fd_gradient(lambda t: rho_gaussian(_normal_1d(0.0, 1.0), _normal_1d(float(t[0]), 1.0)), np.array([0.5]))
    assert fd[0] == pytest.approx(1.28402, abs=1e-5)
    assert fd[0] == pytest.approx(float(grad_R_gaussian_mean(0.5)), rel=1e-8)


def test_rect_prob_standard_normal():
    target = gaussian_target(_normal_1d(0.0, 1.0))
    expected = norm.cdf(1.0) - norm.cdf(-1.0)
    assert rect_prob(target, ((-1.0,), (1.0,))) == pytest.approx(expected, rel=1e-9)
    assert rect_prob(target, ((-1.0,), (1.0,))) == pytest.approx(0.682689, abs=1e-6)


def test_rect_prob_midpoint_agrees():
    target = gaussian_target(_normal_1d(0.0, 1.0))
    midpoint = rect_prob(target, ((-1.0,), (1.0,)), scheme=QuadratureScheme.MIDPOINT)
    assert midpoint == pytest.approx(norm.cdf(1.0) - norm.cdf(-1.0), rel=1e-6)


def test_rect_prob_mixture_square():
    value = rect_prob(make_experiment_target("mixture"), ((-1.0, -1.0), (1.0, 1.0)))
    expected = (norm.cdf(-2.0) - norm.cdf(-4.0)) * (norm.cdf(1.0) - norm.cdf(-1.0))
    assert value == pytest.approx(expected, rel=1e-8)
    assert value == pytest.approx(0.01551, abs=1e-5)


def test_rect_prob_correlated_gaussian():
    target = make_experiment_target("gaussian")
    value, nodes = refine_rect_prob(target, ((-1.0, -1.0), (1.0, 1.0)))
    assert nodes >= 128
    dist = multivariate_normal(mean=target.spec.mean, cov=target.spec.covariance)
    expected = (dist.cdf([1.0, 1.0]) - dist.cdf([-1.0, 1.0]) - dist.cdf([1.0, -1.0]) + dist.cdf([-1.0, -1.0]))
    assert value == pytest.approx(expected, abs=1e-4)
    assert 0.15 < value < 0.23


def test_rect_prob_monotone_under_inclusion():
    target = make_experiment_target("mixture")
    inner = rect_prob(target, ((-1.0, -1.0), (1.0, 1.0)))
    outer = rect_prob(target, ((-2.0, -1.5), (2.0, 1.5)))
    assert 0.0 <= inner < outer <= 1.0


def test_rect_prob_reports_non_convergence():
    with pytest.raises(AccuracyError):
        rect_prob(make_experiment_target("gaussian"), ((-1.0, -1.0), (1.0, 1.0)), max_nodes=64)


def test_rect_prob_unit_interval_matches_analytic():
    value = rect_prob(make_experiment_target("logitnormal"), ((0.25,), (0.75,)))
    assert value == pytest.approx(logitnormal_interval_prob(0.25, 0.75), rel=1e-8)


def test_logitnormal_interval_prob():
    assert logitnormal_interval_prob(0.25, 0.75) == pytest.approx(0.72815, abs=1e-5)
    assert logitnormal_interval_prob(0.25, 0.75) == pytest.approx(
        norm.cdf(math.log(3.0)) - norm.cdf(-math.log(3.0)), abs=1e-14)
    assert logitnormal_interval_prob(0.0, 1.0) == 1.0
    delta = 1e-6
    assert logitnormal_interval_prob(0.5, 0.5 + delta) / delta == pytest.approx(1.59577, rel=1e-5)
    with pytest.raises(DomainError):
        logitnormal_interval_prob(0.75, 0.25)
    with pytest.raises(DomainError):
        logitnormal_interval_prob(-0.1, 0.5)


def test_quadrature_grid_validation():
    with pytest.raises(DomainError):
        QuadratureGrid((32,), ((0.0, 1.0),))
    with pytest.raises(DomainError):
        QuadratureGrid((64,), ((1.0, 0.0),))
    assert QuadratureGrid((64, 64), ((0.0, 1.0), (0.0, 1.0))).refined().nodes == (128, 128)


def test_pl_inequality_on_grid():
    thetas = np.linspace(-3.0, 3.0, 601)
    assert pl_check(thetas, mu=2.0)
    assert pl_check([0.0], mu=2.0)
    assert not pl_check(thetas, mu=1e6)


def test_gradient_oracle_vanishes_at_optimum(gaussian_2d):
    target = make_experiment_target("gaussian")
    np.testing.assert_allclose(gradient_oracle(target, gaussian_2d, gaussian_2d.pack(target.spec)), 0.0, atol=1e-6)


def test_gradient_oracle_for_mean_only(std_normal_1d, mean_only_1d):
    oracle = gradient_oracle(std_normal_1d, mean_only_1d, np.array([0.5]))
    assert oracle[0] == pytest.approx(float(grad_R_gaussian_mean(0.5)), rel=1e-7)


def test_gradient_oracle_unavailable_in_three_dimensions():
    component = GaussianSpec(mean=np.zeros(3), covariance=np.eye(3))
    target = mixture_target(MixtureSpec(components=((1.0, component),)))
    family = GaussianFamily(3)
    with pytest.raises(OracleUnavailableError):
        gradient_oracle(target, family, family.pack(component))
    with pytest.raises(OracleUnavailableError):
        rect_prob(target, ((-1.0,) * 3, (1.0,) * 3))
