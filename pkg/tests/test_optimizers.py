import math

import numpy as np
import pytest

from adaoais.exceptions.errors import ConfigurationError, DivergenceError, ShapeError
from adaoais.services.optimizers import (
    AdaGradState,
    AdamState,
    OptimizerSpec,
    Schedule,
    ScheduleKind,
    SGDState,
    adagrad_step,
    adam_step,
    sgd_step,
)

CONSTANT_01 = Schedule(ScheduleKind.CONSTANT, 0.1)
CONSTANT_001 = Schedule(ScheduleKind.CONSTANT, 0.01)


def test_inv_sqrt_schedule():
    schedule = Schedule(ScheduleKind.INV_SQRT, 1e-4)
    assert schedule.rate(0) == 1e-4
    assert schedule.rate(3) == pytest.approx(5e-5, rel=1e-15)
    assert CONSTANT_01.rate(1000) == 0.1
    with pytest.raises(ConfigurationError):
        Schedule(ScheduleKind.CONSTANT, 0.0)


def test_sgd_step():
    np.testing.assert_array_equal(sgd_step([0.3, -0.2], [0.0, 0.0], CONSTANT_01, 0), [0.3, -0.2])
    assert sgd_step([0.0], [1.0], CONSTANT_01, 0)[0] == pytest.approx(-0.1, abs=1e-15)


def test_adam_three_steps_by_hand():
    b1, b2, alpha, eps = 0.9, 0.999, 0.01, 1e-8
    gradients = [np.array([1.0, -2.0]), np.array([0.5, 0.5]), np.array([-1.0, 3.0])]

    m1 = (1 - b1) * gradients[0]
    v1 = (1 - b2) * gradients[0] ** 2
    theta1 = -alpha * (m1 / (1 - b1)) / (np.sqrt(v1 / (1 - b2)) + eps)
    m2 = b1 * m1 + (1 - b1) * gradients[1]
    v2 = b2 * v1 + (1 - b2) * gradients[1] ** 2
    theta2 = theta1 - alpha * (m2 / (1 - b1 ** 2)) / (np.sqrt(v2 / (1 - b2 ** 2)) + eps)
    m3 = b1 * m2 + (1 - b1) * gradients[2]
    v3 = b2 * v2 + (1 - b2) * gradients[2] ** 2
    theta3 = theta2 - alpha * (m3 / (1 - b1 ** 3)) / (np.sqrt(v3 / (1 - b2 ** 3)) + eps)

    state, theta = AdamState.initial(2, b1, b2, eps), np.zeros(2)
    for g, expected in zip(gradients, (theta1, theta2, theta3)):
        state, theta = adam_step(state, theta, g, CONSTANT_001)
        np.testing.assert_allclose(theta, expected, rtol=0.0, atol=1e-12)
    assert state.k == 3
    np.testing.assert_allclose(state.m, m3, atol=1e-15)
    np.testing.assert_allclose(state.v, v3, atol=1e-15)


def test_adam_constant_gradient_two_steps():
    state, theta = AdamState.initial(1), np.zeros(1)
    state, theta = adam_step(state, theta, [1.0], CONSTANT_001)
    assert theta[0] == pytest.approx(-0.01 / (1 + 1e-8), abs=1e-12)
    state, theta = adam_step(state, theta, [1.0], CONSTANT_001)
    assert theta[0] == pytest.approx(-0.02 / (1 + 1e-8), abs=1e-12)


@pytest.mark.parametrize("beta1, beta2", [(0.9, 0.999), (0.5, 0.9), (0.0, 0.99), (0.99, 0.9999), (0.3, 0.5)])
def test_adam_first_step_direction(beta1, beta2):
    g = np.array([2.0, -0.5, 1e-3])
    _, theta = adam_step(AdamState.initial(3, beta1, beta2), np.zeros(3), g, CONSTANT_001)
    np.testing.assert_allclose(theta, -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)


def test_adagrad_four_unit_steps():
    state, theta = AdaGradState.initial(1), np.zeros(1)
    for _ in range(4):
        state, theta = adagrad_step(state, theta, [1.0], CONSTANT_01)
    expected = -0.1 * sum(1.0 / (math.sqrt(j) + 1e-8) for j in range(1, 5))
    assert theta[0] == pytest.approx(expected, abs=1e-12)
    assert theta[0] == pytest.approx(-0.278446, abs=1e-6)
    assert state.acc[0] == 4.0


def test_adagrad_three_steps_by_hand():
    gradients = [np.array([1.0, -2.0]), np.array([0.5, 0.5]), np.array([-1.0, 3.0])]
    acc = np.zeros(2)
    expected = np.zeros(2)
    state, theta = AdaGradState.initial(2), np.zeros(2)
    for g in gradients:
        acc = acc + g * g
        expected = expected - 0.1 * g / (np.sqrt(acc) + 1e-8)
        state, theta = adagrad_step(state, theta, g, CONSTANT_01)
        np.testing.assert_allclose(theta, expected, rtol=0.0, atol=1e-12)


def test_adagrad_step_bounded_by_rate(rng):
    state, theta = AdaGradState.initial(3), np.zeros(3)
    previous_acc = state.acc
    for _ in range(200):
        g = rng.normal(scale=rng.uniform(1e-3, 1e3), size=3)
        state, new_theta = adagrad_step(state, theta, g, CONSTANT_01)
        assert np.all(np.abs(new_theta - theta) <= 0.1 * (1 + 1e-12) + 1e-15)
        assert np.all(state.acc >= previous_acc)
        previous_acc, theta = state.acc, new_theta


def test_adam_step_bounded_by_moment_ratio(rng):
    # |m̂|/√v̂ ≤ sqrt(Σ a_i²/b_i)，a、b 为偏差校正后的一阶、二阶矩权重
    b1, b2 = 0.9, 0.999
    state, theta = AdamState.initial(2, b1, b2), np.zeros(2)
    for k in range(100):
        g = rng.normal(scale=rng.uniform(1e-2, 1e2), size=2)
        state, new_theta = adam_step(state, theta, g, CONSTANT_001)
        ages = np.arange(k + 1)
        a = (1 - b1) * b1 ** ages / (1 - b1 ** (k + 1))
        b = (1 - b2) * b2 ** ages / (1 - b2 ** (k + 1))
        bound = 0.01 * math.sqrt(float(np.sum(a * a / b)))
        assert np.all(np.abs(new_theta - theta) <= bound * (1 + 1e-9))
        theta = new_theta


def test_sign_invariance_without_eps(rng):
    gradients = rng.normal(size=(20, 3))
    for make_state, step in ((lambda: AdamState.initial(3, eps=0.0), adam_step),
                             (lambda: AdaGradState.initial(3, eps=0.0), adagrad_step)):
        s_pos, s_neg = make_state(), make_state()
        t_pos, t_neg = np.zeros(3), np.zeros(3)
        for g in gradients:
            s_pos, t_pos = step(s_pos, t_pos, g, CONSTANT_001)
            s_neg, t_neg = step(s_neg, t_neg, -g, CONSTANT_001)
            np.testing.assert_array_equal(t_neg, -t_pos)


def _descend(spec, theta0, steps=10_000):
    state, theta = spec.init_state(theta0.shape[0]), theta0.copy()
    for _ in range(steps):
        state, theta = spec.step(state, theta, theta)
    return theta


QUADRATIC_START = np.array([6.0, 8.0])


def test_adam_reaches_quadratic_minimum():
    theta = _descend(OptimizerSpec("adam", Schedule(ScheduleKind.CONSTANT, 0.01)), QUADRATIC_START)
    assert np.linalg.norm(theta) < 1e-3


def test_adagrad_on_quadratic_at_experiment_rate():
    # t = 0.1 时 1e4 步后 ‖θ‖ ≈ 0.0118，达不到 1e-3
    theta = _descend(OptimizerSpec("adagrad", Schedule(ScheduleKind.CONSTANT, 0.1)), QUADRATIC_START)
    assert np.linalg.norm(theta) < 0.02


def test_sgd_on_quadratic_at_experiment_rate():
    schedule = Schedule(ScheduleKind.INV_SQRT, 1e-4)
    theta = _descend(OptimizerSpec("sgd", schedule), QUADRATIC_START)
    # g = θ 时每步乘以 (1 − t_k)
    contraction = np.prod([1.0 - schedule.rate(k) for k in range(10_000)])
    np.testing.assert_allclose(theta, QUADRATIC_START * contraction, rtol=1e-10)
    assert np.linalg.norm(theta) == pytest.approx(9.80, abs=0.01)


def test_sgd_on_quadratic_at_constant_rate():
    theta = _descend(OptimizerSpec("sgd", Schedule(ScheduleKind.CONSTANT, 0.1)), QUADRATIC_START)
    assert np.linalg.norm(theta) < 1e-3


@pytest.mark.parametrize("make_state, step", [
    (lambda: AdamState.initial(2, eps=0.0), adam_step),
    (lambda: AdaGradState.initial(2, eps=0.0), adagrad_step),
])
def test_zero_eps_leaves_idle_coordinates_in_place(make_state, step):
    state, theta = make_state(), np.array([3.0, 3.0])
    for _ in range(3):
        state, theta = step(state, theta, np.array([0.0, 1.0]), CONSTANT_01)
    assert theta[0] == 3.0
    assert theta[1] < 3.0


def test_negative_eps_is_rejected():
    with pytest.raises(ConfigurationError):
        AdaGradState.initial(2, eps=-1e-8)
    with pytest.raises(ConfigurationError):
        AdamState.initial(2, eps=-1e-8)


def test_non_finite_inputs_raise_divergence():
    with pytest.raises(DivergenceError) as info:
        sgd_step([0.0], [math.nan], CONSTANT_01, 0)
    assert info.value.reason == "non_finite_gradient"
    with pytest.raises(DivergenceError):
        adam_step(AdamState.initial(1), [0.0], [math.inf], CONSTANT_01)
    with pytest.raises(DivergenceError) as info:
        sgd_step([0.0], [1e308], Schedule(ScheduleKind.CONSTANT, 1e10), 0)
    assert info.value.reason == "non_finite_parameter"
    with pytest.raises(ShapeError):
        adagrad_step(AdaGradState.initial(2), [0.0, 0.0], [1.0], CONSTANT_01)


def test_optimizer_spec_validation():
    with pytest.raises(ConfigurationError):
        OptimizerSpec("adam", beta1=0.999, beta2=0.9)
    with pytest.raises(ConfigurationError):
        OptimizerSpec("adam", beta1=0.9, beta2=0.9)
    with pytest.raises(ConfigurationError):
        OptimizerSpec("rmsprop")
    with pytest.raises(ConfigurationError):
        OptimizerSpec("adagrad", eps=0.0)


def test_spec_dispatch():
    assert isinstance(OptimizerSpec("sgd").init_state(2), SGDState)
    assert isinstance(OptimizerSpec("adam").init_state(2), AdamState)
    assert isinstance(OptimizerSpec("adagrad").init_state(2), AdaGradState)
    state, theta = OptimizerSpec("sgd", CONSTANT_01).step(SGDState(), np.zeros(1), np.ones(1))
    assert state.k == 1 and theta[0] == pytest.approx(-0.1)
