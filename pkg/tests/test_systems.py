import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stlpi.systems import (
    augment,
    augment_state,
    double_integrator,
    head,
    make_model,
    rollout,
    rollout_batch,
    scalar_integrator,
    single_track,
    unstack,
)

finite = st.floats(-10, 10, allow_nan=False)


def test_scalar_integrator_rollout():
    traj = rollout(scalar_integrator(), [0.5], [1.0, -2.0, 0.25])
    np.testing.assert_array_equal(traj.states[:, 0], [0.5, 1.5, -0.5, -0.25])
    assert traj.horizon == 3


def test_double_integrator_zero_order_hold():
    # one unit step of a_x = 1 from rest moves p_x by dt^2/2
    x1 = double_integrator(dt=1.0).step([0, 0, 0, 0], [1.0, 0.0])
    np.testing.assert_array_equal(x1, [0.5, 0.0, 1.0, 0.0])
    x1 = double_integrator(dt=0.5).step([1, 2, 3, 4], [2.0, -2.0])
    np.testing.assert_allclose(x1, [1 + 1.5 + 0.25, 2 + 2.0 - 0.25, 4.0, 3.0])


def test_double_integrator_matches_continuous_solution():
    # constant acceleration: p(t) = p0 + v0 t + a t^2 / 2, exact at every sample
    m = double_integrator(dt=0.3)
    a = np.array([0.7, -1.1])
    traj = rollout(m, [1.0, -1.0, 0.5, 2.0], np.tile(a, (20, 1)))
    t = 0.3 * np.arange(21)
    np.testing.assert_allclose(traj.states[:, 0], 1.0 + 0.5 * t + 0.5 * a[0] * t**2, rtol=1e-12)
    np.testing.assert_allclose(traj.states[:, 3], 2.0 + a[1] * t, rtol=1e-12)


def test_single_track_straight_line():
    x1 = single_track().step([0, 0, 0, 10, 0], [0, 0])
    np.testing.assert_allclose(x1, [1.0, 0.0, 0.0, 10.0, 0.0], atol=1e-15)


def test_single_track_turn_rate():
    x1 = single_track(dt=0.1, wheelbase=2.0).step([0, 0, 0.1, 10, 0], [0.5, -1.0])
    np.testing.assert_allclose(x1, [1.0, 0.0, 0.15, 9.9, 0.5 * math.tan(0.1)], atol=1e-15)
    x1 = single_track().step([0, 0, 0, 4, math.pi / 2], [0, 0])
    np.testing.assert_allclose(x1[:2], [0.0, 0.4], atol=1e-15)


def test_single_track_batch_kernel_matches_stepwise():
    m = single_track()
    rng = np.random.default_rng(1)
    U = rng.normal(scale=0.5, size=(7, 30, 2))
    x0 = np.array([1.0, -2.0, 0.05, 8.0, 0.3])
    X = rollout_batch(m, x0, U)
    for b in range(7):
        np.testing.assert_allclose(X[b], rollout(m, x0, U[b]).states, rtol=1e-12, atol=1e-12)


def test_default_batch_rollout_matches_single():
    m = double_integrator()
    U = np.random.default_rng(2).normal(size=(4, 6, 2))
    X = rollout_batch(m, [0, 1, 2, 3], U)
    for b in range(4):
        np.testing.assert_array_equal(X[b], rollout(m, [0, 1, 2, 3], U[b]).states)


def test_shape_errors():
    with pytest.raises(ValueError):
        rollout(double_integrator(), [0, 0, 0], [[0, 0]])
    with pytest.raises(ValueError):
        rollout(double_integrator(), [0, 0, 0, 0], [[0, 0, 0]])
    with pytest.raises(ValueError):
        rollout_batch(scalar_integrator(), [0.0], np.zeros((3, 2)))
    with pytest.raises(ValueError):
        double_integrator(dt=0)
    with pytest.raises(ValueError):
        make_model("unicycle")


def test_make_model_passes_parameters():
    m = make_model("single_track", dt=0.05, wheelbase=3.0)
    assert (m.n_x, m.n_u, m.dt) == (5, 2, 0.05)


# ------------------------------------------------------------ augmentation


def test_augment_first_step():
    aug = augment(scalar_integrator(), K=2)
    xa1 = aug.step(augment_state([1.0], 2), [2.0])
    np.testing.assert_array_equal(xa1, [3.0, 1.0, 0.0])


def test_augment_rejects_zero_horizon():
    with pytest.raises(ValueError):
        augment(scalar_integrator(), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.data())
def test_zero_padding_until_horizon(K, data):
    base = double_integrator()
    u = data.draw(arrays(np.float64, (K, 2), elements=finite))
    traj = rollout(augment(base, K), augment_state([1, 2, 3, 4], K), u)
    for k in range(K + 1):
        blocks = traj.states[k].reshape(K + 1, 4)
        assert not blocks[k + 1 :].any()
        np.testing.assert_array_equal(head(traj.states[k], 4), blocks[0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.data())
def test_augmented_rollout_commutes_with_plain(K, data):
    base = double_integrator(dt=0.7)
    x0 = data.draw(arrays(np.float64, 4, elements=finite))
    u = data.draw(arrays(np.float64, (K, 2), elements=finite))
    plain = rollout(base, x0, u).states
    aug = rollout(augment(base, K), augment_state(x0, K), u).states
    np.testing.assert_array_equal(unstack(aug[-1], 4), plain)


def test_augmented_batch_step_matches_single():
    aug = augment(single_track(), 3)
    rng = np.random.default_rng(3)
    XA = rng.normal(size=(5, aug.n_x))
    U = rng.normal(size=(5, 2))
    batch = aug.step_batch(XA, U)
    for b in range(5):
        np.testing.assert_array_equal(batch[b], aug.step(XA[b], U[b]))
