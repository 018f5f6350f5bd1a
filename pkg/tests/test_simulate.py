import numpy as np
import pytest

from rcar.estimator import ols
from rcar.exceptions import ExplosionError
from rcar.model import ModelParams, NoiseSpec
from rcar.moments import solve_moments
from rcar.simulate import Trajectory, draw_noises, read_csv, simulate, stream_increasing

from oracles import sample_autocov


def test_no_noise_gives_zero_path():
    params = ModelParams.gaussian([0.5, -0.3], [0.2, 0.1], [0.0, 0.0], 0.0)
    traj = simulate(params, 200, burn_in=10, seed=4)
    assert not traj.values.any()
    assert traj.values.shape == (202,)


def test_white_noise_path_is_the_innovations():
    params = ModelParams.gaussian([0.0], [0.0], [0.0], 1.0)
    traj = simulate(params, 50, burn_in=5, seed=11)
    _, eps = draw_noises(params, 5 + 50 + 1, seed=11)
    np.testing.assert_array_equal(traj.values, eps[5:])


def test_hand_recursion_p1():
    # X_t = (theta + alpha eta_{t-1} + eta_t) X_{t-1} + eps_t, from zero state
    params = ModelParams(
        theta=(0.4,), alpha=(0.5,), eta=(NoiseSpec("uniform", 0.3),), eps=NoiseSpec("gaussian", 1.0)
    )
    steps = 30
    eta, eps = draw_noises(params, steps + 1, seed=2)
    x, prev_eta = 0.0, 0.0
    expected = []
    for t in range(steps + 1):
        x = (0.4 + 0.5 * prev_eta + eta[t, 0]) * x + eps[t]
        prev_eta = eta[t, 0]
        expected.append(x)
    traj = simulate(params, steps, burn_in=0, seed=2)
    np.testing.assert_allclose(traj.values, expected, rtol=1e-14)


def test_prefix_property(general_p2):
    short, long = stream_increasing(general_p2, [10, 20], seed=5)
    np.testing.assert_array_equal(short.values, long.values[: 10 + 2])
    np.testing.assert_array_equal(simulate(general_p2, 10, seed=5).values, short.values)


def test_single_checkpoint_equals_simulate(fig1):
    (only,) = stream_increasing(fig1, [300], seed=9, stream=3)
    np.testing.assert_array_equal(only.values, simulate(fig1, 300, seed=9, stream=3).values)


def test_streams_differ(fig1):
    a = simulate(fig1, 100, seed=0, stream=0).values
    b = simulate(fig1, 100, seed=0, stream=1).values
    assert not np.array_equal(a, b)


def test_explosion_raises():
    params = ModelParams.gaussian([3.0], [0.0], [0.0], 1.0)
    with pytest.raises(ExplosionError) as err:
        simulate(params, 1000, burn_in=0)
    assert err.value.step is not None and err.value.step < 400


def test_csv_round_trip(tmp_path, fig1):
    traj = simulate(fig1, 40, seed=1)
    text = traj.to_csv()
    assert text.splitlines()[0] == "t,x"
    assert text.splitlines()[1].startswith("-1,")
    np.testing.assert_array_equal(read_csv(text, p=2), traj.values)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    np.testing.assert_array_equal(read_csv(path, p=2), traj.values)


def test_csv_wrong_start_index(fig1):
    text = simulate(fig1, 10, seed=1).to_csv()
    with pytest.raises(ValueError):
        read_csv(text, p=3)


def test_trajectory_times():
    traj = Trajectory(np.zeros(5), 3, 2, 0, 0, np.zeros(2))
    assert traj.times.tolist() == [-1, 0, 1, 2, 3]


@pytest.mark.slow
def test_ergodic_second_moment(fig1):
    sol = solve_moments(fig1)
    x = simulate(fig1, 1_000_000, seed=21).values
    acov = sample_autocov(x, 2)
    assert acov[0] == pytest.approx(sol.ell[0], rel=0.01)
    np.testing.assert_allclose(acov[1:], sol.ell[1:], atol=0.01 * sol.ell[0])


@pytest.mark.slow
def test_ergodic_second_moment_non_gaussian(general_p2):
    sol = solve_moments(general_p2)
    x = simulate(general_p2, 1_000_000, seed=22).values
    np.testing.assert_allclose(sample_autocov(x, 2), sol.ell, atol=0.02 * sol.ell[0])


def test_burn_in_insensitivity(fig1):
    # stationary second moment does not depend on how long the burn-in runs
    a = np.mean([np.mean(simulate(fig1, 2000, burn_in=500, seed=s).values ** 2) for s in range(30)])
    b = np.mean([np.mean(simulate(fig1, 2000, burn_in=1000, seed=s).values ** 2) for s in range(30)])
    assert a == pytest.approx(b, rel=0.03)


@pytest.mark.slow
def test_estimates_approach_theta_star(fig1):
    target = solve_moments(fig1).theta_star
    cps = [1_000, 10_000, 100_000]
    errors = np.empty((100, 3))
    for seed in range(100):
        for j, traj in enumerate(stream_increasing(fig1, cps, seed=seed)):
            errors[seed, j] = np.abs(ols(traj, 2)[0] - target).max()
    med = np.median(errors, axis=0)
    assert med[0] > med[1] > med[2]
