import numpy as np
import pytest
from scipy.linalg import expm

from conftest import scalar_spec
from maxplus_riccati.config import Config
from maxplus_riccati.problem import ProblemSpec
from maxplus_riccati.riccati import integrate_seed
from maxplus_riccati.verify import (CHECKS, perturbed_payoff, run_checks, simulate_closed_loop,
                                    suboptimality_probe, terminal_payoff, value_quadratic)


@pytest.fixture(scope="module")
def scalar_traj():
    return integrate_seed(scalar_spec(-1.0, 1.0, 1.0, -0.1), 0.5, checkpoints=[0.1])


def test_value_at_zero_is_terminal_payoff(traj16, rng):
    x, z = rng.standard_normal(16), rng.standard_normal(16)
    assert value_quadratic(traj16, 0.0, x, z) == pytest.approx(terminal_payoff(traj16.spec, x, z), rel=1e-14)


def test_value_vanishes_at_origin(traj16):
    assert value_quadratic(traj16, 0.3, np.zeros(16), np.zeros(16)) == 0.0


def test_scalar_value_closed_form(scalar_traj):
    # W = 1/2 p x^2 + q x z + 1/2 r z^2 with the closed-form seed at t = 0.1
    c0, t = 1 / 1.1, 0.1
    p = 1 - 1 / (t + c0)
    q = 0.1 * c0 / (t + c0)
    r = -0.1 + 0.01 * c0 ** 2 * (1 / c0 - 1 / (t + c0))
    x, z = 0.7, -0.4
    W = value_quadratic(scalar_traj, t, [x], [z])
    assert W == pytest.approx(0.5 * p * x * x + q * x * z + 0.5 * r * z * z, rel=1e-9)
    _, J = simulate_closed_loop(scalar_traj, t, [x], [z])
    assert abs(J - W) <= 1e-6


def test_zero_horizon_payoff(scalar_traj):
    rec, J = simulate_closed_loop(scalar_traj, 0.0, [0.5], [0.2])
    assert J == pytest.approx(terminal_payoff(scalar_traj.spec, [0.5], [0.2]))
    assert rec.running_payoff == 0.0


def test_uncontrolled_linear_flow():
    A = np.array([[-1.0, 0.0], [0.5, -2.0]])
    spec = ProblemSpec(A, np.zeros((2, 2)), np.zeros((2, 2)), -0.1 * np.eye(2))
    traj = integrate_seed(spec, 0.5)
    x, z = np.array([1.0, -1.0]), np.array([0.3, 0.2])
    rec, J = simulate_closed_loop(traj, 0.5, x, z)
    assert np.allclose(rec.states[-1], expm(A * 0.5) @ x, atol=1e-9)
    assert J == pytest.approx(terminal_payoff(spec, expm(A * 0.5) @ x, z), abs=1e-10)


def test_closed_loop_matches_value(traj16, rng):
    for _ in range(3):
        x, z = rng.standard_normal(16), rng.standard_normal(16)
        W = value_quadratic(traj16, 0.3, x, z)
        _, J = simulate_closed_loop(traj16, 0.3, x, z)
        assert abs(J - W) / max(1, abs(W)) <= 1e-4


def test_zero_perturbation_is_optimal(traj16, rng):
    x, z = rng.standard_normal(16), rng.standard_normal(16)
    J, energy = perturbed_payoff(traj16, 0.3, x, z, np.zeros((20, 16)))
    assert energy == 0.0
    assert abs(J - value_quadratic(traj16, 0.3, x, z)) <= 1e-6


def test_perturbation_deficit_is_half_energy(scalar_traj, rng):
    x, z = [0.7], [-0.4]
    W = value_quadratic(scalar_traj, 0.1, x, z)
    for _ in range(5):
        eta = 0.5 * rng.standard_normal((20, 1))
        J, energy = perturbed_payoff(scalar_traj, 0.1, x, z, eta)
        assert energy > 0
        assert (W - J) == pytest.approx(energy, rel=0.05)


def test_suboptimality_probe_small(traj16, rng):
    x, z = rng.standard_normal(16), rng.standard_normal(16)
    assert suboptimality_probe(traj16, 0.3, x, z, n_trials=10, seed=3) <= 1e-6


def test_horizon_out_of_range(traj16):
    with pytest.raises(ValueError):
        simulate_closed_loop(traj16, 0.9, np.zeros(16), np.zeros(16))


def test_run_checks_fast_subset(spec16):
    rows = run_checks(spec16, Config(grid_n=16),
                      only=["coercivity", "semiconvexity", "semigroup-law", "duality", "recipe-oracle"])
    assert [r[0] for r in rows] == ["coercivity", "semiconvexity", "semigroup-law", "duality",
                                    "recipe-oracle"]
    assert all(r[3] for r in rows)


def test_run_checks_rejects_unknown(spec16):
    with pytest.raises(ValueError):
        run_checks(spec16, Config(), only=["nope"])
    assert len(CHECKS) == 8
