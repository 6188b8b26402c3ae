import numpy as np
import pytest

from odkla.comm import CensorSpec, QuantizerSpec
from odkla.errors import DegenerateRegret, UnsupportedLoss
from odkla.fixtures import brute_force_regret, ridge_lstsq
from odkla.losses import LossSpec
from odkla.metrics import (RegretAccumulator, batch_objective_gradient, broadcast_error_bound,
                           centralized_oracle, error_bound_check, regret, regret_comparator,
                           sublinearity_fit)


def test_rank_one_ridge_by_hand():
    # one sample along a single coordinate: theta = z / (z.z), zero residual
    z = np.array([[2.0]])
    theta = centralized_oracle(z, np.array([1.0]), 0.0)
    assert theta.tolist() == [0.5]
    assert z[0] @ theta == 1.0


def test_heavy_regularisation_shrinks_to_zero(rng):
    z, y = rng.standard_normal((10, 4)), rng.standard_normal(10)
    assert np.linalg.norm(centralized_oracle(z, y, 1e14)) <= 1e-12


def test_oracle_matches_augmented_least_squares(rng):
    z, y = rng.standard_normal((20, 8)), rng.standard_normal(20)
    assert np.allclose(centralized_oracle(z, y, 0.3), ridge_lstsq(z, y, 0.3), atol=1e-12)


def test_oracle_is_stationary(rng):
    for _ in range(20):
        z, y = rng.standard_normal((20, 8)), rng.standard_normal(20)
        theta = centralized_oracle(z, y, 0.05)
        assert np.linalg.norm(batch_objective_gradient(theta, z, y, 0.05)) <= 1e-8


def test_oracle_rejects_classification_loss():
    with pytest.raises(UnsupportedLoss):
        centralized_oracle(np.eye(2), np.ones(2), 1.0, LossSpec("logistic"))


def test_comparator_weight_scales_with_rounds(rng):
    z, y = rng.standard_normal((12, 4)), rng.standard_normal(12)
    loss = LossSpec(lam=0.2, n_agents=3)
    assert np.allclose(regret_comparator(z, y, loss, 4), centralized_oracle(z, y, 0.8))


def test_regret_zero_cases(rng):
    z, y = rng.standard_normal((5, 2, 4)), rng.standard_normal((5, 2))
    loss = LossSpec(lam=0.1, n_agents=2)
    star = rng.standard_normal(4)
    assert np.all(regret(np.broadcast_to(star, z.shape), z, y, star, loss) == 0.0)
    assert np.all(regret(np.zeros(z.shape), z, y, np.zeros(4), loss) == 0.0)


@pytest.mark.parametrize("kind", ["squared", "logistic", "hinge"])
def test_curve_and_accumulator_match_double_loop(rng, kind):
    loss = LossSpec(kind, 0.1, 3)
    traj = rng.standard_normal((50, 3, 6))
    z = rng.standard_normal((50, 3, 6))
    y = rng.choice([-1.0, 1.0], (50, 3))
    star = rng.standard_normal(6)
    curve = regret(traj, z, y, star, loss)
    acc = RegretAccumulator(star, loss)
    for t in range(50):
        acc.update(traj[t], z[t], y[t])
    brute = brute_force_regret(traj, z, y, star, loss)
    assert abs(curve[-1] - brute) <= 1e-10
    assert abs(acc.total - brute) <= 1e-10


def test_final_regret_nonnegative_against_comparator(rng):
    loss = LossSpec(lam=0.5, n_agents=4)
    z, y = rng.standard_normal((30, 4, 6)), rng.standard_normal((30, 4))
    star = regret_comparator(z.reshape(-1, 6), y.ravel(), loss, 30)
    for _ in range(20):
        fixed = np.broadcast_to(star + rng.normal(0, 0.5, 6), z.shape)
        assert regret(fixed, z, y, star, loss)[-1] >= -1e-9


@pytest.mark.parametrize("power", [0.5, 1.0])
def test_power_law_slopes(power):
    ts = [2 ** k for k in range(6, 12)]
    curve = {t: t ** power for t in ts}
    assert abs(sublinearity_fit(curve, ts) - power) <= 0.01
    arr = np.arange(1, ts[-1] + 1) ** power
    assert abs(sublinearity_fit(arr, ts) - power) <= 0.01


def test_degenerate_regret():
    with pytest.raises(DegenerateRegret):
        sublinearity_fit({1: 1.0, 2: -1.0, 4: 2.0, 8: 3.0}, [1, 2, 4, 8])
    with pytest.raises(ValueError):
        sublinearity_fit({1: 1.0, 2: 2.0}, [1, 2])


def test_bound_reference_values():
    bound = broadcast_error_bound
    assert bound(4, 50, CensorSpec(2.0, 0.9), None) == pytest.approx(3.6, rel=1e-15)
    assert bound(4, 50, CensorSpec(1e-9, 0.5), QuantizerSpec(3, -4, 4)) == 10.0
    assert broadcast_error_bound(4, 50) == 0.0


def test_error_bound_report():
    q, c = QuantizerSpec(3, -4, 4), CensorSpec(1e-9, 0.5)
    assert error_bound_check(0.0, 4, 50).passed
    rep = error_bound_check([9.0, 10.0, 12.0, 3.0], 4, 50, c, q, new_clip_events=[0, 0, 1, 0])
    assert rep.passed and rep.exempt_rounds == 1 and rep.bound == 10.0
    assert rep.max_ratio == 1.0
    rep = error_bound_check([11.0], 4, 50, c, q)
    assert not rep.passed and rep.violations == 1
