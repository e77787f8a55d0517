import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seren.dp_oracle import random_switching_problem, value_iteration
from seren.linear_fa import (
    FeatureBasis,
    fa_check,
    project,
    projected_fixed_point,
    random_basis,
    stationary_distribution,
    stationary_weighting,
)
from seren.mdp_env import make_random_mdp


class TestProjection:
    def test_constant_feature_example(self):
        basis = FeatureBasis(np.array([[1.0], [1.0]]), np.array([0.5, 0.5]))
        np.testing.assert_allclose(project(basis, np.array([0.0, 2.0])), [1.0, 1.0])

    def test_weighting_shifts_projection(self):
        basis = FeatureBasis(np.ones((2, 1)), np.array([0.75, 0.25]))
        np.testing.assert_allclose(project(basis, np.array([0.0, 2.0])), [0.5, 0.5])

    def test_identity_basis_is_identity(self):
        basis = FeatureBasis(np.eye(5), np.full(5, 0.2))
        x = np.arange(5.0)
        np.testing.assert_allclose(project(basis, x), x)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        basis = random_basis(7, 3, rng, rng.dirichlet(np.ones(7)))
        once = project(basis, rng.normal(size=7))
        np.testing.assert_allclose(project(basis, once), once, atol=1e-12)

    def test_rank_deficient_rejected(self):
        with pytest.raises(ValueError):
            FeatureBasis(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]), np.full(3, 1 / 3))

    @pytest.mark.parametrize("weighting", [np.array([0.5, 0.6]), np.array([1.0, 0.0]), np.array([0.5])])
    def test_bad_weighting_rejected(self, weighting):
        with pytest.raises(ValueError):
            FeatureBasis(np.ones((2, 1)), weighting)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 10), data=st.data())
def test_projection_non_expansive_in_weighted_norm(seed, n, data):
    k = data.draw(st.integers(1, n))
    rng = np.random.default_rng(seed)
    basis = random_basis(n, k, rng, rng.dirichlet(np.ones(n)))
    x, y = rng.normal(size=n) * 10, rng.normal(size=n) * 10
    assert basis.norm(project(basis, x) - project(basis, y)) <= basis.norm(x - y) + 1e-10


class TestStationary:
    def test_doubly_stochastic_gives_uniform(self):
        P = np.array([[0.2, 0.5, 0.3], [0.5, 0.3, 0.2], [0.3, 0.2, 0.5]])
        np.testing.assert_allclose(stationary_distribution(P), np.full(3, 1 / 3), atol=1e-12)

    def test_periodic_swap(self):
        P = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(stationary_distribution(P), [0.5, 0.5], atol=1e-12)

    def test_random_chain_residual(self):
        mdp = make_random_mdp(6, 3, seed=9)
        pi_policy = np.full((6, 3), 1 / 3)
        d = stationary_weighting(mdp)
        P = mdp.policy_kernel(pi_policy)
        assert abs(d.sum() - 1.0) < 1e-12
        assert np.max(np.abs(d @ P - d)) <= 1e-10

    def test_absorbing_chain_stays_positive(self):
        P = np.array([[0.5, 0.5], [0.0, 1.0]])
        d = stationary_distribution(P)
        assert np.all(d > 0)
        assert d[1] > 0.99


def test_identity_basis_recovers_exact_value():
    p = random_switching_problem(3, 8, 2, 0.9, beta=1.0)
    basis = FeatureBasis(np.eye(8), stationary_weighting(p.mdp))
    sol = projected_fixed_point(p, basis)
    assert sol.approx_error <= 1e-8
    np.testing.assert_allclose(sol.value, value_iteration(p).value, atol=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_error_within_bound(seed):
    sol = fa_check(seed)
    assert sol.fixed_point_residual <= 1e-8
    assert sol.within_bound, (sol.approx_error, sol.bound)


def test_basis_must_match_state_count():
    p = random_switching_problem(0, 5, 2, 0.9, beta=1.0)
    with pytest.raises(ValueError):
        projected_fixed_point(p, FeatureBasis(np.eye(4), np.full(4, 0.25)))
