import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CountingRng, optimal_by_enumeration
from seren.dp_oracle import greedy_policy, solve_mdp_q
from seren.mdp_env import (
    EAST,
    TabularMdp,
    make_chain,
    make_env,
    make_random_mdp,
    make_sparse_grid,
    step,
)


def two_state_chain():
    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = 1.0
    P[1, 0, 1] = 1.0
    return TabularMdp(P, np.zeros((2, 1)), 0.9, terminal_states={1})


def test_step_deterministic_chain():
    mdp = two_state_chain()
    out = step(mdp, 0, 0, np.random.default_rng(0))
    assert out == (1, 0.0, True)


def test_step_consumes_exactly_one_draw():
    mdp = make_random_mdp(6, 3, seed=1)
    rng = CountingRng(0)
    for k in range(50):
        step(mdp, k % 6, k % 3, rng)
    assert rng.draws == 50


def test_step_rejects_bad_indices():
    mdp = two_state_chain()
    with pytest.raises(ValueError):
        step(mdp, 2, 0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        step(mdp, 0, 1, np.random.default_rng(0))


def test_step_frequencies_follow_transition_row():
    mdp = make_chain(5)
    rng = np.random.default_rng(3)
    nxt = [step(mdp, 2, 1, rng).next_state for _ in range(20_000)]
    freq = np.bincount(nxt, minlength=5) / len(nxt)
    np.testing.assert_allclose(freq, mdp.transition[2, 1], atol=0.015)


class TestSparseGrid:
    def test_shape_and_rewarded_transitions(self):
        mdp = make_sparse_grid(8, 8, (0, 0), (7, 7), 0.0)
        assert (mdp.n_states, mdp.n_actions) == (64, 4)
        rewarded = np.argwhere(mdp.reward > 0)
        # only the two goal-adjacent cells have a move into the goal
        assert {tuple(x) for x in rewarded} == {(7 * 8 + 6, EAST), (6 * 8 + 7, 2)}
        assert np.all(mdp.reward[mdp.reward > 0] == 1.0)

    def test_non_goal_move_gives_zero_reward(self):
        mdp = make_sparse_grid(8, 8, (0, 0), (7, 7), 0.0)
        out = step(mdp, 0, EAST, np.random.default_rng(0))
        assert out == (1, 0.0, False)

    def test_goal_entry_rewards_and_terminates(self):
        mdp = make_sparse_grid(8, 8, (0, 0), (7, 7), 0.0)
        out = step(mdp, 7 * 8 + 6, EAST, np.random.default_rng(0))
        assert out == (63, 1.0, True)

    def test_interior_east_move(self):
        mdp = make_sparse_grid(8, 8, (0, 0), (7, 7), 0.0)
        s = 3 * 8 + 3
        assert mdp.transition[s, EAST, s + 1] == 1.0

    def test_off_grid_stays(self):
        mdp = make_sparse_grid(4, 3, (0, 0), (3, 2), 0.0)
        assert mdp.transition[0, 0, 0] == 1.0  # north from the top row
        assert mdp.transition[0, 3, 0] == 1.0  # west from the left column

    def test_slip_rows_normalised(self):
        mdp = make_sparse_grid(8, 8, (0, 0), (7, 7), 0.2)
        np.testing.assert_allclose(mdp.transition.sum(axis=2), 1.0, atol=1e-9)
        s = 3 * 8 + 3
        assert mdp.transition[s, EAST, s + 1] == pytest.approx(0.8 + 0.05)

    def test_goal_terminal_self_loop(self):
        mdp = make_sparse_grid(3, 3, (0, 0), (2, 2))
        assert mdp.terminal_states == {8}
        assert np.all(mdp.transition[8, :, 8] == 1.0)
        assert np.all(mdp.reward[8] == 0.0)

    @pytest.mark.parametrize("kwargs", [
        dict(width=1, height=1, start=(0, 0), goal=(0, 0)),
        dict(width=3, height=3, start=(1, 1), goal=(1, 1)),
        dict(width=3, height=3, start=(0, 0), goal=(3, 0)),
        dict(width=3, height=3, start=(0, 0), goal=(2, 2), slip=1.0),
    ])
    def test_rejects_bad_grids(self, kwargs):
        with pytest.raises(ValueError):
            make_sparse_grid(**kwargs)


class TestChain:
    def test_shape_and_boundary(self):
        mdp = make_chain(5, 0.005, 1.0)
        assert (mdp.n_states, mdp.n_actions) == (5, 2)
        out = step(mdp, 0, 0, np.random.default_rng(0))
        assert out == (0, 0.005, False)

    def test_rejects_short_chain(self):
        with pytest.raises(ValueError):
            make_chain(2)

    def test_optimal_q_matches_enumeration(self):
        mdp = make_chain(5, 0.005, 1.0, discount=0.95)
        _, q_brute, pi_brute = optimal_by_enumeration(mdp.transition, mdp.reward, 0.95)
        q = solve_mdp_q(mdp, tol=1e-10)
        np.testing.assert_allclose(q, q_brute, atol=1e-9)
        np.testing.assert_array_equal(pi_brute, np.ones(5, dtype=int))
        np.testing.assert_array_equal(greedy_policy(q), np.ones(5, dtype=int))


class TestRandomMdp:
    def test_reproducible(self):
        a, b = make_random_mdp(7, 3, 0.4, seed=11), make_random_mdp(7, 3, 0.4, seed=11)
        np.testing.assert_array_equal(a.transition, b.transition)
        np.testing.assert_array_equal(a.reward, b.reward)

    def test_single_state(self):
        mdp = make_random_mdp(1, 3, seed=0)
        np.testing.assert_array_equal(mdp.transition[0, :, 0], 1.0)

    def test_rows_normalised_over_many_seeds(self):
        for seed in range(100):
            mdp = make_random_mdp(5, 3, 0.5, seed=seed)
            assert np.max(np.abs(mdp.transition.sum(axis=2) - 1.0)) <= 1e-9

    def test_sparsity_fraction(self):
        mdp = make_random_mdp(10, 4, 0.25, seed=2)
        assert np.sum(mdp.reward == 0.0) == 10

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            make_random_mdp(0, 2)


def test_construction_validates_rows_and_discount():
    P = np.full((2, 1, 2), 0.4)
    with pytest.raises(ValueError):
        TabularMdp(P, np.zeros((2, 1)), 0.9)
    P = np.full((2, 1, 2), 0.5)
    with pytest.raises(ValueError):
        TabularMdp(P, np.zeros((2, 1)), 1.0)
    with pytest.raises(ValueError):
        TabularMdp(P, np.array([[np.inf], [0.0]]), 0.5)
    with pytest.raises(ValueError):
        TabularMdp(P, np.zeros((2, 1)), 0.5, terminal_states={0})


def test_mdp_is_immutable():
    mdp = make_chain(4)
    with pytest.raises(ValueError):
        mdp.transition[0, 0, 0] = 0.5


def test_make_env_by_name():
    assert make_env({"name": "grid", "width": 4, "height": 4, "start": [0, 0], "goal": [3, 3]}).n_states == 16
    assert make_env({"name": "chain", "n": 6}).n_states == 6
    with pytest.raises(ValueError):
        make_env({"name": "pixels"})
    with pytest.raises(ValueError):
        make_env({"name": "chain", "length": 6})


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 12), m=st.integers(1, 4))
def test_policy_kernel_non_expansive(seed, n, m):
    mdp = make_random_mdp(n, m, seed=seed)
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(m), size=n)
    v1, v2 = rng.normal(size=n) * 10, rng.normal(size=n) * 10
    P = mdp.policy_kernel(pi)
    assert np.max(np.abs(P @ v1 - P @ v2)) <= np.max(np.abs(v1 - v2)) + 1e-12
