"""Projected linear approximation of the Switcher's value.

Values are represented as ``Phi @ r`` for a fixed feature matrix ``Phi``.
The projection is weighted least squares under a state distribution D, and
the approximate solution is the fixed point of ``Pi T`` where ``T`` is the
switching Bellman operator from :mod:`seren.dp_oracle`. Whenever that fixed
point exists, ``||Phi r* - V*||_D <= (1 - gamma^2)^(-1/2) ||Pi V* - V*||_D``
is checked against the exact DP solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dp_oracle import SwitchingProblem, switcher_bellman, value_iteration
from .mdp_env import TabularMdp

REGULARIZATION = 1e-6


@dataclass(frozen=True, eq=False)
class FeatureBasis:
    features: np.ndarray
    weighting: np.ndarray

    def __post_init__(self) -> None:
        phi = np.array(self.features, dtype=float)
        if phi.ndim == 1:
            phi = phi[:, None]
        d = np.array(self.weighting, dtype=float)
        if phi.ndim != 2 or d.shape != (phi.shape[0],):
            raise ValueError("features must be (rows, p) and weighting must have one entry per row")
        if np.any(d <= 0) or abs(d.sum() - 1.0) > 1e-9:
            raise ValueError("weighting must be a strictly positive probability vector")
        if np.linalg.matrix_rank(phi) < phi.shape[1]:
            raise ValueError("feature columns must be linearly independent")
        phi.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "features", phi)
        object.__setattr__(self, "weighting", d)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @cached_property
    def _solver(self) -> np.ndarray:
        # maps a target vector to its least-squares coefficients
        phi, d = self.features, self.weighting
        gram = phi.T @ (d[:, None] * phi)
        return np.linalg.solve(gram, phi.T * d[None, :])

    def coefficients(self, target: np.ndarray) -> np.ndarray:
        target = np.asarray(target, dtype=float)
        if target.shape != (self.features.shape[0],):
            raise ValueError(f"target must have length {self.features.shape[0]}")
        return self._solver @ target

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(np.dot(self.weighting, np.asarray(x) ** 2)))


def project(basis: FeatureBasis, target: np.ndarray) -> np.ndarray:
    return basis.features @ basis.coefficients(target)


def random_basis(n_rows: int, n_features: int, rng: np.random.Generator,
                 weighting: np.ndarray | None = None) -> FeatureBasis:
    """Standard-normal features orthonormalised by QR."""
    q, _ = np.linalg.qr(rng.standard_normal((n_rows, n_features)))
    if weighting is None:
        weighting = np.full(n_rows, 1.0 / n_rows)
    return FeatureBasis(q, weighting)


def _irreducible(P: np.ndarray) -> bool:
    n = P.shape[0]
    reach = (P > 0) | np.eye(n, dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(n))) + 1)):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    return bool(reach.all())


def stationary_weighting(mdp: TabularMdp, policy: np.ndarray | None = None,
                         tol: float = 1e-12, max_iterations: int = 1_000_000) -> np.ndarray:
    """Stationary distribution of the chain induced by ``policy`` (uniform-random by default).

    Reducible chains are mixed with ``REGULARIZATION`` of the uniform
    distribution first. Power iteration runs on the lazy chain ``(I + P) / 2``,
    which has the same stationary distribution and is aperiodic.
    """
    if policy is None:
        policy = np.full((mdp.n_states, mdp.n_actions), 1.0 / mdp.n_actions)
    return stationary_distribution(mdp.policy_kernel(policy), tol, max_iterations)


def stationary_distribution(P: np.ndarray, tol: float = 1e-12,
                            max_iterations: int = 1_000_000) -> np.ndarray:
    n = P.shape[0]
    if not _irreducible(P):
        P = (1.0 - REGULARIZATION) * P + REGULARIZATION / n
    lazy = 0.5 * (np.eye(n) + P)
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        nxt = pi @ lazy
        nxt /= nxt.sum()
        if np.max(np.abs(nxt @ P - nxt)) <= tol:
            return nxt
        pi = nxt
    raise RuntimeError("power iteration did not converge")


@dataclass
class ProjectedSolution:
    r_star: np.ndarray
    fixed_point_residual: float
    approx_error: float
    bound: float
    iterations: int
    exact_value: np.ndarray = field(repr=False)
    features: np.ndarray = field(repr=False)

    @property
    def value(self) -> np.ndarray:
        return self.features @ self.r_star

    @property
    def within_bound(self) -> bool:
        return self.approx_error <= self.bound + 1e-9


def projected_fixed_point(p: SwitchingProblem, basis: FeatureBasis, tol: float = 1e-10,
                          max_iterations: int = 100_000) -> ProjectedSolution:
    """Iterate ``Phi r <- Pi T (Phi r)`` from ``r = 0`` and compare with the exact V*."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if basis.features.shape[0] != p.n_states:
        raise ValueError("basis must have one row per state")
    phi = basis.features
    r = np.zeros(basis.n_features)
    v = phi @ r
    for it in range(1, max_iterations + 1):
        r_new = basis.coefficients(switcher_bellman(p, v))
        v_new = phi @ r_new
        change = basis.norm(v_new - v)
        r, v = r_new, v_new
        if not np.all(np.isfinite(v)):
            break
        if change <= tol:
            exact = value_iteration(p, tol=min(tol, 1e-10)).value
            residual = basis.norm(project(basis, switcher_bellman(p, v)) - v)
            error = basis.norm(v - exact)
            bound = float(basis.norm(project(basis, exact) - exact) / np.sqrt(1.0 - p.discount**2))
            return ProjectedSolution(r, residual, error, bound, it, exact, phi)
    raise RuntimeError("projected iteration diverged or hit the iteration cap; "
                       "Pi T is not a contraction for this basis and weighting")


def fa_check(seed: int, n_states: int = 8, n_actions: int = 2, n_features: int = 3,
             discount: float = 0.9, beta: float = 1.0, tol: float = 1e-10) -> ProjectedSolution:
    """One random instance: random switching problem, stationary weighting, orthonormal random features."""
    from .dp_oracle import random_switching_problem

    p = random_switching_problem(seed, n_states, n_actions, discount, beta)
    weighting = stationary_weighting(p.mdp)
    basis = random_basis(n_states, n_features, np.random.default_rng([seed, 104729]), weighting)
    return projected_fixed_point(p, basis, tol=tol)
