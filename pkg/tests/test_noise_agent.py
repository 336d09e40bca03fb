import numpy as np
import pytest

from agents.compression_agent import SelectionSet
from agents.noise_agent import (
    NoiseDesignAgent, NoisePlan, NoiseSpec, f_to_transition, gen_arn, gen_rnf, gen_rnp, impulse_budget, objective,
    solve_F,
)
from utils.errors import DomainError


@pytest.mark.parametrize("E_A, rho, expected", [(0.0, 1.0, 0), (10.0, 1.0, 10), (10.0, 2.0 ** 0.5, 5)])
def test_impulse_budget_examples(E_A, rho, expected):
    spec = NoiseSpec(mu_a=0.0, sigma_a=1.0, rho=rho, E_A=E_A)
    assert impulse_budget(spec, 200) == expected


def test_impulse_budget_counts_the_mean():
    # E[n^2] = 1 + 1: um impulso custa 2
    assert impulse_budget(NoiseSpec(mu_a=1.0, sigma_a=1.0, E_A=7.0), 50) == 3


def test_noise_spec_validation():
    with pytest.raises(DomainError):
        NoiseSpec(sigma_a=0.0)
    with pytest.raises(DomainError):
        NoiseSpec(rho=-1.0)
    with pytest.raises(DomainError):
        NoiseSpec(E_A=-0.5)


def test_solve_F_within_budget_returns_selection(rng):
    omega_P = SelectionSet(20, (2, 7, 12))
    assert solve_F(omega_P, 5, rng) == omega_P
    assert solve_F(omega_P, 3, rng) == omega_P


def test_solve_F_over_budget_draws_subset():
    omega_P = SelectionSet(20, (2, 7, 12))
    F = solve_F(omega_P, 2, np.random.default_rng(5))
    assert len(F) == 2
    assert F.issubset(omega_P)
    assert F == solve_F(omega_P, 2, np.random.default_rng(5))


def test_solve_F_zero_budget_is_empty(rng):
    F = solve_F(SelectionSet(10, (1, 4)), 0, rng)
    assert len(F) == 0
    with pytest.raises(DomainError):
        solve_F(SelectionSet(10, (1, 4)), -1, rng)


def test_solve_F_is_optimal_by_exhaustion(rng):
    spec = NoiseSpec(mu_a=0.3, sigma_a=1.2, rho=1.5)
    for _ in range(200):
        m = int(rng.integers(1, 13))
        omega_P = SelectionSet(m, tuple(rng.choice(m, size=int(rng.integers(0, m + 1)), replace=False)))
        A = int(rng.integers(0, m + 1))
        target = sum(1 << i for i in omega_P.indices)
        best = max(
            bin(mask & target).count("1") for mask in range(1 << m) if bin(mask).count("1") <= A
        ) * spec.impulse_energy
        F = solve_F(omega_P, A, rng)
        assert len(F) <= A
        assert objective(F, omega_P, spec) == best


def test_intersection_lemma_on_dense_matrices(rng):
    for _ in range(500):
        m = int(rng.integers(1, 65))
        F = SelectionSet(m, tuple(rng.choice(m, size=int(rng.integers(0, m + 1)), replace=False)))
        omega_P = SelectionSet(m, tuple(rng.choice(m, size=int(rng.integers(0, m + 1)), replace=False)))
        F_hat, P_hat = F.diagonal(), omega_P.diagonal()
        support = tuple(np.flatnonzero(np.diag(F_hat.T @ P_hat @ F_hat)))
        assert support == F.intersection(omega_P).indices


def test_objective_matches_matrix_trace():
    spec = NoiseSpec(mu_a=0.5, sigma_a=1.0, rho=2.0)
    F = SelectionSet(10, (0, 3, 4, 8))
    omega_P = SelectionSet(10, (3, 5, 8, 9))
    F_hat, P_hat = F.diagonal(), omega_P.diagonal()
    delta = F_hat.T @ P_hat @ F_hat
    assert objective(F, omega_P, spec) == pytest.approx(np.trace(delta) * spec.impulse_energy)


def test_arn_energy_matches_second_moment(rng):
    for _ in range(10):
        m = int(rng.integers(4, 17))
        F = SelectionSet(m, tuple(rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False)))
        sigma = float(rng.uniform(0.5, 2.0))
        spec = NoiseSpec(mu_a=float(rng.choice([-1, 1]) * rng.uniform(0.5, 1.5) * sigma), sigma_a=sigma,
                         rho=float(rng.uniform(0.5, 2.0)))
        noise = gen_arn(NoisePlan(F, A=len(F)), spec, rng, n=100_000)
        energy = (noise ** 2).sum(axis=1).mean()
        assert energy == pytest.approx(len(F) * spec.rho ** 2 * (spec.sigma_a ** 2 + spec.mu_a ** 2), rel=0.02)
        # com mu_a != 0 a variante sigma^2 - mu^2 fica longe da amostragem
        assert energy != pytest.approx(len(F) * spec.rho ** 2 * (spec.sigma_a ** 2 - spec.mu_a ** 2), rel=0.02)


def test_arn_noise_is_zero_outside_support(rng):
    spec = NoiseSpec(mu_a=1.0, sigma_a=0.5, rho=2.0)
    plan = NoisePlan(SelectionSet(12, (1, 5, 6)), A=3)
    noise = gen_arn(plan, spec, rng, n=50)
    outside = [i for i in range(12) if i not in plan.F]
    assert np.all(noise[:, outside] == 0)
    assert np.all(noise[:, [1, 5, 6]] != 0)


def test_arn_with_empty_support_is_zero(rng):
    plan = NoisePlan(SelectionSet(6), A=0)
    np.testing.assert_array_equal(gen_arn(plan, NoiseSpec(), rng), np.zeros(6))


def test_rnf_energy_and_shape(rng):
    spec = NoiseSpec(mu_a=0.0, sigma_a=1.0, rho=0.5)
    noise = gen_rnf(40, spec, rng, n=5_000)
    assert noise.shape == (5_000, 40)
    assert (noise ** 2).sum(axis=1).mean() == pytest.approx(40 * 0.25, rel=0.02)


def test_rnp_count_support_and_resampling(rng):
    spec = NoiseSpec(mu_a=0.0, sigma_a=1.0)
    noise = gen_rnp(10, 3, spec, rng, n=20_000)
    assert np.all((noise != 0).sum(axis=1) == 3)
    np.testing.assert_allclose((noise != 0).mean(axis=0), 0.3, atol=0.02)


def test_rnp_edge_cases(rng):
    spec = NoiseSpec()
    np.testing.assert_array_equal(gen_rnp(8, 0, spec, rng), np.zeros(8))
    assert gen_rnp(8, 2, spec, rng).shape == (8,)
    with pytest.raises(DomainError):
        gen_rnp(8, 9, spec, rng)


def test_noise_plan_validation():
    with pytest.raises(DomainError):
        NoisePlan(SelectionSet(5, (0, 1, 2)), A=2)
    with pytest.raises(DomainError):
        NoisePlan(SelectionSet(5, (0,)), A=5, scheme="RnF")
    with pytest.raises(DomainError):
        NoisePlan(SelectionSet(5), A=1, scheme="XYZ")
    assert NoisePlan.rnf(5).rank == 5


def test_plan_scheme_must_match_generator(rng):
    with pytest.raises(DomainError):
        gen_arn(NoisePlan.rnf(4), NoiseSpec(), rng)


def test_f_to_transition_example():
    G = f_to_transition(SelectionSet(6, (1, 4)))
    assert G.n == 2
    assert G.states == ((0, 1), (0, 1, 0, 0, 1))
    np.testing.assert_array_equal(G.dense(), [[0, 1], [0, 0]])
    assert G.to_selection() == SelectionSet(6, (1, 4))


def test_f_to_transition_chain_structure():
    F = SelectionSet(25, (0, 3, 7, 11, 24))
    G = f_to_transition(F)
    dense = G.dense()
    assert G.impulse_positions() == F.indices
    assert dense.sum() == G.n - 1
    assert np.all(dense.sum(axis=1)[:-1] == 1)
    assert dense[-1].sum() == 0
    assert "s3 -> s4" in G.to_text()


def test_f_to_transition_small_supports():
    assert f_to_transition(SelectionSet(5)).n == 0
    assert f_to_transition(SelectionSet(5)).density == 0.0
    single = f_to_transition(SelectionSet(5, (2,)))
    assert single.n == 1
    assert single.entries == {}


def test_design_agent_builds_frozen_plan():
    spec = NoiseSpec(E_A=3.0)
    agent = NoiseDesignAgent(spec)
    omega_P = SelectionSet(20, (1, 6, 11, 16))
    plan, G = agent.design(omega_P, np.random.default_rng(0))
    again, _ = agent.design(omega_P, np.random.default_rng(0))
    assert plan.A == 3
    assert plan.rank == 3
    assert plan.F.issubset(omega_P)
    assert plan.F == again.F
    assert G.to_selection() == plan.F


def test_design_agent_budget_override_and_matched_rnp(rng):
    agent = NoiseDesignAgent(NoiseSpec(E_A=0.0), A=10)
    omega_P = SelectionSet(20, (1, 6, 11, 16))
    plan, _ = agent.design(omega_P, rng)
    assert plan.F == omega_P
    rnp = agent.matched_rnp(plan)
    assert rnp.count == 4
    assert rnp.scheme == "RnP"
    noise = agent.generate(rnp, rng, n=3)
    assert np.all((noise != 0).sum(axis=1) == 4)
    drawn = agent.draw_rnp_plan(20, 4, 10, rng)
    assert drawn.rank == 4
