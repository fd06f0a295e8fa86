import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import random_lq_problem
from turnpike.errors import ShootingError
from turnpike.lq_oracle import lq_bvp_solution
from turnpike.pipeline import classic_guess, prepare
from turnpike.registry import get_problem
from turnpike.riccati import build_hamiltonian_matrix, solve_splitting
from turnpike.model import linearize
from turnpike.shooting import (
    ShootingProblem,
    anchor_index,
    build_wellposedness_matrix,
    classic_shoot,
    midpoint_shoot,
    pontryagin_residuals,
    schur_complement,
)
from turnpike.static import solve_static


@pytest.fixture(scope="module")
def ex2_mid(ex2_setup):
    return midpoint_shoot(ex2_setup.problem, 20.0, 2000, ex2_setup.static)


def oracle_distance(e, p, T):
    t, x, lam, u, gamma = lq_bvp_solution(p, T, e.steps)
    return max(np.abs(e.x - x).max(), np.abs(e.lam - lam).max(), np.abs(e.u - u).max()), gamma


@pytest.mark.parametrize("T", [5.0, 10.0])
def test_ex1_midpoint_matches_oracle(ex1_setup, T):
    e = midpoint_shoot(ex1_setup.problem, T, 2000, ex1_setup.static)
    dist, gamma = oracle_distance(e, ex1_setup.problem, T)
    assert dist <= 1e-8
    np.testing.assert_allclose(e.Gamma, gamma, atol=1e-8)


@pytest.mark.parametrize("T", [5.0, 10.0])
def test_ex1_classic_matches_oracle(ex1_setup, T):
    p, s = ex1_setup.problem, ex1_setup.static
    e = classic_shoot(p, T, 2000, *classic_guess(p, s, "static"))
    assert oracle_distance(e, p, T)[0] <= 1e-8


@settings(max_examples=10)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 3), kind=st.sampled_from(["fixed-initial-free-final", "fixed-both"]))
def test_random_lq_midpoint_matches_oracle(seed, n, kind):
    p = random_lq_problem(np.random.default_rng(seed), n, 1, kind)
    s = solve_static(p)
    d = linearize(p, s)
    if solve_splitting(build_hamiltonian_matrix(d), d).C2 * 4.0 > 60:
        return
    e = midpoint_shoot(p, 4.0, 800, s)
    dist, _ = oracle_distance(e, p, 4.0)
    scale = max(1.0, np.abs(e.stacked()).max())
    assert dist <= 1e-6 * scale


def test_ex2_midpoint_converges(ex2_mid):
    assert ex2_mid.converged
    assert ex2_mid.boundary_residual <= 1e-9
    assert ex2_mid.iterations <= 50
    np.testing.assert_allclose(ex2_mid.x[0], [1, 1], atol=1e-9)
    np.testing.assert_allclose(ex2_mid.x[-1], [3, 0], atol=1e-9)


def test_ex2_pontryagin_residuals(ex2_mid, ex2_setup):
    res = pontryagin_residuals(ex2_setup.problem, ex2_mid)
    assert res["stationarity"] <= 1e-9
    assert res["adjoint_defect"] <= 1e-9


def test_ex2_midpoint_stays_near_turnpike(ex2_mid, ex2_setup):
    mid = ex2_mid.x[len(ex2_mid.t) // 2]
    assert np.linalg.norm(mid - ex2_setup.static.x_bar) <= 1e-2


def test_ex2_classic_from_zero_fails_with_history(ex2_setup):
    p, s = ex2_setup.problem, ex2_setup.static
    with pytest.raises(ShootingError) as info:
        classic_shoot(p, 20.0, 2000, *classic_guess(p, s, "zero"))
    assert "residual_history" in info.value.details


def test_midpoint_residual_history_decreases(ex2_mid):
    hist = np.array(ex2_mid.residual_history)
    assert hist[-1] < hist[0]
    assert len(hist) == ex2_mid.iterations + 1


@pytest.mark.parametrize("frac", [0.3, 0.5, 0.7])
def test_anchor_fraction_does_not_change_solution(ex1_setup, frac):
    p, s = ex1_setup.problem, ex1_setup.static
    e = midpoint_shoot(p, 8.0, 1600, s, anchor_fraction=frac)
    assert oracle_distance(e, p, 8.0)[0] <= 1e-8


@pytest.mark.parametrize("steps,frac,expected", [(10, 0.5, 5), (11, 0.5, 6), (10, 0.01, 1), (10, 0.99, 9)])
def test_anchor_index(steps, frac, expected):
    assert anchor_index(steps, frac) == expected


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2])
def test_anchor_fraction_validated(bad):
    with pytest.raises(ValueError):
        anchor_index(10, bad)


def test_horizon_validated(ex1_setup):
    with pytest.raises(ValueError, match="T must be positive"):
        midpoint_shoot(ex1_setup.problem, 0.0, 100, ex1_setup.static)


def test_residual_vanishes_on_oracle_data(ex1_setup):
    p = ex1_setup.problem
    t, x, lam, u, gamma = lq_bvp_solution(p, 6.0, 1200)
    sp = ShootingProblem(p, 6.0, 1200, anchor=600)
    xi = np.concatenate([x[600], lam[600], gamma])
    assert np.max(np.abs(sp.residual(xi))) <= 1e-9


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex1-periodic"])
def test_wellposedness_matrix(name):
    setup = prepare(name)
    w = build_wellposedness_matrix(setup.problem, setup.static, setup.split)
    n, k = setup.problem.n, setup.problem.k
    assert w.Q_shoot.shape == (k + 2 * n, 2 * n + k)
    assert w.rcond >= 1e-8


def test_schur_complement_invertible(ex2_setup):
    S = schur_complement(ex2_setup.problem, ex2_setup.static, ex2_setup.split)
    assert np.linalg.cond(S) < 1e8
