"""Worked input/output examples for each module, checked against closed forms."""

import json

import numpy as np
import pytest

from turnpike.analysis import count_crossings, fit_envelope, verify_turnpike
from turnpike.direct import solve_direct, transcribe, warm_start_from_static
from turnpike.lq_oracle import lq_bvp_solution
from turnpike.model import (
    AffineQuadratic,
    ExtremalPoint,
    HamiltonianBlocks,
    Problem,
    Terminal,
    assemble_abw,
    check_assumptions,
    eval_hamiltonian,
    hessian_blocks,
    linearize,
)
from turnpike.pipeline import RunConfig, compare, prepare, run, trajectory_distance
from turnpike.registry import ex1, ex2, get_problem
from turnpike.riccati import (
    are_residual,
    build_hamiltonian_matrix,
    diagonalization_defect,
    solve_splitting,
    verify_spectrum,
)
from turnpike.shooting import build_wellposedness_matrix, classic_shoot, midpoint_shoot
from turnpike.static import compute_gamma_bar, solve_static, solve_static_lq
from _oracles import lq_linearization

OSC_A = np.array([[0.0, 1.0], [-1.0, 0.0]])


def scalar_lq(a, b, q, u, xd, ud, terminal=None):
    aq = AffineQuadratic(A=[[a]], B=[[b]], Q=[[q]], U=[[u]], xd=[xd], ud=[ud])
    return aq.to_problem(terminal or Terminal("fixed-initial-free-final", x0=[0.0]))


@pytest.fixture(scope="module")
def ex1_T30_mid():
    s = prepare("ex1")
    return midpoint_shoot(s.problem, 30.0, 1000, s.static)


@pytest.fixture(scope="module")
def ex1_T30_direct():
    s = prepare("ex1")
    return solve_direct(s.problem, 30.0, 1000, s.static)


class TestHamiltonianValues:
    def test_ex1_static_point(self):
        e = ExtremalPoint([1.0, 0.0], [-7.0, 1.0], [1.0])
        assert eval_hamiltonian(ex1(), e) == pytest.approx(-25.5, abs=1e-12)

    def test_ex2_static_point(self):
        e = ExtremalPoint([1.25, 0.0], [-0.5, -0.75], [0.25])
        f0 = 0.5 * ((1.25 - 0.5) ** 2 + (0.0 - 0.5) ** 2 + (0.25 - 1.0) ** 2)
        assert eval_hamiltonian(ex2(), e) == pytest.approx(-f0, abs=1e-12)

    def test_zero_cost_zero_adjoint(self):
        p = Problem(n=2, m=1, f=lambda x, u: np.array([x[1], u[0]]), f0=lambda x, u: 0.0,
                    terminal=Terminal("periodic"))
        assert eval_hamiltonian(p, ExtremalPoint([0.3, 0.1], [0.0, 0.0], [2.0])) == 0.0


class TestHessianBlocks:
    def test_lq_blocks(self):
        b = hessian_blocks(ex1(), ExtremalPoint([0.2, -0.4], [1.0, 2.0], [0.5]))
        np.testing.assert_allclose(b.Huu, [[-1.0]])
        np.testing.assert_allclose(b.Hxx, -np.eye(2))
        np.testing.assert_allclose(b.Hxu, np.zeros((2, 1)))

    def test_control_affine_huu(self):
        b = hessian_blocks(ex2(), ExtremalPoint([0.2, -0.4], [1.0, 2.0], [0.5]))
        np.testing.assert_allclose(b.Huu, [[-1.0]])

    def test_lq_abw(self):
        d = linearize(ex1(), solve_static(ex1()))
        np.testing.assert_allclose(d.A, OSC_A)
        np.testing.assert_allclose(d.B, [[0.0], [1.0]])
        np.testing.assert_allclose(d.W, np.eye(2))

    def test_control_affine_linear_fields_w_is_q(self):
        d = linearize(ex2(), solve_static(ex2()))
        np.testing.assert_allclose(d.W, np.eye(2), atol=1e-9)

    def test_trivial_corrections(self):
        hxl = np.array([[1.0, 2.0], [3.0, 4.0]])
        hxx = np.array([[-2.0, 0.5], [0.5, -1.0]])
        d = assemble_abw(HamiltonianBlocks(Hxx=hxx, Hxl=hxl, Hxu=np.zeros((2, 2)), Hlu=np.eye(2), Huu=-np.eye(2)))
        np.testing.assert_allclose(d.A, hxl)
        np.testing.assert_allclose(d.W, -hxx)


class TestAssumptions:
    def test_ex1(self):
        p = ex1()
        s = solve_static(p)
        rep = check_assumptions(linearize(p, s), p, s)
        assert rep.kalman_ok and rep.w_posdef

    def test_zero_b(self):
        p = ex1()
        s = solve_static(p)
        d = linearize(p, s)
        d = type(d)(A=d.A, B=np.zeros((2, 1)), W=d.W, Huu=d.Huu)
        rep = check_assumptions(d, p, s)
        assert rep.kalman_rank == 0 and not rep.kalman_ok

    def test_scalar(self):
        p = scalar_lq(0.0, 1.0, 1.0, 1.0, 0.0, 0.0)
        s = solve_static(p)
        assert check_assumptions(linearize(p, s), p, s).kalman_rank == 1


class TestStaticExamples:
    def test_unconstrained_minimizer(self):
        xd = np.array([0.7, -1.2])
        aq = AffineQuadratic(A=np.zeros((2, 2)), B=np.eye(2), Q=np.eye(2), U=np.eye(2), xd=xd, ud=[0, 0])
        s = solve_static(aq.to_problem(Terminal("periodic")))
        np.testing.assert_allclose(s.x_bar, xd, atol=1e-12)
        np.testing.assert_allclose(s.u_bar, 0, atol=1e-12)
        np.testing.assert_allclose(s.lambda_bar, 0, atol=1e-12)

    def test_equilibrium_targets(self):
        # A xd + B ud = (-1, 0) + (1, 0) = 0
        xd, ud = np.array([1.0, 1.0]), np.array([1.0])
        aq = AffineQuadratic(A=[[-1.0, 0.0], [1.0, -1.0]], B=[[1.0], [0.0]], Q=np.eye(2), U=np.eye(1),
                             xd=xd, ud=ud)
        s = solve_static_lq(aq.to_problem(Terminal("periodic")))
        np.testing.assert_allclose(s.x_bar, xd, atol=1e-12)
        np.testing.assert_allclose(s.u_bar, ud, atol=1e-12)
        np.testing.assert_allclose(s.lambda_bar, 0, atol=1e-12)

    def test_ex1_lq_and_newton_agree(self):
        a, b = solve_static(ex1()), solve_static_lq(ex1())
        np.testing.assert_allclose(a.x_bar, b.x_bar, atol=1e-10)
        np.testing.assert_allclose(a.lambda_bar, b.lambda_bar, atol=1e-10)

    def test_scalar_hand_solve(self):
        # x' = x + u, cost ((x-1)^2 + u^2)/2: u = lam, x + lam = 0, (x - 1) - lam = 0
        s = solve_static_lq(scalar_lq(1.0, 1.0, 1.0, 1.0, 1.0, 0.0))
        sol = np.linalg.solve([[1.0, 1.0], [1.0, -1.0]], [0.0, 1.0])
        assert s.x_bar[0] == pytest.approx(sol[0]) and s.lambda_bar[0] == pytest.approx(sol[1])


class TestGammaAndDefect:
    def test_periodic_gamma(self):
        p = get_problem("ex1-periodic")
        s = solve_static(p)
        np.testing.assert_allclose(s.gamma_bar, -s.lambda_bar, atol=1e-12)
        assert s.defect == 0.0

    def test_zero_adjoint_zero_gamma(self):
        xd = np.array([0.7, -1.2])
        aq = AffineQuadratic(A=np.zeros((2, 2)), B=np.eye(2), Q=np.eye(2), U=np.eye(2), xd=xd, ud=[0, 0])
        p = aq.to_problem(Terminal("fixed-both", x0=[0, 0], x1=[1, 1]))
        np.testing.assert_allclose(compute_gamma_bar(p, solve_static(p)), 0, atol=1e-12)

    def test_fixed_both_gamma(self):
        p = ex2()
        s = solve_static(p)
        np.testing.assert_allclose(s.gamma_bar, np.concatenate([-s.lambda_bar, s.lambda_bar]), atol=1e-12)

    def test_fixed_both_at_turnpike_has_zero_defect(self):
        s0 = solve_static(ex2())
        p = ex2(Terminal("fixed-both", x0=s0.x_bar, x1=s0.x_bar))
        assert solve_static(p).defect == pytest.approx(0.0, abs=1e-12)

    def test_ex1_defect(self):
        s = solve_static(ex1())
        assert s.defect == pytest.approx(1.0 + np.sqrt(50.0), abs=1e-9)


class TestRiccatiExamples:
    def test_ex1_matrix(self):
        h = build_hamiltonian_matrix(linearize(ex1(), solve_static(ex1())))
        expected = [[0, 1, 0, 0], [-1, 0, 0, 1], [1, 0, 0, 1], [0, 1, -1, 0]]
        np.testing.assert_allclose(h.M, expected, atol=1e-12)

    def test_identity_blocks(self):
        d = lq_linearization(np.zeros((2, 2)), np.eye(2), np.eye(2), np.eye(2))
        h = build_hamiltonian_matrix(d)
        np.testing.assert_allclose(h.M, np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]))

    @pytest.mark.parametrize("a,b,u,w,em,ep,c2", [
        (0.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0),
        (1.0, 1.0, 1.0, 3.0, -3.0, 1.0, 2.0),
    ])
    def test_scalar(self, a, b, u, w, em, ep, c2):
        d = lq_linearization([[a]], [[b]], [[w]], [[u]])
        sp = solve_splitting(build_hamiltonian_matrix(d), d)
        assert sp.E_minus[0, 0] == pytest.approx(em, abs=1e-12)
        assert sp.E_plus[0, 0] == pytest.approx(ep, abs=1e-12)
        assert sp.C2 == pytest.approx(c2, abs=1e-12)

    def test_ex1_residuals(self):
        p = ex1()
        d = linearize(p, solve_static(p))
        h = build_hamiltonian_matrix(d)
        sp = solve_splitting(h, d)
        assert max(are_residual(sp.E_minus, d), are_residual(sp.E_plus, d)) <= 1e-10
        assert diagonalization_defect(h, sp)[0] <= 1e-9

    def test_ex1_spectrum(self):
        h = build_hamiltonian_matrix(linearize(ex1(), solve_static(ex1())))
        rep = verify_spectrum(h)
        assert rep.pairing_error <= 1e-8 and rep.has_complex

    def test_swap_spectrum(self):
        d = lq_linearization([[0.0]], [[1.0]], [[1.0]], [[1.0]])
        eig = np.sort(verify_spectrum(build_hamiltonian_matrix(d)).eigenvalues.real)
        np.testing.assert_allclose(eig, [-1.0, 1.0], atol=1e-12)


class TestShootingExamples:
    def test_ex1_T1_from_oracle_guess(self):
        p = ex1()
        _, x, lam, _, gamma = lq_bvp_solution(p, 1.0, 200)
        e = classic_shoot(p, 1.0, 200, np.concatenate([x[0], lam[0]]), gamma)
        assert e.iterations <= 3

    def test_fixed_both_at_turnpike_is_constant(self):
        s0 = solve_static(ex2())
        p = ex2(Terminal("fixed-both", x0=s0.x_bar, x1=s0.x_bar))
        s = solve_static(p)
        e = midpoint_shoot(p, 10.0, 500, s)
        assert e.iterations == 0
        np.testing.assert_allclose(e.x, np.tile(s.x_bar, (501, 1)), atol=1e-12)

    def test_periodic_zero_iterations(self):
        s = prepare("ex2-periodic")
        assert midpoint_shoot(s.problem, 20.0, 1000, s.static).iterations == 0

    def test_ex2_matches_direct_states(self):
        s = prepare("ex2")
        mid = midpoint_shoot(s.problem, 20.0, 1000, s.static)
        drc = solve_direct(s.problem, 20.0, 1000, s.static)
        assert trajectory_distance(mid, drc, states_only=True) <= 5e-2

    @pytest.mark.xfail(strict=True, reason="measured 5.6e-3 at T=30: the bound needs T near 40 at rate C2=0.676")
    def test_ex1_middle_third_states(self, ex1_T30_mid):
        s = solve_static(ex1())
        t = ex1_T30_mid.t
        sel = (t >= 10.0) & (t <= 20.0)
        assert np.linalg.norm(ex1_T30_mid.x[sel] - s.x_bar, axis=1).max() <= 1e-3

    @pytest.mark.parametrize("name", ["ex1", "ex2"])
    def test_linear_terminal_map_invertible(self, name):
        s = prepare(name)
        w = build_wellposedness_matrix(s.problem, s.static, s.split)
        assert np.isfinite(w.condition_estimate)
        assert np.linalg.matrix_rank(w.Q_shoot) == w.Q_shoot.shape[0]


class TestDirectExamples:
    def test_dimensions(self):
        t = transcribe(ex1(), 30.0, 1000)
        assert (t.n_var, t.n_con) == (3002, 2002)

    def test_ex2_warm_start_converges(self):
        s = prepare("ex2")
        assert solve_direct(s.problem, 20.0, 1000, s.static).kkt_residual <= 1e-8

    def test_boundary_compatible_warm_start(self):
        s0 = solve_static(ex1())
        p = ex1(Terminal("fixed-initial-free-final", x0=s0.x_bar))
        t = transcribe(p, 5.0, 50)
        z = warm_start_from_static(t, solve_static(p))
        assert np.max(np.abs(t.constraints(z))) <= 1e-12

    def test_periodic_zero_iterations(self):
        s = prepare("ex1-periodic")
        assert solve_direct(s.problem, 10.0, 500, s.static).iterations == 0

    @pytest.mark.xfail(strict=True, reason="explicit Euler at h=0.03 gives sup error about 0.2; 5e-2 needs N near 4000")
    def test_ex1_T30_against_oracle(self, ex1_T30_direct):
        _, x, lam, u, _ = lq_bvp_solution(ex1(), 30.0, 1000)
        e = ex1_T30_direct
        assert max(np.abs(e.x - x).max(), np.abs(e.lam - lam).max(), np.abs(e.u - u).max()) <= 5e-2


class TestAnalysisExamples:
    def test_zero_profile(self):
        t = np.linspace(0, 10, 11)
        assert fit_envelope(np.zeros_like(t), t, 1.0, 10.0)[0] == 0.0

    def test_ex1_midpoint_deviation(self, ex1_T30_mid):
        s = prepare("ex1")
        rep = verify_turnpike(s.problem, ex1_T30_mid, s.static, s.split)
        assert rep.deviation[len(rep.deviation) // 2] <= 1e-3
        assert rep.crossings >= 2

    def test_crossings_grow_with_horizon(self, ex1_T30_mid):
        s = prepare("ex1")
        e15 = midpoint_shoot(s.problem, 15.0, 1500, s.static)
        assert count_crossings(ex1_T30_mid, s.static) >= count_crossings(e15, s.static)

    def test_cost_average_approaches_static_cost(self):
        s = prepare("ex1")
        gaps = []
        for T in (20.0, 40.0):
            e = midpoint_shoot(s.problem, T, int(100 * T), s.static)
            gaps.append(abs(verify_turnpike(s.problem, e, s.static, s.split).averages.cost_avg - 25.5))
        assert gaps[1] < gaps[0] < 1.0


class TestPipelineExamples:
    def test_ex1_direct_run(self, tmp_path):
        out = run(RunConfig("ex1", "direct", T=30.0, steps=1000,
                            trajectory_path=str(tmp_path / "t.csv"), report_path=str(tmp_path / "r.json")))
        assert out["solver"]["converged"]
        assert len((tmp_path / "t.csv").read_text().splitlines()) == 1002
        assert json.loads((tmp_path / "r.json").read_text())["problem"] == "ex1"

    def test_ex2_shoot_mid_run(self):
        assert run(RunConfig("ex2", "shoot-mid", T=20.0))["solver"]["converged"]

    def test_invalid_horizon(self):
        with pytest.raises(ValueError, match="T must be positive"):
            run(RunConfig("ex1", T=0.0))

    def test_identical_configs(self):
        rows = compare([RunConfig("ex1", "shoot-mid", T=5.0, steps=500)] * 2)
        assert rows[0]["distance"] == 0.0

    def test_naive_classic_recorded(self):
        rows = compare([RunConfig("ex2", "shoot-mid", T=20.0), RunConfig("ex2", "shoot-classic", T=20.0, guess="zero")])
        assert rows[0]["b_converged"] in (True, False)

    @pytest.mark.xfail(strict=True, reason="explicit Euler at N=1000 leaves a 0.1 state and 0.2 control gap")
    def test_ex1_direct_vs_midpoint(self, ex1_T30_mid, ex1_T30_direct):
        assert trajectory_distance(ex1_T30_mid, ex1_T30_direct) <= 5e-2
