import numpy as np
import pytest

import cnls
from cnls.errors import ImmediateFailure, OutOfWindow


def test_unperturbed_two_component_is_pair_solution(ground12):
    p = cnls.SystemParams(2, 1, [1.0, 1.0], [1.0, 2.0],
                          [[0.0, 3.0], [3.0, 0.0]])
    b = cnls.split_blocks(p, m=1, eps=0.0)
    z = cnls.build_unperturbed(p, b, ground12)
    ps = cnls.pair_solution(ground12, 1.0, 1.0, 2.0, 3.0)
    assert np.array_equal(z.values[0], ps.u0.values)
    assert np.array_equal(z.values[1], ps.v0.values)


def test_unperturbed_all_singles_is_product_of_grounds(ground12):
    p = cnls.SystemParams(3, 1, [1.0, 1.0, 1.0], [1.0, 0.9, 1.2],
                          np.zeros((3, 3)))
    b = cnls.split_blocks(p, m=0, eps=0.0)
    z = cnls.build_unperturbed(p, b, ground12)
    for j, mu in enumerate((1.0, 0.9, 1.2)):
        assert np.array_equal(z.values[j],
                              cnls.scale_ground(ground12, 1.0, mu).values)


def test_unperturbed_reference_closed_form(ground12, reference_problem):
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground12)
    r = ground12.grid.nodes
    sech = np.sqrt(2.0) / np.cosh(r)
    assert np.max(np.abs(z.values[0] - 0.5 * sech)) < 1e-14
    assert np.max(np.abs(z.values[1] - 0.5 * sech)) < 1e-14
    assert np.max(np.abs(z.values[2] - sech)) < 1e-14
    eb = cnls.energy(p, b, z)
    assert eb.total == pytest.approx(2.0, abs=1e-4)


def test_unperturbed_rejects_inadmissible_pair(ground12):
    p = cnls.SystemParams(2, 1, [1.0, 1.0], [1.0, 1.0],
                          [[0.0, 0.5], [0.5, 0.0]])
    b = cnls.split_blocks(p, m=1, eps=0.0)
    with pytest.raises(OutOfWindow):
        cnls.build_unperturbed(p, b, ground12)


def test_newton_fixed_point_of_refined_state(ground12, reference_problem):
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground12)
    rep1 = cnls.newton_solve(p, z)
    rep2 = cnls.newton_solve(p, rep1.state)
    assert rep2.newton_iters == 0
    assert np.array_equal(rep2.state.values, rep1.state.values)


def test_newton_quadratic_order_on_warm_start(ground12, reference_problem):
    # warm start at a slightly perturbed coupling: successive residuals in
    # the Newton history decay at order about 2
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground12)
    z_ref = cnls.newton_solve(p, z).state
    p_eps = cnls.params_at_eps(p, b, 0.013)
    rep = cnls.newton_solve(p_eps, z_ref, tol=1e-12)
    # entries below ~1e-9 are limited by the strong-residual round-off floor
    hist = [r for r in rep.residual_history if r > 1e-9]
    assert len(hist) >= 3
    r0, r1, r2 = hist[-3], hist[-2], hist[-1]
    order = np.log(r2 / r1) / np.log(r1 / r0)
    assert order >= 1.9


def test_newton_zero_initial_state_reports_trivial(grid12):
    p = cnls.SystemParams(2, 1, [1.0, 1.0], [1.0, 1.0],
                          [[0.0, 0.2], [0.2, 0.0]])
    zero = cnls.State(grid12, np.zeros((2, grid12.num_nodes)))
    rep = cnls.newton_solve(p, zero)
    assert rep.positivity == "zero-component"
    assert "trivial-or-semitrivial-state" in rep.flags


def test_continuation_reference_path(reference_path):
    path = reference_path
    assert path.eps_values[0] == 0.0
    assert path.eps_values[-1] == pytest.approx(0.02)
    assert len(path.reports) >= 5
    assert path.eps0_estimate is None
    for rep in path.reports:
        assert rep.residual_norm < 1e-9
        assert rep.positivity == "positive"
    # distance grows monotonically from zero, asymptotically linearly in eps
    d = path.distance_to_z
    assert d[0] == 0.0
    assert np.all(np.diff(d) > 0)
    slopes = d[1:] / path.eps_values[1:]
    assert slopes[0] == pytest.approx(slopes[1], rel=0.05)


def test_continuation_block_norm_drift_linear_in_eps(reference_path, reference_problem):
    # component norms move away from the unperturbed ones at a rate bounded
    # by a constant fitted on the two smallest eps values
    p, _ = reference_problem
    path = reference_path
    base = path.reports[0].component_norms ** 2
    drift = np.array([np.abs(rep.component_norms ** 2 - base)
                      for rep in path.reports[1:]])
    eps = path.eps_values[1:]
    C = max(drift[0].max() / eps[0], drift[1].max() / eps[1])
    assert np.all(drift.max(axis=1) <= 1.5 * C * eps)


def test_continuation_eps_zero_target_returns_single_report(
        reference_problem, grid12, ground12):
    p, b = reference_problem
    path = cnls.continue_in_eps(p, b, grid12, 0.0, 5, ground=ground12)
    assert len(path.reports) == 1
    assert path.eps_values.tolist() == [0.0]
    assert path.reports[0].positivity == "positive"


def test_continuation_mixed_sign_couplings_nonnegative(grid12, ground12):
    p = cnls.SystemParams(3, 1, [1.0] * 3, [1.0] * 3,
                          [[0.0, 3.0, 0.0], [3.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    b = cnls.BlockStructure(m=1, pair_beta=[3.0], eps=0.0,
                            tilde_beta=[[-1.0, 1.0]])
    path = cnls.continue_in_eps(p, b, grid12, 0.02, 4, ground=ground12)
    for rep in path.reports:
        assert rep.positivity in ("positive", "nonnegative")


def test_continuation_small_coupling_two_singles(grid12, ground12):
    # two singles, small attractive coupling: positive branch near the
    # product of scalar grounds
    p = cnls.SystemParams(2, 1, [1.0, 1.0], [1.0, 2.0], np.zeros((2, 2)))
    b = cnls.BlockStructure(m=0, pair_beta=[], eps=0.0,
                            tilde_beta=np.zeros((2, 0)),
                            tilde_single=[[0.0, 1.0], [1.0, 0.0]])
    path = cnls.continue_in_eps(p, b, grid12, 0.05, 5, ground=ground12)
    assert path.final.positivity == "positive"
    assert path.eps0_estimate is None


def test_continuation_detects_branch_collapse(grid12, ground12, reference_problem):
    # pushing the single-component couplings past mu_3 collapses the pair
    # part onto the semitrivial branch; the estimate and flags record it
    p, b = reference_problem
    path = cnls.continue_in_eps(p, b, grid12, 1.3, 13, ground=ground12)
    assert path.eps0_estimate is not None
    assert 0.8 < path.eps0_estimate <= 1.3
    assert any("positivity-loss" in f for f in path.flags)
    for eps, rep in zip(path.eps_values, path.reports):
        if eps > 1.0 + 1e-12:
            assert any("no-positive-solution" in f for f in rep.flags)
            assert rep.positivity != "positive"


def test_continuation_immediate_failure_on_bad_setup(grid12, ground12):
    p = cnls.SystemParams(2, 1, [1.0, 1.0], [1.0, 1.0],
                          [[0.0, 0.5], [0.5, 0.0]])
    b = cnls.split_blocks(p, m=1, eps=0.0)
    with pytest.raises(OutOfWindow):
        cnls.continue_in_eps(p, b, grid12, 0.01, 2, ground=ground12)
    # no iteration budget at eps = 0 -> immediate failure
    p2 = cnls.SystemParams(1, 1, [1.0], [1.0], [[0.0]])
    b2 = cnls.BlockStructure(m=0, pair_beta=[], eps=0.0,
                             tilde_beta=np.zeros((1, 0)))
    with pytest.raises(ImmediateFailure):
        cnls.continue_in_eps(p2, b2, grid12, 0.01, 2, ground=ground12,
                             tol=1e-14, max_iter=0)


def test_nondegeneracy_at_reference_state(reference_path, reference_problem):
    p, b = reference_problem
    p0 = cnls.params_at_eps(p, b, 0.0)
    z = reference_path.reports[0].state
    sv = cnls.nondegeneracy_at(p0, z)
    assert sv > 0.01


def test_nondegeneracy_collapses_toward_pair_window_boundary(ground12):
    # as the pair coupling descends to max(mu1, mu2), the smallest singular
    # value of the Hessian at the pair state goes to zero
    vals = []
    for beta in (1.5, 1.2, 1.05):
        ps = cnls.pair_solution(ground12, 1.0, 1.0, 1.0, beta)
        rep = cnls.newton_solve(ps.params(), ps.state())
        vals.append(cnls.nondegeneracy_at(ps.params(), rep.state))
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.1


def test_nondegeneracy_single_component_matches_scalar_estimate(ground12):
    p = cnls.SystemParams(1, 1, [1.0], [1.0], [[0.0]])
    st = cnls.State(ground12.grid, ground12.values()[None, :])
    sv = cnls.nondegeneracy_at(p, st)
    est = cnls.nondegeneracy_estimate(ground12, 1.0, 1.0)
    assert sv == pytest.approx(abs(est), rel=1e-10)


def test_params_at_eps_reconstruction(reference_problem):
    p, b = reference_problem
    p05 = cnls.params_at_eps(p, b, 0.05)
    expect = np.array([[0.0, 3.0, 0.05], [3.0, 0.0, 0.05], [0.05, 0.05, 0.0]])
    assert np.array_equal(p05.beta, expect)
    assert np.array_equal(cnls.params_at_eps(p, b, 0.0).beta, p.beta)
