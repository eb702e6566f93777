import numpy as np
import pytest

import cnls
from cnls.errors import GridMismatch, ZeroState
from cnls.solver import weighted_norm
from oracles import U_L4, U_L6, smooth_random_state


def _single_params(n=1):
    return cnls.SystemParams(1, n, [1.0], [1.0], [[0.0]])


def _reference_params(eps):
    beta = np.array([[0.0, 3.0, eps], [3.0, 0.0, eps], [eps, eps, 0.0]])
    p = cnls.SystemParams(3, 1, [1.0] * 3, [1.0] * 3, beta)
    b = cnls.split_blocks(p, m=1, eps=eps) if eps > 0 else \
        cnls.BlockStructure(m=1, pair_beta=[3.0], eps=0.0, tilde_beta=[[1.0, 1.0]])
    return p, b


def test_energy_zero_state(grid12):
    p, b = _reference_params(0.0)
    eb = cnls.energy(p, b, cnls.State(grid12, np.zeros((3, grid12.num_nodes))))
    assert eb.total == 0.0 and eb.phi0 == 0.0 and eb.tilde_F == 0.0
    assert np.all(eb.I == 0.0) and np.all(eb.pair_terms == 0.0)


def test_energy_single_ground_quarter_quartic(ground20):
    # I(U) = 1/4 int U^4 at the critical point (I = 1/2||.||^2 - 1/4 int u^4
    # and the identity ||U||^2 = int U^4)
    p = _single_params()
    b = cnls.BlockStructure(m=0, pair_beta=[], eps=0.0,
                            tilde_beta=np.zeros((1, 0)))
    st = cnls.State(ground20.grid, ground20.values()[None, :])
    eb = cnls.energy(p, b, st)
    assert eb.I[0] == pytest.approx(U_L4 / 4.0, abs=2e-5)
    assert eb.total == pytest.approx(eb.phi0, rel=1e-14)


def test_energy_of_unperturbed_three_component_state(ground20):
    # pair part 1/4 * (1/2) * 16/3 = 2/3, single part 1/4 * 16/3 = 4/3
    p, b = _reference_params(0.0)
    z = cnls.build_unperturbed(p, b, ground20)
    eb = cnls.energy(p, b, z)
    assert eb.total == pytest.approx(2.0, abs=1e-4)
    assert eb.pair_phi[0] == pytest.approx(2.0 / 3.0, abs=1e-4)
    assert eb.I[2] == pytest.approx(4.0 / 3.0, abs=1e-4)


def test_energy_breakdown_consistency(grid12):
    p, b = _reference_params(0.07)
    rng = np.random.default_rng(0)
    st = cnls.State(grid12, smooth_random_state(rng, grid12, 3))
    eb = cnls.energy(p, b, st)
    # split reproduces the total to round-off
    assert eb.total == pytest.approx(eb.phi0 - b.eps * eb.tilde_F, rel=1e-12,
                                     abs=1e-12)
    assert eb.phi0 == pytest.approx(float(eb.I.sum() + eb.pair_terms.sum()),
                                    rel=1e-12, abs=1e-12)
    # independent recomputation: 1/2 ||u||^2 - F
    _, tot_sq = cnls.norms(p, st)
    assert eb.total == pytest.approx(
        0.5 * tot_sq - 0.25 * cnls.quartic_form(p, st), rel=1e-13, abs=1e-13)


def test_gradient_vanishes_at_refined_unperturbed_state(ground20, reference_problem):
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground20)
    # sampled profile: truncation-level residual
    sampled = weighted_norm(ground20.grid, cnls.gradient(p, z).values)
    assert sampled < 1e-3
    rep = cnls.newton_solve(p, z)
    refined = weighted_norm(ground20.grid, cnls.gradient(p, rep.state).values)
    assert refined < 1e-10


def test_gradient_of_dilated_ground_state(ground20):
    # residual of t*U is (t - t^3) U^3 exactly in the continuum; its norm is
    # |t - t^3| sqrt(int U^6)
    p = _single_params()
    t = 1.1
    st = cnls.State(ground20.grid, (t * ground20.values())[None, :])
    res = weighted_norm(ground20.grid, cnls.gradient(p, st).values)
    assert res == pytest.approx(abs(t - t ** 3) * np.sqrt(U_L6), rel=1e-3)


def test_gradient_matches_energy_derivative_order2(grid12):
    # central differences of the energy against the weighted pairing with the
    # gradient, in extended precision to keep cancellation noise down
    rng = np.random.default_rng(7)
    p = cnls.SystemParams(3, 1, [1.0, 1.3, 0.8], [1.0, 2.0, 0.5],
                          np.array([[0.0, 3.0, 0.3], [3.0, 0.0, 0.3],
                                    [0.3, 0.3, 0.0]]))
    for _ in range(2):
        U = smooth_random_state(rng, grid12, 3, dtype=np.longdouble)
        phi = smooth_random_state(rng, grid12, 3, dtype=np.longdouble)
        stU = cnls.State(grid12, U)
        pairing = np.sum(grid12.quad_weights * cnls.gradient(p, stU).values * phi)
        errs = []
        for h in (1e-3, 1e-4, 1e-5):
            hl = np.longdouble(h)
            ep = cnls.total_energy(p, cnls.State(grid12, U + hl * phi))
            em = cnls.total_energy(p, cnls.State(grid12, U - hl * phi))
            errs.append(abs(float((ep - em) / (2 * hl) - pairing)))
        orders = [np.log10(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 1.9


def test_hessian_is_derivative_of_gradient(grid12):
    rng = np.random.default_rng(8)
    p = cnls.SystemParams(2, 1, [1.0, 1.5], [1.0, 2.0],
                          np.array([[0.0, 1.2], [1.2, 0.0]]))
    U = smooth_random_state(rng, grid12, 2, dtype=np.longdouble)
    w = smooth_random_state(rng, grid12, 2, dtype=np.longdouble)
    stU = cnls.State(grid12, U)
    hv = cnls.hessian_apply(p, stU, cnls.State(grid12, w)).values
    errs = []
    for h in (1e-3, 1e-4, 1e-5):
        hl = np.longdouble(h)
        gp = cnls.gradient(p, cnls.State(grid12, U + hl * w)).values
        gm = cnls.gradient(p, cnls.State(grid12, U - hl * w)).values
        diff = (gp - gm) / (2 * hl) - hv
        errs.append(float(np.sqrt(np.sum(grid12.quad_weights * diff ** 2))))
    orders = [np.log10(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.9


def test_hessian_symmetric_bilinear_form(grid12):
    rng = np.random.default_rng(9)
    p = cnls.SystemParams(3, 1, [1.0, 2.0, 0.7], [1.0, 0.5, 2.0],
                          np.array([[0.0, 2.5, -0.2], [2.5, 0.0, 0.4],
                                    [-0.2, 0.4, 0.0]]))
    U = cnls.State(grid12, smooth_random_state(rng, grid12, 3))
    for _ in range(5):
        v = cnls.State(grid12, smooth_random_state(rng, grid12, 3))
        w = cnls.State(grid12, smooth_random_state(rng, grid12, 3))
        left = cnls.functional.inner(cnls.hessian_apply(p, U, w), v)
        right = cnls.functional.inner(cnls.hessian_apply(p, U, v), w)
        assert left == pytest.approx(right, rel=1e-12, abs=1e-12)


def test_hessian_at_zero_is_decoupled_linear_part(grid12):
    p = cnls.SystemParams(2, 1, [1.0, 2.0], [1.0, 1.0],
                          np.array([[0.0, 1.5], [1.5, 0.0]]))
    zero = cnls.State(grid12, np.zeros((2, grid12.num_nodes)))
    rng = np.random.default_rng(10)
    w = smooth_random_state(rng, grid12, 2)
    out = cnls.hessian_apply(p, zero, cnls.State(grid12, w)).values
    for j, lam in enumerate((1.0, 2.0)):
        expect = grid12.laplacian_apply(w[j]) + lam * w[j]
        expect[-1] = 0.0
        assert np.max(np.abs(out[j] - expect)) < 1e-12


def test_norms_zero_and_ground(grid12, ground20):
    p = _single_params()
    zero = cnls.State(grid12, np.zeros((1, grid12.num_nodes)))
    per, tot = cnls.norms(p, zero)
    assert per[0] == 0.0 and tot == 0.0
    st = cnls.State(ground20.grid, ground20.values()[None, :])
    _, tot = cnls.norms(p, st)
    assert tot == pytest.approx(U_L4, abs=1e-4)


def test_norms_scaling_law(ground20):
    # ||u_{lam,mu}||^2 = lam^{2-n/2} / mu * ||U||^2 ; n = 1.  The stiffness
    # form carries an O((sqrt(lam) h)^2) truncation error, second order under
    # refinement.
    lam, mu = 4.0, 2.0
    expect = lam ** 1.5 / mu * U_L4
    errs = []
    for M in (2000, 4000):
        g = cnls.solve_scalar_ground(cnls.make_grid(1, 20.0, M))
        f = cnls.scale_ground(g, lam, mu)
        p = cnls.SystemParams(1, 1, [lam], [mu], [[0.0]])
        _, tot = cnls.norms(p, cnls.State(g.grid, f.values[None, :]))
        errs.append(abs(tot - expect))
    assert errs[0] < 5e-5 * expect
    assert errs[1] < 0.3 * errs[0]


def test_nehari_residual_homogeneity(ground20):
    # t*U: t^2 ||U||^2 - t^4 int U^4 = (t^2 - t^4) * 16/3
    p = _single_params()
    for t, expect in ((2.0, (4.0 - 16.0) * U_L4), (0.5, (0.25 - 0.0625) * U_L4)):
        st = cnls.State(ground20.grid, (t * ground20.values())[None, :])
        assert cnls.nehari_residual(p, st) == pytest.approx(expect, abs=2e-4)


def test_nehari_zero_at_critical_point(reference_problem, grid12, ground12):
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground12)
    rep = cnls.newton_solve(p, z)
    assert abs(cnls.nehari_residual(p, rep.state)) < 1e-9


def test_nehari_rejects_zero_state(grid12):
    p = _single_params()
    with pytest.raises(ZeroState):
        cnls.nehari_residual(p, cnls.State(grid12, np.zeros((1, grid12.num_nodes))))


def test_energy_identity_at_critical_points(reference_problem, grid12, ground12):
    # Phi(u) = 1/4 ||u||^2 whenever Phi'(u) = 0
    p, b = reference_problem
    z = cnls.build_unperturbed(p, b, ground12)
    rep = cnls.newton_solve(p, z)
    _, tot_sq = cnls.norms(p, rep.state)
    assert abs(cnls.total_energy(p, rep.state) - 0.25 * tot_sq) < 1e-10


def test_grid_mismatch_raises(grid12, grid20):
    p = _single_params()
    a = cnls.State(grid12, np.zeros((1, grid12.num_nodes)))
    c = cnls.State(grid20, np.zeros((1, grid20.num_nodes)))
    with pytest.raises(GridMismatch):
        cnls.hessian_apply(p, a, c)
