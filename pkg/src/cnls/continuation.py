"""Continuation of the unperturbed product state in the coupling scale eps.

The unperturbed state stacks the explicit pair solutions and rescaled scalar
grounds; it is a non-degenerate critical point of the eps = 0 energy, so for
small eps a nearby critical point of the perturbed energy exists and is found
by warm-started Newton.  The march is adaptive (halve the eps step on failure,
double after three easy successes).  ``eps0_estimate`` records where the
branch numerically stops being the continued positive state: the first
unrecoverable Newton failure, or the first loss of positivity when all
eps-scaled couplings are attractive; it is an observation, not a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import eigsh

from .diagnostics import classify_positivity, positivity_obstruction_flags
from .errors import (
    EigSolverFailure,
    ImmediateFailure,
    NoConvergence,
    SingularJacobian,
)
from .functional import norms, total_energy
from .model import BlockStructure, RadialGrid, SolveReport, State, SystemParams
from .pair import coupling_coeffs
from .scalar import ScalarGround, scale_ground, solve_scalar_ground
from .solver import hessian_matrices, newton_core

EASY_ITER_LIMIT = 5
EASY_SUCCESSES_TO_DOUBLE = 3
MIN_STEP_FRACTION = 2.0 ** -12


def params_at_eps(p: SystemParams, b: BlockStructure, eps: float) -> SystemParams:
    """System parameters with the eps-scaled couplings evaluated at ``eps``."""
    return p.with_beta(b.reconstruct_beta(eps))


def build_unperturbed(p: SystemParams, b: BlockStructure,
                      g: ScalarGround) -> State:
    """The zero-coupling-limit state: explicit synchronized pairs followed by
    rescaled scalar grounds for the singles.

    Requires each pair coupling above max of its mu's (OutOfWindow otherwise)
    and matching lambdas within each pair.  The returned state is the sampled
    explicit solution; its discrete residual is pure truncation error, so
    warm-starting Newton from it converges in a couple of steps.
    """
    b.validate_against(p)
    vals = np.empty((p.N, g.grid.num_nodes))
    for k in range(b.m):
        lam = p.lam[2 * k]
        mu1, mu2 = p.mu[2 * k], p.mu[2 * k + 1]
        betak = b.pair_beta[k]
        a1, a2 = coupling_coeffs(mu1, mu2, betak)   # OutOfWindow if inadmissible
        vals[2 * k] = a1 * scale_ground(g, lam, mu1).values
        vals[2 * k + 1] = a2 * scale_ground(g, lam, mu2).values
    for s in b.singles():
        vals[s] = scale_ground(g, p.lam[s], p.mu[s]).values
    return State(g.grid, vals)


def _make_report(p: SystemParams, grid: RadialGrid, vals: np.ndarray,
                 res: float, iters: int, status: str, eps: float,
                 history) -> SolveReport:
    st = State(grid, vals)
    per, _ = norms(p, st)
    pos = classify_positivity(st)
    flags = []
    if status == "floor":
        flags.append("residual-at-roundoff-floor")
    elif status != "ok":
        flags.append("no-convergence")
    if pos.label == "zero-component":
        flags.append("trivial-or-semitrivial-state")
    return SolveReport(state=st, residual_norm=res, energy=total_energy(p, st),
                       component_norms=per, positivity=pos.label,
                       newton_iters=iters, eps=eps, flags=flags,
                       residual_history=list(history))


def newton_solve(p: SystemParams, u_init: State, tol: float = 1e-10,
                 max_iter: int = 50, eps: float = 0.0) -> SolveReport:
    """Newton iteration on the system residual from ``u_init``.

    Returns the report of the converged state ('floor' stagnation at the
    round-off level counts as converged and is flagged).  Raises
    NoConvergence (with the partial report attached) if the budget is
    exhausted, or SingularJacobian if the linearization cannot be factorized.
    """
    vals, res, iters, status, history = newton_core(
        p, u_init.grid, u_init.values, tol=tol, max_iter=max_iter)
    report = _make_report(p, u_init.grid, vals, res, iters, status, eps, history)
    if status not in ("ok", "floor"):
        raise NoConvergence(
            f"Newton did not reach tol={tol:.1e} in {max_iter} iterations "
            f"(residual {res:.3e})", report=report)
    return report


@dataclass
class ContinuationPath:
    """Solution branch in eps: reports at each accepted step, distances to
    the unperturbed state, and the estimated breakdown scale (if hit)."""

    eps_values: np.ndarray
    reports: list
    eps0_estimate: Optional[float]
    distance_to_z: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def final(self) -> SolveReport:
        return self.reports[-1]


def continue_in_eps(p: SystemParams, b: BlockStructure, grid: RadialGrid,
                    eps_target: float, steps: int, tol: float = 1e-10,
                    max_iter: int = 50, ground: Optional[ScalarGround] = None,
                    max_total_steps: int = 500) -> ContinuationPath:
    """March the branch from eps = 0 to ``eps_target``.

    Each step warm-starts Newton from the previous state.  On failure the
    step is halved (down to MIN_STEP_FRACTION of the nominal step, after
    which the breakdown is recorded and the march stops); after three
    consecutive easy successes it is doubled.  Reports carry positivity
    classification and admissibility flags for their eps.

    Raises ImmediateFailure if even the unperturbed problem cannot be solved.
    """
    if eps_target < 0 or not np.isfinite(eps_target):
        raise ValueError(f"eps_target must be >= 0, got {eps_target}")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    b.validate_against(p)
    if ground is None:
        ground = solve_scalar_ground(grid, tol=tol)
    else:
        grid.require_same(ground.grid)

    p0 = params_at_eps(p, b, 0.0)
    z_sampled = build_unperturbed(p0, b.at_eps(0.0), ground)
    try:
        report0 = newton_solve(p0, z_sampled, tol=tol, max_iter=max_iter, eps=0.0)
    except (NoConvergence, SingularJacobian) as exc:
        raise ImmediateFailure(
            f"unperturbed solve failed: {exc}", report=exc.report) from exc
    if report0.positivity == "zero-component":
        raise ImmediateFailure("unperturbed state collapsed to a trivial branch",
                               report=report0)
    z_ref = report0.state

    eps_values = [0.0]
    reports = [report0]
    distances = [0.0]
    path_flags = []
    eps0_estimate = None

    attractive_cross = bool(np.all(b.eps_scaled_matrix() >= 0.0))
    de_nominal = eps_target / steps if eps_target > 0 else 0.0
    de = de_nominal
    eps_cur = 0.0
    current = z_ref
    easy = 0
    total = 0
    snap = 1e-12 * max(eps_target, 1.0)
    while eps_cur < eps_target - snap and total < max_total_steps:
        total += 1
        eps_try = eps_cur + de
        if eps_try >= eps_target - snap:
            eps_try = eps_target
        p_eps = params_at_eps(p, b, eps_try)
        try:
            rep = newton_solve(p_eps, current, tol=tol, max_iter=max_iter,
                               eps=eps_try)
        except (NoConvergence, SingularJacobian):
            de *= 0.5
            easy = 0
            if de < MIN_STEP_FRACTION * de_nominal:
                eps0_estimate = eps_try
                path_flags.append(
                    f"continuation-breakdown: step underflow at eps={eps_try:.6g}")
                break
            continue
        rep.flags.extend(positivity_obstruction_flags(p_eps, b))
        diff = State(grid, rep.state.values - z_ref.values)
        _, dist_sq = norms(p, diff)
        eps_values.append(eps_try)
        reports.append(rep)
        distances.append(float(np.sqrt(dist_sq)))
        eps_cur = eps_try
        current = rep.state
        if eps0_estimate is None and attractive_cross \
                and rep.positivity != "positive":
            eps0_estimate = eps_try
            path_flags.append(f"positivity-loss at eps={eps_try:.6g}")
        easy = easy + 1 if rep.newton_iters <= EASY_ITER_LIMIT else 0
        if easy >= EASY_SUCCESSES_TO_DOUBLE:
            # recover after halvings, but never coarser than requested
            de = min(2.0 * de, de_nominal)
            easy = 0
    if total >= max_total_steps and eps_cur < eps_target:
        path_flags.append("step-budget-exhausted")
    return ContinuationPath(eps_values=np.array(eps_values), reports=reports,
                            eps0_estimate=eps0_estimate,
                            distance_to_z=np.array(distances),
                            flags=path_flags)


def nondegeneracy_at(p: SystemParams, u: State) -> float:
    """Smallest singular value of the Hessian at ``u`` on the radial grid
    space (magnitude of the eigenvalue nearest zero of the generalized
    symmetric problem with the lumped mass).  Bounded away from zero it
    certifies the local-inversion hypothesis discretely; it collapses as
    parameters approach a degeneracy."""
    H, mass = hessian_matrices(p, u.grid, u.values)
    try:
        vals = eigsh(H, k=1, M=mass, sigma=0.0, which="LM",
                     v0=np.ones(H.shape[0]), return_eigenvectors=False)
    except Exception as exc:
        raise EigSolverFailure(f"shift-invert eigensolve failed: {exc}") from exc
    ev = float(vals[0])
    if not np.isfinite(ev):
        raise EigSolverFailure("eigensolve returned a non-finite value")
    return abs(ev)
