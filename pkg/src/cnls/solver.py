"""Damped Newton iteration on the discrete system, with a direct banded solve.

Unknowns are the nodal values at r_0 .. r_{M-1} of all N components
(the Dirichlet node is eliminated), interleaved node-major so the weak
Jacobian is banded with bandwidth N: stiffness couples neighboring nodes of
one component, the interaction terms couple components at one node.  The
weak Jacobian (rows scaled by the quadrature weights) is symmetric, which is
what the banded factorization and the Hessian diagnostics rely on.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded

from .errors import SingularJacobian
from .functional import gradient_values
from .model import RadialGrid, SystemParams

_LINESEARCH_MIN = 1e-4
_FLOOR_SAFETY = 100.0


def weighted_norm(grid: RadialGrid, vals: np.ndarray) -> float:
    return float(np.sqrt(np.sum(grid.quad_weights * vals ** 2)))


def residual_floor(grid: RadialGrid, vals: np.ndarray) -> float:
    """Round-off floor of the strong residual: eps times the magnitude of the
    stiffness matvec before cancellation.  Below roughly this level the
    residual cannot decrease further in double precision."""
    d, off, w = grid.stiff_diag, grid.stiff_off, grid.quad_weights
    acc = np.abs(d) * np.abs(vals)
    acc[:, :-1] += np.abs(off) * np.abs(vals[:, 1:])
    acc[:, 1:] += np.abs(off) * np.abs(vals[:, :-1])
    return 2.3e-16 * weighted_norm(grid, acc / w)


def assemble_weak_jacobian_banded(p: SystemParams, grid: RadialGrid,
                                  vals: np.ndarray) -> np.ndarray:
    """Banded storage (solve_banded layout, bandwidth N) of the symmetric weak
    Jacobian on the Dirichlet-eliminated unknowns."""
    N = p.N
    M = grid.M
    w = grid.quad_weights
    ab = np.zeros((2 * N + 1, N * M))
    for j in range(N):
        d = grid.stiff_diag[:M] + w[:M] * (p.lam[j] - 3.0 * p.mu[j] * vals[j, :M] ** 2)
        for k in range(N):
            if k != j and p.beta[j, k] != 0.0:
                d -= w[:M] * p.beta[j, k] * vals[k, :M] ** 2
        ab[N, j::N] = d
        idx = np.arange(j, N * M - N, N)
        ab[0, idx + N] = grid.stiff_off[: M - 1]
        ab[2 * N, idx] = grid.stiff_off[: M - 1]
    for j in range(N):
        for k in range(j + 1, N):
            if p.beta[j, k] == 0.0:
                continue
            v = -2.0 * p.beta[j, k] * w[:M] * vals[j, :M] * vals[k, :M]
            cols = np.arange(M) * N + k
            ab[N - (k - j), cols] = v
    for off in range(1, N + 1):
        ab[N + off, : N * M - off] = ab[N - off, off:]
    return ab


def hessian_matrices(p: SystemParams, grid: RadialGrid, vals: np.ndarray):
    """Sparse symmetric weak Hessian and the lumped-mass diagonal on the
    Dirichlet-eliminated unknowns (for eigenvalue diagnostics)."""
    N = p.N
    M = grid.M
    w = grid.quad_weights
    rows, cols, data = [], [], []
    for j in range(N):
        d = grid.stiff_diag[:M] + w[:M] * (p.lam[j] - 3.0 * p.mu[j] * vals[j, :M] ** 2)
        for k in range(N):
            if k != j and p.beta[j, k] != 0.0:
                d -= w[:M] * p.beta[j, k] * vals[k, :M] ** 2
        idx = np.arange(M) * N + j
        rows.append(idx); cols.append(idx); data.append(d)
        rows.append(idx[:-1]); cols.append(idx[1:]); data.append(grid.stiff_off[: M - 1])
        rows.append(idx[1:]); cols.append(idx[:-1]); data.append(grid.stiff_off[: M - 1])
        for k in range(j + 1, N):
            if p.beta[j, k] == 0.0:
                continue
            v = -2.0 * p.beta[j, k] * w[:M] * vals[j, :M] * vals[k, :M]
            idxk = np.arange(M) * N + k
            rows.append(idx); cols.append(idxk); data.append(v)
            rows.append(idxk); cols.append(idx); data.append(v)
    H = sparse.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N * M, N * M))
    # node-major interleaving: the weight of node i repeats for its N unknowns
    mass = sparse.diags(np.repeat(w[:M], N)).tocsc()
    return H, mass


def newton_core(p: SystemParams, grid: RadialGrid, vals0: np.ndarray,
                tol: float = 1e-10, max_iter: int = 50):
    """Damped Newton on the strong residual.

    Returns (vals, residual_norm, iterations, status, history) where status is
    one of 'ok' (residual below tol), 'floor' (stagnated at the round-off
    floor), 'no-convergence', or 'singular'.  The backtracking line search
    halves the step until the residual norm decreases; full steps are taken
    near the solution, so terminal convergence is quadratic.
    """
    N = p.N
    M = grid.M
    vals = np.array(vals0, dtype=float)
    vals[:, -1] = 0.0
    G = gradient_values(p, grid, vals)
    res = weighted_norm(grid, G)
    history = [res]
    stall = 0
    for it in range(max_iter):
        if res < tol:
            return vals, res, it, "ok", history
        ab = assemble_weak_jacobian_banded(p, grid, vals)
        rhs = -(grid.quad_weights[:M][None, :] * G[:, :M]).T.reshape(-1)
        try:
            dx = solve_banded((N, N), ab, rhs)
        except Exception as exc:  # LinAlgError or ill-formed factorization
            raise SingularJacobian(f"banded factorization failed: {exc}") from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("Newton step is not finite (degenerate Jacobian)")
        step = dx.reshape(M, N).T
        t = 1.0
        accepted = False
        while t >= _LINESEARCH_MIN:
            trial = vals.copy()
            trial[:, :M] += t * step
            Gt = gradient_values(p, grid, trial)
            rt = weighted_norm(grid, Gt)
            if np.isfinite(rt) and rt < (1.0 - 0.5 * t) * res:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            status = "floor" if res < _FLOOR_SAFETY * residual_floor(grid, vals) \
                else "no-convergence"
            return vals, res, it, status, history
        stall = stall + 1 if rt > 0.25 * res else 0
        vals, G, res = trial, Gt, rt
        history.append(res)
        if stall >= 2 and res < _FLOOR_SAFETY * residual_floor(grid, vals):
            return vals, res, it + 1, "floor", history
    status = "floor" if res < _FLOOR_SAFETY * residual_floor(grid, vals) \
        else "no-convergence"
    return vals, res, max_iter, status, history
