"""Energy functional, PDE residual (gradient), Hessian action, and norms.

The discrete energy is

    Phi(u) = 1/2 sum_j ||u_j||_j^2  -  F(u),
    F(u)   = sum_j 1/4 mu_j int u_j^4  +  sum_{j<k} 1/2 beta_jk int u_j^2 u_k^2,

with all integrals taken by the grid quadrature and the gradient part by the
stiffness form.  ``gradient`` is the exact derivative of this discrete energy
with respect to nodal values, expressed in strong form: the weighted inner
product <gradient(u), phi> equals d/dt Phi(u + t phi) at t = 0 to round-off.
Keeping energy, gradient, and Hessian on the same quadrature is what makes
Newton quadratic and the critical-point identities exact at discrete solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroState
from .model import BlockStructure, State, SystemParams


def _check(p: SystemParams, u: State):
    if u.N != p.N:
        raise ValueError(f"state has {u.N} components, params have N={p.N}")


def inner(u: State, v: State) -> float:
    """Weighted L2 inner product over all components (full radial measure)."""
    u.grid.require_same(v.grid)
    return float(np.sum(u.grid.quad_weights * u.values * v.values))


def residual_norm(u: State) -> float:
    """Weighted L2 norm, the convergence measure for Newton residuals."""
    return float(np.sqrt(np.sum(u.grid.quad_weights * u.values ** 2)))


def norms(p: SystemParams, u: State):
    """Per-component lambda-weighted Sobolev norms and the total square.

    Returns (per_component, total_sq) with per_component[j] = ||u_j||_j and
    total_sq = sum_j ||u_j||_j^2.
    """
    _check(p, u)
    g = u.grid
    per_sq = np.array([g.norm_lam_sq(u.values[j], p.lam[j]) for j in range(p.N)])
    per_sq = np.maximum(per_sq, 0.0)  # guard round-off at zero
    return np.sqrt(per_sq), per_sq.sum()


def quartic_form(p: SystemParams, u: State) -> float:
    """sum_j mu_j int u_j^4 + sum_{j!=k} beta_jk int u_j^2 u_k^2 (= 4 F(u))."""
    _check(p, u)
    g = u.grid
    sq = u.values ** 2
    total = sum(p.mu[j] * g.integrate(sq[j] ** 2) for j in range(p.N))
    for j in range(p.N):
        for k in range(j + 1, p.N):
            if p.beta[j, k] != 0.0:
                total += 2.0 * p.beta[j, k] * g.integrate(sq[j] * sq[k])
    return total


def total_energy(p: SystemParams, u: State) -> float:
    """Phi(u) = 1/2 ||u||^2 - F(u)."""
    _, tot_sq = norms(p, u)
    return 0.5 * tot_sq - 0.25 * quartic_form(p, u)


def nehari_residual(p: SystemParams, u: State) -> float:
    """<Phi'(u), u> = ||u||^2 - 4 F(u); zero at every critical point."""
    _check(p, u)
    _, tot_sq = norms(p, u)
    if tot_sq == 0.0:
        raise ZeroState("the zero state is not on the constraint set")
    return tot_sq - quartic_form(p, u)


def gradient_values(p: SystemParams, grid, vals: np.ndarray) -> np.ndarray:
    """Strong-form residual of the system on raw nodal values.

    Component j:  -Lap u_j + lambda_j u_j - mu_j u_j^3 - sum_k beta_jk u_k^2 u_j,
    with the Dirichlet node forced to zero.
    """
    out = np.empty_like(vals)
    sq = vals ** 2
    for j in range(p.N):
        out[j] = grid.laplacian_apply(vals[j]) + p.lam[j] * vals[j] - p.mu[j] * vals[j] * sq[j]
        for k in range(p.N):
            if k != j and p.beta[j, k] != 0.0:
                out[j] -= p.beta[j, k] * sq[k] * vals[j]
    out[:, -1] = 0.0
    return out


def gradient(p: SystemParams, u: State) -> State:
    """PDE residual of ``u``; vanishing (in the weighted norm) characterizes a
    bound state."""
    _check(p, u)
    return State(u.grid, gradient_values(p, u.grid, u.values))


def hessian_apply(p: SystemParams, u: State, w: State) -> State:
    """Action of the second derivative of the energy at ``u`` on ``w``.

    Component j:
        -Lap w_j + lambda_j w_j - 3 mu_j u_j^2 w_j
        - sum_{k != j} beta_jk (u_k^2 w_j + 2 u_j u_k w_k).

    Exact Frechet derivative of ``gradient``; symmetric as a bilinear form in
    the weighted inner product.
    """
    _check(p, u)
    u.grid.require_same(w.grid)
    g = u.grid
    uv, wv = u.values, w.values
    out = np.empty_like(wv)
    for j in range(p.N):
        out[j] = g.laplacian_apply(wv[j]) + p.lam[j] * wv[j] - 3.0 * p.mu[j] * uv[j] ** 2 * wv[j]
        for k in range(p.N):
            if k != j and p.beta[j, k] != 0.0:
                out[j] -= p.beta[j, k] * (uv[k] ** 2 * wv[j] + 2.0 * uv[j] * uv[k] * wv[k])
    out[:, -1] = 0.0
    return State(g, out)


# ---------------------------------------------------------------------------
# energy breakdown along the block decomposition
# ---------------------------------------------------------------------------

@dataclass
class EnergyBreakdown:
    """Energy split along the block decomposition.

    total       = phi0 - eps * tilde_F            (to round-off)
    phi0        = sum_j I[j] + sum_k pair_terms[k]
    I[j]        = 1/2 ||u_j||_j^2 - 1/4 mu_j int u_j^4
    pair_terms  = -1/2 pair_beta_k int u_{2k-1}^2 u_{2k}^2
    pair_phi[k] = I[2k-1] + I[2k] + pair_terms[k]   (energy of pair k alone)
    tilde_F     = sum over eps-scaled couplings of 1/2 tilde_beta int u_j^2 u_k^2
    quarter_norm = 1/4 ||u||^2 (equals total at critical points)
    """

    total: float
    phi0: float
    tilde_F: float
    I: np.ndarray
    pair_terms: np.ndarray
    pair_phi: np.ndarray
    quarter_norm: float

    def to_dict(self) -> dict:
        return {
            "total": float(self.total),
            "phi0": float(self.phi0),
            "tilde_F": float(self.tilde_F),
            "I": [float(x) for x in self.I],
            "pair_terms": [float(x) for x in self.pair_terms],
            "pair_phi": [float(x) for x in self.pair_phi],
            "quarter_norm": float(self.quarter_norm),
        }


def energy(p: SystemParams, b: BlockStructure, u: State) -> EnergyBreakdown:
    """Evaluate the energy and its split into unperturbed and eps parts.

    ``b`` must reproduce ``p.beta`` at its own eps (validated).
    """
    _check(p, u)
    b.validate_against(p)
    g = u.grid
    sq = u.values ** 2
    per_norm, tot_sq = norms(p, u)
    I = 0.5 * per_norm ** 2 - 0.25 * p.mu * np.array(
        [g.integrate(sq[j] ** 2) for j in range(p.N)])
    pair_terms = np.array([
        -0.5 * b.pair_beta[k] * g.integrate(sq[2 * k] * sq[2 * k + 1])
        for k in range(b.m)])
    pair_phi = np.array([I[2 * k] + I[2 * k + 1] + pair_terms[k] for k in range(b.m)])
    T = b.eps_scaled_matrix()
    tilde_F = 0.0
    for j in range(p.N):
        for k in range(j + 1, p.N):
            if T[j, k] != 0.0:
                tilde_F += 0.5 * T[j, k] * g.integrate(sq[j] * sq[k])
    total = 0.5 * tot_sq - 0.25 * quartic_form(p, u)
    return EnergyBreakdown(total=total, phi0=float(I.sum() + pair_terms.sum()),
                           tilde_F=float(tilde_F), I=I, pair_terms=pair_terms,
                           pair_phi=pair_phi, quarter_norm=0.25 * tot_sq)
