"""The explicit synchronized solution of the two-component system.

For a pair sharing lambda, with beta > max(mu1, mu2), the system

    -Lap u + lam u = mu1 u^3 + beta v^2 u
    -Lap v + lam v = mu2 v^3 + beta u^2 v

has the positive solution (a1 U1, a2 U2) where U_k is the rescaled scalar
ground state and

    a_k = sqrt( mu_k (mu_j - beta) / (mu_k mu_j - beta^2) ),  j != k.

Equivalently, the normalized amplitudes b_k = a_k / sqrt(mu_k) solve the
linear synchronization system

    mu1 b1^2 + beta b2^2 = 1,      beta b1^2 + mu2 b2^2 = 1,

which is exact algebra (no discretization) and serves as the primary
correctness oracle.  The contraction factor

    rho = beta * max(beta - mu1, beta - mu2) / (beta^2 - mu1 mu2)

controls the positivity estimates: sign(rho - 1) = sign(max(mu1, mu2) - beta)
wherever beta^2 > mu1 mu2, so rho leaves (0, 1) exactly when beta crosses the
admissibility threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfWindow, ZeroDenominator
from .functional import gradient, norms, total_energy
from .model import Field, State, SystemParams
from .scalar import ScalarGround, scale_ground
from .solver import weighted_norm


def coupling_coeffs(mu1: float, mu2: float, beta: float):
    """Amplitudes (a1, a2) of the synchronized pair solution.

    Requires beta > max(mu1, mu2); below that the radicands change sign, the
    explicit solution leaves the admissible window, and the positivity
    estimates downstream lose their contraction.
    """
    if not (np.isfinite(mu1) and mu1 > 0 and np.isfinite(mu2) and mu2 > 0):
        raise ValueError("mu1, mu2 must be finite and > 0")
    if not np.isfinite(beta) or beta <= max(mu1, mu2):
        raise OutOfWindow(
            f"beta={beta} must exceed max(mu1, mu2)={max(mu1, mu2)}")
    den = mu1 * mu2 - beta ** 2
    a1 = np.sqrt(mu1 * (mu2 - beta) / den)
    a2 = np.sqrt(mu2 * (mu1 - beta) / den)
    return float(a1), float(a2)


def sync_identity_defects(mu1: float, mu2: float, beta: float,
                          a1: float, a2: float):
    """Defects of the two synchronization identities for the normalized
    amplitudes b_k = a_k / sqrt(mu_k); exactly zero for the true coefficients.
    """
    b1sq = a1 ** 2 / mu1
    b2sq = a2 ** 2 / mu2
    return (abs(mu1 * b1sq + beta * b2sq - 1.0),
            abs(beta * b1sq + mu2 * b2sq - 1.0))


def contraction_rho(mu1: float, mu2: float, beta: float) -> float:
    """Contraction factor of the negative-part estimate.

    rho = beta * max(beta - mu1, beta - mu2) / (beta^2 - mu1 mu2); lies in
    (0, 1) iff beta > max(mu1, mu2) (given beta^2 > mu1 mu2).
    """
    den = beta ** 2 - mu1 * mu2
    if den == 0.0:
        raise ZeroDenominator("beta^2 = mu1 mu2; contraction factor undefined")
    return float(beta * max(beta - mu1, beta - mu2) / den)


@dataclass(eq=False)
class PairSolution:
    """Synchronized pair solution with its admissibility constants."""

    lam: float
    mu1: float
    mu2: float
    beta: float
    a1: float
    a2: float
    u0: Field
    v0: Field
    rho: float
    residual_norm: float
    energy: float

    def params(self, n: int = None) -> SystemParams:
        n = self.u0.grid.n if n is None else n
        return SystemParams(2, n, [self.lam, self.lam], [self.mu1, self.mu2],
                            [[0.0, self.beta], [self.beta, 0.0]])

    def state(self) -> State:
        return State(self.u0.grid, np.vstack([self.u0.values, self.v0.values]))


def pair_solution(g: ScalarGround, lam: float, mu1: float, mu2: float,
                  beta: float) -> PairSolution:
    """Build (a1 U1, a2 U2) on g's grid and evaluate its residual and energy.

    The residual is the discrete system residual of the sampled explicit
    solution, so it reflects pure discretization error and shrinks at second
    order under refinement.
    """
    a1, a2 = coupling_coeffs(mu1, mu2, beta)
    U1 = scale_ground(g, lam, mu1)
    U2 = scale_ground(g, lam, mu2)
    u0 = Field(g.grid, a1 * U1.values)
    v0 = Field(g.grid, a2 * U2.values)
    p = SystemParams(2, g.grid.n, [lam, lam], [mu1, mu2],
                     [[0.0, beta], [beta, 0.0]])
    st = State(g.grid, np.vstack([u0.values, v0.values]))
    res = weighted_norm(g.grid, gradient(p, st).values)
    rho = contraction_rho(mu1, mu2, beta)
    if not 0.0 < rho < 1.0:
        raise OutOfWindow(f"contraction factor rho={rho} outside (0,1)")
    return PairSolution(lam=lam, mu1=mu1, mu2=mu2, beta=beta, a1=a1, a2=a2,
                        u0=u0, v0=v0, rho=rho, residual_norm=res,
                        energy=float(total_energy(p, st)))


def pair_quotient_check(ps: PairSolution, trial) -> float:
    """Rayleigh-type quotient whose infimum over nonzero pairs is the norm of
    the synchronized solution:

        Q(t1, t2) = ||(t1, t2)||^2 / (mu1 int t1^4 + mu2 int t2^4
                                      + 2 beta int t1^2 t2^2)^(1/2).

    ``trial`` is a (Field, Field) pair or a two-component State on the same
    grid.  Raises ZeroDenominator if the quartic form is not positive.
    """
    if isinstance(trial, State):
        t1, t2 = trial.values
        trial_grid = trial.grid
    else:
        f1, f2 = trial
        f1.grid.require_same(f2.grid)
        t1, t2 = f1.values, f2.values
        trial_grid = f1.grid
    ps.u0.grid.require_same(trial_grid)
    g = trial_grid
    norm_sq = (g.norm_lam_sq(t1, ps.lam) + g.norm_lam_sq(t2, ps.lam))
    quart = (ps.mu1 * g.integrate(t1 ** 4) + ps.mu2 * g.integrate(t2 ** 4)
             + 2.0 * ps.beta * g.integrate(t1 ** 2 * t2 ** 2))
    if quart <= 0.0:
        raise ZeroDenominator("quartic form of the trial pair is not positive")
    return float(norm_sq / np.sqrt(quart))


def pair_norm(ps: PairSolution) -> float:
    """||(u0, v0)|| in the lambda-weighted product norm."""
    _, tot_sq = norms(ps.params(), ps.state())
    return float(np.sqrt(tot_sq))
