"""Problem data, block decomposition, radial grid, and grid-sampled fields.

Shape and sign conventions used throughout the package:

- The system is N coupled equations on R^n (n = 1, 2, 3),

      -Lap u_j + lambda_j u_j = mu_j u_j^3 + sum_{k != j} beta_jk u_k^2 u_j,

  posed for radially symmetric profiles u_j(r) that decay at infinity.
  beta is symmetric with zero diagonal; lambda_j, mu_j > 0.
- Grids live on the truncated domain [0, R]: nodes r_0 = 0 < ... < r_M = R,
  homogeneous Dirichlet at r_M (surrogate for decay), natural no-flux
  condition at the origin.  Quadrature weights carry the full surface
  measure omega_{n-1} r^{n-1}, so  sum_i w_i f(r_i) ~ int_{R^n} f(|x|) dx.
- State values are an (N, M+1) array; column M is the Dirichlet node.
- The discrete operators come from piecewise-linear elements with exact
  stiffness integrals and lumped (hat-integrated) mass.  This makes the
  quadratic form u.(K u) exactly symmetric, weights strictly positive, and
  the constant function integrate to the exact ball volume, on uniform and
  graded grids alike.  On uniform grids in n = 1 the rule reduces to the
  composite trapezoid and the Laplacian to the standard second-order
  stencil with the even-reflection origin closure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    ConfigError,
    GridMismatch,
    NonzeroForbiddenCoupling,
    PairLambdaMismatch,
    ZeroEps,
)

# surface measure of the unit sphere in R^n: 2, 2*pi, 4*pi
SPHERE_MEASURE = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


# ---------------------------------------------------------------------------
# system parameters and block decomposition
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SystemParams:
    """Full problem data: dimension, linear coefficients, self-interactions,
    and the symmetric coupling matrix.

    Attributes
    ----------
    N : int
        Number of equations (components).
    n : int
        Spatial dimension, one of {1, 2, 3}.
    lam : ndarray, shape (N,)
        Positive linear coefficients lambda_j.
    mu : ndarray, shape (N,)
        Positive self-interaction coefficients mu_j.
    beta : ndarray, shape (N, N)
        Symmetric coupling matrix with zero diagonal.
    """

    N: int
    n: int
    lam: np.ndarray
    mu: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.N = int(self.N)
        self.n = int(self.n)
        self.lam = np.asarray(self.lam, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.n not in (1, 2, 3):
            raise ConfigError(f"dimension n must be 1, 2, or 3, got {self.n}")
        for name, arr in (("lambda", self.lam), ("mu", self.mu)):
            if arr.shape != (self.N,):
                raise ConfigError(f"{name} must have length N={self.N}")
            if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
                raise ConfigError(f"{name} entries must be finite and > 0")
        if self.beta.shape != (self.N, self.N):
            raise ConfigError("beta must be an N x N matrix")
        if not np.all(np.isfinite(self.beta)):
            raise ConfigError("beta entries must be finite")
        if not np.array_equal(self.beta, self.beta.T):
            raise ConfigError("beta must be exactly symmetric")
        if np.any(np.diag(self.beta) != 0.0):
            raise ConfigError("beta must have zero diagonal")

    def with_beta(self, beta: np.ndarray) -> "SystemParams":
        return SystemParams(self.N, self.n, self.lam.copy(), self.mu.copy(),
                            np.asarray(beta, dtype=float))


@dataclass(eq=False)
class BlockStructure:
    """Decomposition of the coupling matrix into m strongly coupled pairs,
    N - 2m single components, and eps-scaled cross couplings.

    Components 2k-1, 2k (1-based) form pair k with internal coupling
    ``pair_beta[k-1]``; the remaining components are singles.  Every coupling
    between a single and any other component is eps * (reduced coupling):
    single-to-pair-member entries live in ``tilde_beta`` (one row per single,
    one column per pair member) and single-to-single entries in
    ``tilde_single``.  Couplings between members of different pairs are
    required to vanish: the unperturbed energy has no such term, so a nonzero
    entry there is outside the perturbative structure altogether.

    ``eps`` records the perturbation scale at which ``reconstruct_beta``
    reproduces a full coupling matrix; continuation varies it.
    """

    m: int
    pair_beta: np.ndarray          # (m,)
    eps: float
    tilde_beta: np.ndarray         # (N - 2m, 2m)
    tilde_single: np.ndarray = None  # (N - 2m, N - 2m), zero diagonal, symmetric

    def __post_init__(self):
        self.m = int(self.m)
        self.eps = float(self.eps)
        self.pair_beta = np.asarray(self.pair_beta, dtype=float).reshape(self.m)
        self.tilde_beta = np.asarray(self.tilde_beta, dtype=float)
        if self.m < 0:
            raise ConfigError("m must be >= 0")
        if not np.isfinite(self.eps) or self.eps < 0:
            raise ConfigError("eps must be finite and >= 0")
        if self.tilde_beta.ndim != 2 or self.tilde_beta.shape[1] != 2 * self.m:
            raise ConfigError("tilde_beta must have shape (N - 2m, 2m)")
        ell = self.tilde_beta.shape[0]
        if self.tilde_single is None:
            self.tilde_single = np.zeros((ell, ell))
        self.tilde_single = np.asarray(self.tilde_single, dtype=float)
        if self.tilde_single.shape != (ell, ell):
            raise ConfigError("tilde_single must have shape (N-2m, N-2m)")
        if not np.array_equal(self.tilde_single, self.tilde_single.T):
            raise ConfigError("tilde_single must be symmetric")
        if np.any(np.diag(self.tilde_single) != 0.0):
            raise ConfigError("tilde_single must have zero diagonal")

    @property
    def N(self) -> int:
        return 2 * self.m + self.tilde_beta.shape[0]

    @property
    def n_singles(self) -> int:
        return self.tilde_beta.shape[0]

    def singles(self) -> np.ndarray:
        """0-based indices of the single components."""
        return np.arange(2 * self.m, self.N)

    def at_eps(self, eps: float) -> "BlockStructure":
        return replace(self, eps=float(eps))

    def reconstruct_beta(self, eps: Optional[float] = None) -> np.ndarray:
        """Full coupling matrix at scale ``eps`` (default: own eps)."""
        e = self.eps if eps is None else float(eps)
        N = self.N
        beta = np.zeros((N, N))
        for k in range(self.m):
            beta[2 * k, 2 * k + 1] = beta[2 * k + 1, 2 * k] = self.pair_beta[k]
        for ell in range(self.n_singles):
            s = 2 * self.m + ell
            for c in range(2 * self.m):
                beta[s, c] = beta[c, s] = e * self.tilde_beta[ell, c]
            for ell2 in range(ell + 1, self.n_singles):
                s2 = 2 * self.m + ell2
                beta[s, s2] = beta[s2, s] = e * self.tilde_single[ell, ell2]
        return beta

    def eps_scaled_matrix(self) -> np.ndarray:
        """N x N symmetric matrix of the reduced (eps-scaled) couplings;
        zero on pair-internal entries."""
        N = self.N
        T = np.zeros((N, N))
        for ell in range(self.n_singles):
            s = 2 * self.m + ell
            for c in range(2 * self.m):
                T[s, c] = T[c, s] = self.tilde_beta[ell, c]
            for ell2 in range(ell + 1, self.n_singles):
                s2 = 2 * self.m + ell2
                T[s, s2] = T[s2, s] = self.tilde_single[ell, ell2]
        return T

    def validate_against(self, p: SystemParams) -> None:
        """Check pair lambdas match and the reconstruction reproduces p.beta
        entrywise (exact equality)."""
        if self.N != p.N:
            raise ConfigError(f"block structure is for N={self.N}, params have N={p.N}")
        for k in range(self.m):
            if p.lam[2 * k] != p.lam[2 * k + 1]:
                raise PairLambdaMismatch(
                    f"pair {k + 1}: lambda_{2*k+1}={p.lam[2*k]} != lambda_{2*k+2}={p.lam[2*k+1]}")
        # couplings between members of different pairs must vanish
        for k in range(self.m):
            for k2 in range(self.m):
                if k == k2:
                    continue
                for a in (2 * k, 2 * k + 1):
                    for b in (2 * k2, 2 * k2 + 1):
                        if p.beta[a, b] != 0.0:
                            raise NonzeroForbiddenCoupling(
                                f"beta[{a + 1},{b + 1}] couples two distinct pairs; "
                                "the block model requires it to be zero")
        if not np.array_equal(self.reconstruct_beta(), p.beta):
            raise ConfigError("block reconstruction does not reproduce params.beta")


def split_blocks(p: SystemParams, m: int, eps: float) -> BlockStructure:
    """Decompose ``p.beta`` into m pairs plus eps-scaled cross couplings.

    The first 2m components form pairs (1,2), (3,4), ...; each pair must share
    its lambda.  All couplings involving a single component are divided by
    ``eps``; couplings between distinct pairs must be zero.

    Raises
    ------
    PairLambdaMismatch, NonzeroForbiddenCoupling, ZeroEps, ConfigError
    """
    m = int(m)
    eps = float(eps)
    if m < 0 or 2 * m > p.N:
        raise ConfigError(f"need 0 <= 2m <= N, got m={m}, N={p.N}")
    if not np.isfinite(eps) or eps < 0:
        raise ConfigError("eps must be finite and >= 0")
    for k in range(m):
        if p.lam[2 * k] != p.lam[2 * k + 1]:
            raise PairLambdaMismatch(
                f"pair {k + 1}: lambda_{2*k+1}={p.lam[2*k]} != lambda_{2*k+2}={p.lam[2*k+1]}")
    for k in range(m):
        for k2 in range(m):
            if k == k2:
                continue
            for a in (2 * k, 2 * k + 1):
                for b in (2 * k2, 2 * k2 + 1):
                    if p.beta[a, b] != 0.0:
                        raise NonzeroForbiddenCoupling(
                            f"beta[{a + 1},{b + 1}]={p.beta[a, b]} couples two distinct "
                            "pairs; the block model requires it to be zero")
    ell_count = p.N - 2 * m
    cross = p.beta[2 * m:, : 2 * m]
    singles_block = p.beta[2 * m:, 2 * m:]
    has_cross = np.any(cross != 0.0) or np.any(singles_block != 0.0)
    if has_cross and eps == 0.0:
        raise ZeroEps("eps = 0 but cross couplings are nonzero")
    if eps > 0.0:
        tilde_beta = cross / eps
        tilde_single = singles_block / eps
    else:
        tilde_beta = np.zeros((ell_count, 2 * m))
        tilde_single = np.zeros((ell_count, ell_count))
    pair_beta = np.array([p.beta[2 * k, 2 * k + 1] for k in range(m)])
    b = BlockStructure(m=m, pair_beta=pair_beta, eps=eps,
                       tilde_beta=tilde_beta, tilde_single=tilde_single)
    b.validate_against(p)
    return b


# ---------------------------------------------------------------------------
# radial grid
# ---------------------------------------------------------------------------

def _int_rpow(a, b, k):
    # int_a^b r^k dr, k >= 0
    return (b ** (k + 1) - a ** (k + 1)) / (k + 1)


@dataclass(eq=False)
class RadialGrid:
    """Truncated radial domain [0, R] with nodes, quadrature weights, and the
    tridiagonal stiffness form of the radial Laplacian.

    ``quad_weights`` satisfy  sum_i w_i f(r_i) ~ omega_{n-1} int_0^R f r^{n-1} dr
    exactly for piecewise-linear f (so constants integrate to the exact ball
    volume).  ``stiff_diag``/``stiff_off`` hold the symmetric tridiagonal K with
    u.(K u) = omega_{n-1} int_0^R |u_h'|^2 r^{n-1} dr for the nodal interpolant
    u_h; the strong Laplacian is K u / w, which at the origin reduces to the
    finite-volume closure of the no-flux condition.
    """

    n: int
    R: float
    nodes: np.ndarray
    quad_weights: np.ndarray
    stiff_diag: np.ndarray = field(repr=False, default=None)
    stiff_off: np.ndarray = field(repr=False, default=None)

    @property
    def M(self) -> int:
        return len(self.nodes) - 1

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    # -- discrete operators ------------------------------------------------

    # quadratic forms preserve the input dtype (extended precision passes
    # through for high-accuracy derivative checks); cast at serialization.

    def integrate(self, values: np.ndarray):
        """Quadrature of a nodal function against the full radial measure."""
        return np.sum(self.quad_weights * values)

    def stiffness_apply(self, u: np.ndarray) -> np.ndarray:
        """K u (weak form of -Lap, all nodes)."""
        v = (self.stiff_diag * u).astype(np.result_type(u, self.stiff_diag),
                                         copy=False)
        v[:-1] = v[:-1] + self.stiff_off * u[1:]
        v[1:] = v[1:] + self.stiff_off * u[:-1]
        return v

    def laplacian_apply(self, u: np.ndarray) -> np.ndarray:
        """Strong form of -Lap: K u / w."""
        return self.stiffness_apply(u) / self.quad_weights

    def dirichlet_energy(self, u: np.ndarray):
        """u.(K u) = int |grad u_h|^2 over R^n."""
        return u @ self.stiffness_apply(u)

    def norm_lam_sq(self, u: np.ndarray, lam: float):
        """int |grad u|^2 + lam u^2 (squared lambda-weighted Sobolev norm)."""
        return self.dirichlet_energy(u) + lam * self.integrate(u * u)

    def same_as(self, other: "RadialGrid") -> bool:
        if other is self:
            return True
        return (self.n == other.n and len(self.nodes) == len(other.nodes)
                and np.array_equal(self.nodes, other.nodes))

    def require_same(self, other: "RadialGrid") -> None:
        if not self.same_as(other):
            raise GridMismatch("operands live on different radial grids")


def grid_from_nodes(n: int, nodes: np.ndarray) -> RadialGrid:
    """Build a grid (weights + stiffness) from an explicit node set."""
    if n not in (1, 2, 3):
        raise ConfigError(f"dimension n must be 1, 2, or 3, got {n}")
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 2:
        raise ConfigError("need at least two nodes")
    if not np.all(np.isfinite(nodes)):
        raise ConfigError("nodes must be finite")
    if nodes[0] != 0.0:
        raise ConfigError("first node must be r = 0")
    if not np.all(np.diff(nodes) > 0):
        raise ConfigError("nodes must be strictly increasing")
    om = SPHERE_MEASURE[n]
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    # lumped mass: exact integrals of the hat functions against r^{n-1}
    up = (_int_rpow(a, b, n) - a * _int_rpow(a, b, n - 1)) / h
    lo = (b * _int_rpow(a, b, n - 1) - _int_rpow(a, b, n)) / h
    w = np.zeros(len(nodes))
    w[1:] += om * up
    w[:-1] += om * lo
    # stiffness: exact cell integrals of r^{n-1} / h^2
    m_cell = _int_rpow(a, b, n - 1)
    off = -om * m_cell / h ** 2
    diag = np.zeros(len(nodes))
    diag[:-1] -= off
    diag[1:] -= off
    return RadialGrid(n=n, R=float(nodes[-1]), nodes=nodes, quad_weights=w,
                      stiff_diag=diag, stiff_off=off)


def make_grid(n: int, R: float, M: int, stretch: float = 1.0) -> RadialGrid:
    """Radial grid on [0, R] with M cells, optionally graded toward the origin.

    Nodes are r_i = R (i/M)^stretch; stretch = 1 is uniform, larger values
    concentrate nodes near r = 0 where profiles curve most.

    Parameters
    ----------
    n : int
        Spatial dimension in {1, 2, 3}.
    R : float
        Truncation radius, > 0.  Choose R large enough that exp(-sqrt(lam_min) R)
        is below the solver tolerance; profiles are cut to zero at r = R.
    M : int
        Number of cells, >= 16.
    stretch : float
        Grading exponent, >= 1.
    """
    if n not in (1, 2, 3):
        raise ConfigError(f"dimension n must be 1, 2, or 3, got {n}")
    if not np.isfinite(R) or R <= 0:
        raise ConfigError(f"R must be finite and > 0, got {R}")
    M = int(M)
    if M < 16:
        raise ConfigError(f"M must be >= 16, got {M}")
    if not np.isfinite(stretch) or stretch < 1.0:
        raise ConfigError(f"stretch must be finite and >= 1, got {stretch}")
    s = np.arange(M + 1) / M
    nodes = R * s ** stretch
    nodes[-1] = R
    return grid_from_nodes(n, nodes)


def default_truncation_radius(lam_min: float, tail: float = 1e-10) -> float:
    """R with exp(-sqrt(lam_min) R) < tail; keeps truncation below solver
    tolerance for profiles decaying at the slowest linear rate."""
    return float(-np.log(tail) / np.sqrt(lam_min)) + 1.0


# ---------------------------------------------------------------------------
# fields and states
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Field:
    """One radial profile sampled on a grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.num_nodes,):
            raise ConfigError("field values must match the grid node count")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("field values must be finite")


@dataclass(eq=False)
class State:
    """N-tuple of radial profiles sharing one grid; values has shape (N, M+1)."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2 or self.values.shape[1] != self.grid.num_nodes:
            raise ConfigError("state values must have shape (N, num_nodes)")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("state values must be finite")

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def components(self):
        return tuple(Field(self.grid, self.values[j]) for j in range(self.N))

    def copy(self) -> "State":
        return State(self.grid, self.values.copy())


def state_from_fields(fields) -> State:
    grid = fields[0].grid
    for f in fields[1:]:
        grid.require_same(f.grid)
    return State(grid, np.vstack([f.values for f in fields]))


@dataclass
class SolveReport:
    """Outcome of one Newton solve: converged state plus diagnostics."""

    state: State
    residual_norm: float
    energy: float
    component_norms: np.ndarray
    positivity: str
    newton_iters: int
    eps: float
    flags: list
    residual_history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return "no-convergence" not in self.flags

    def to_dict(self) -> dict:
        return {
            "residual_norm": float(self.residual_norm),
            "energy": float(self.energy),
            "component_norms": [float(x) for x in self.component_norms],
            "positivity": self.positivity,
            "newton_iters": self.newton_iters,
            "eps": self.eps,
            "flags": list(self.flags),
            "component_min": [float(np.min(v[:-1])) for v in self.state.values],
            "component_max": [float(np.max(np.abs(v))) for v in self.state.values],
        }
