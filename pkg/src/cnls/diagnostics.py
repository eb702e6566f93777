"""Checks a candidate solution must pass: positivity classification,
pairwise integral identities, parameter-order admissibility, and energy
ranking among candidates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCritical
from .functional import gradient, total_energy
from .model import BlockStructure, State, SystemParams
from .solver import weighted_norm

# a component is positive if its interior minimum clears this fraction of its
# sup norm; below the negative of it, it is sign-changing. The band between is
# the discretization noise floor.
POSITIVITY_REL_TOL = 1e-8
# a component is treated as identically zero below this fraction of the
# largest component.
ZERO_COMPONENT_REL_TOL = 1e-9

CRITICALITY_TOL = 1e-6


@dataclass
class PositivityReport:
    label: str                 # positive | nonnegative | sign-changing | zero-component
    component_labels: list
    component_min: np.ndarray  # over interior nodes (Dirichlet node excluded)
    component_sup: np.ndarray


def classify_positivity(u: State) -> PositivityReport:
    """Classify a state by the sign pattern of its components.

    A component counts as zero when its sup norm is negligible against the
    largest component; otherwise it is positive/nonnegative/sign-changing by
    comparing its interior minimum against +-POSITIVITY_REL_TOL times its sup
    norm.  The state label is 'zero-component' if any component is zero, else
    the weakest component label.
    """
    sup = np.max(np.abs(u.values), axis=1)
    interior_min = np.min(u.values[:, :-1], axis=1)
    scale = sup.max()
    labels = []
    for j in range(u.N):
        if sup[j] == 0.0 or sup[j] <= ZERO_COMPONENT_REL_TOL * scale:
            labels.append("zero-component")
        elif interior_min[j] > POSITIVITY_REL_TOL * sup[j]:
            labels.append("positive")
        elif interior_min[j] >= -POSITIVITY_REL_TOL * sup[j]:
            labels.append("nonnegative")
        else:
            labels.append("sign-changing")
    if "zero-component" in labels:
        label = "zero-component"
    elif "sign-changing" in labels:
        label = "sign-changing"
    elif "nonnegative" in labels:
        label = "nonnegative"
    else:
        label = "positive"
    return PositivityReport(label=label, component_labels=labels,
                            component_min=interior_min, component_sup=sup)


@dataclass
class ObstructionValue:
    """One pairwise identity value; j, k are 1-based component indices."""
    j: int
    k: int
    value: float


def obstruction_identities(p: SystemParams, u: State,
                           crit_tol: float = CRITICALITY_TOL):
    """Pairwise integral identities every solution satisfies.

    Multiplying equation j by u_k, equation k by u_j, subtracting and
    integrating (the Laplacian terms cancel by symmetry) leaves, for each
    unordered pair (j, k),

        (mu_j - beta_jk) int u_j^3 u_k
      + sum_{i != j,k} (beta_ji - beta_ki) int u_i^2 u_j u_k
      + (beta_jk - mu_k) int u_j u_k^3
      + (lam_k - lam_j) int u_j u_k  =  0.

    The values are bounded by twice the criticality residual times the state
    norm, so they scale linearly with the solver tolerance.

    Raises NotCritical if the residual of ``u`` exceeds ``crit_tol``.
    """
    res = weighted_norm(u.grid, gradient(p, u).values)
    if res > crit_tol:
        raise NotCritical(
            f"residual {res:.3e} exceeds {crit_tol:.1e}; identity values are "
            "not meaningful this far from a solution")
    g = u.grid
    v = u.values
    out = []
    for j in range(p.N):
        for k in range(j + 1, p.N):
            val = ((p.mu[j] - p.beta[j, k]) * g.integrate(v[j] ** 3 * v[k])
                   + (p.beta[j, k] - p.mu[k]) * g.integrate(v[j] * v[k] ** 3)
                   + (p.lam[k] - p.lam[j]) * g.integrate(v[j] * v[k]))
            for i in range(p.N):
                if i != j and i != k:
                    val += (p.beta[j, i] - p.beta[k, i]) \
                        * g.integrate(v[i] ** 2 * v[j] * v[k])
            out.append(ObstructionValue(j=j + 1, k=k + 1, value=float(val)))
    return out


def positivity_obstruction_flags(p: SystemParams, b: BlockStructure):
    """Parameter orderings that rule out positive solutions.

    When a single component s is coupled to a pair member c with
    beta_cs > mu_s, the pairwise identity cannot balance for a positive
    state, so the system has no positive solution there; the perturbative
    regime requires mu_s above every coupling felt by s.
    """
    flags = []
    for s in b.singles():
        for c in range(2 * b.m):
            if p.beta[c, s] > p.mu[s]:
                flags.append(
                    f"no-positive-solution: mu_{s + 1}={p.mu[s]:g} < "
                    f"beta_{c + 1}{s + 1}={p.beta[c, s]:g}")
    return flags


@dataclass
class RankedCandidate:
    index: int
    energy: float
    residual_norm: float
    ground_state_candidate: bool


def energy_comparison(p: SystemParams, candidates,
                      crit_tol: float = CRITICALITY_TOL):
    """Rank approximately critical states by energy (stable order on ties).

    The lowest-energy candidate is flagged as the ground-state candidate
    among those supplied; global minimality over all bound states is not
    decided here.

    Raises NotCritical naming the first candidate whose residual exceeds
    ``crit_tol``.
    """
    entries = []
    for i, st in enumerate(candidates):
        res = weighted_norm(st.grid, gradient(p, st).values)
        if res > crit_tol:
            raise NotCritical(
                f"candidate {i}: residual {res:.3e} exceeds {crit_tol:.1e}")
        entries.append((i, float(total_energy(p, st)), res))
    order = sorted(range(len(entries)), key=lambda i: entries[i][1])
    ranked = []
    for pos, i in enumerate(order):
        idx, en, res = entries[i]
        ranked.append(RankedCandidate(index=idx, energy=en, residual_norm=res,
                                      ground_state_candidate=(pos == 0)))
    return ranked
