import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import cnls


@pytest.fixture(scope="session")
def grid20():
    return cnls.make_grid(1, 20.0, 2000)


@pytest.fixture(scope="session")
def ground20(grid20):
    return cnls.solve_scalar_ground(grid20)


@pytest.fixture(scope="session")
def grid12():
    # moderate truncation: keeps the exponential tail of unit-rate profiles
    # above the positivity classification floor at the boundary
    return cnls.make_grid(1, 12.0, 1200)


@pytest.fixture(scope="session")
def ground12(grid12):
    return cnls.solve_scalar_ground(grid12)


@pytest.fixture(scope="session")
def reference_problem():
    """Three components: one strongly coupled pair plus one single with unit
    reduced couplings."""
    p = cnls.SystemParams(3, 1, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0],
                          [[0.0, 3.0, 0.0], [3.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    b = cnls.BlockStructure(m=1, pair_beta=[3.0], eps=0.0,
                            tilde_beta=[[1.0, 1.0]])
    return p, b


@pytest.fixture(scope="session")
def reference_path(reference_problem, grid12, ground12):
    p, b = reference_problem
    return cnls.continue_in_eps(p, b, grid12, 0.02, 4, ground=ground12)


@pytest.fixture(scope="session")
def shooting_peaks():
    from oracles import shoot_ground_peak
    return {n: shoot_ground_peak(n) for n in (2, 3)}
