"""Serialization: states as CSV, problem data as JSON.

State CSV carries a header row "r,u1,...,uN" and one row per node with
round-trip decimal formatting (shortest representation that parses back to
the same double), so save/load is bit-exact and outputs are reproducible
byte for byte.

Problem JSON uses the keys N, n, lambda, mu, beta, and optionally the block
keys m, eps, tilde_beta, tilde_single.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError
from .model import BlockStructure, State, SystemParams, grid_from_nodes

SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def state_to_csv(u: State) -> str:
    header = "r," + ",".join(f"u{j + 1}" for j in range(u.N))
    lines = [header]
    for i, r in enumerate(u.grid.nodes):
        lines.append(",".join([_fmt(r)] + [_fmt(u.values[j, i]) for j in range(u.N)]))
    return "\n".join(lines) + "\n"


def save_state_csv(path, u: State) -> None:
    Path(path).write_text(state_to_csv(u))


def state_from_csv_text(text: str, n: int) -> State:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty state file")
    header = [h.strip() for h in lines[0].split(",")]
    if header[0] != "r" or len(header) < 2 or \
            any(h != f"u{j + 1}" for j, h in enumerate(header[1:])):
        raise ConfigError(f"bad state header {header!r}; expected r,u1,...,uN")
    N = len(header) - 1
    try:
        rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise ConfigError(f"unparsable state row: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != N + 1:
        raise ConfigError("ragged state rows")
    grid = grid_from_nodes(n, rows[:, 0])
    return State(grid, rows[:, 1:].T.copy())


def load_state_csv(path, n: int) -> State:
    return state_from_csv_text(Path(path).read_text(), n)


# ---------------------------------------------------------------------------
# problem data
# ---------------------------------------------------------------------------

def params_to_dict(p: SystemParams, b: Optional[BlockStructure] = None) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "N": p.N,
        "n": p.n,
        "lambda": [float(x) for x in p.lam],
        "mu": [float(x) for x in p.mu],
        "beta": [[float(x) for x in row] for row in p.beta],
    }
    if b is not None:
        d["m"] = b.m
        d["eps"] = b.eps
        d["pair_beta"] = [float(x) for x in b.pair_beta]
        d["tilde_beta"] = [[float(x) for x in row] for row in b.tilde_beta]
        if np.any(b.tilde_single != 0.0):
            d["tilde_single"] = [[float(x) for x in row] for row in b.tilde_single]
    return d


def params_from_dict(d: dict) -> Tuple[SystemParams, Optional[BlockStructure]]:
    try:
        lam = d["lambda"]
        mu = d["mu"]
        beta = d["beta"]
        n = d["n"]
    except KeyError as exc:
        raise ConfigError(f"missing problem key: {exc}") from exc
    N = int(d.get("N", len(lam)))
    p = SystemParams(N, n, lam, mu, beta)
    b = None
    if "m" in d:
        m = int(d["m"])
        ell = N - 2 * m
        if "pair_beta" in d:
            pair_beta = np.asarray(d["pair_beta"], dtype=float)
        else:
            pair_beta = np.array([p.beta[2 * k, 2 * k + 1] for k in range(m)])
        tilde_beta = np.asarray(d.get("tilde_beta", np.zeros((ell, 2 * m))),
                                dtype=float).reshape(ell, 2 * m)
        tilde_single = d.get("tilde_single")
        b = BlockStructure(m=m, pair_beta=pair_beta, eps=float(d.get("eps", 0.0)),
                           tilde_beta=tilde_beta, tilde_single=tilde_single)
        b.validate_against(p)
    return p, b


def dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(path, obj: dict) -> None:
    Path(path).write_text(dump_json(obj))


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# small tables
# ---------------------------------------------------------------------------

def table_to_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"

