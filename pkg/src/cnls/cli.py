"""Command-line interface: reproducible solves driven by JSON configs.

Commands
--------
ground         scalar ground state on a radial grid (profile CSV + report JSON)
pair           synchronized pair solutions over (mu1, mu2, beta) triples
               (sweep CSV)
continue       branch continuation in the coupling scale eps (path CSV,
               state CSV, report JSON)
verify         check a state CSV against a problem JSON (verdict JSON)
energy-report  energy breakdown of a state CSV under a problem JSON
sweep          run a list of named sub-configs into isolated output
               directories

Every command takes --config PATH and --out DIR; outputs are deterministic
for a fixed config (fixed iteration order, no randomness, round-trip decimal
formatting).  Reports also render matplotlib figures next to the CSV output
unless --no-plot is given.

Exit codes: 0 success; 1 usage/config/parse error; 2 solver failure;
3 verification check failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import continue_in_eps, params_at_eps
from .diagnostics import (
    classify_positivity,
    obstruction_identities,
    positivity_obstruction_flags,
)
from .errors import CnlsError, ConfigError, NotCritical, OutOfWindow, SolverFailure
from .functional import energy as energy_breakdown
from .functional import gradient, nehari_residual, norms, total_energy
from .io import (
    dump_json,
    load_json,
    load_state_csv,
    params_from_dict,
    params_to_dict,
    save_json,
    save_state_csv,
    table_to_csv,
)
from .model import BlockStructure, State, make_grid
from .pair import pair_solution
from .scalar import (
    scale_ground,
    scaled_ground_report,
    sigma_lambda,
    solve_scalar_ground,
)
from .solver import weighted_norm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3

VERIFY_DEFAULTS = {
    "residual": 1e-6,
    "nehari": 1e-6,
    "energy_identity": 1e-6,
    "obstruction": 1e-6,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg, file=sys.stderr)


def _require(cfg: dict, key, kind=None):
    if key not in cfg:
        raise ConfigError(f"config is missing required key '{key}'")
    val = cfg[key]
    if kind is not None:
        try:
            val = kind(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key '{key}' has bad value {cfg[key]!r}") from exc
    return val


def _grid_from_cfg(cfg: dict, n: int, resolution=None):
    R = _require(cfg, "R", float)
    M = int(resolution) if resolution else _require(cfg, "M", int)
    stretch = float(cfg.get("stretch", 1.0))
    return make_grid(n, R, M, stretch)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# ground
# ---------------------------------------------------------------------------

def cmd_ground(args) -> int:
    cfg = load_json(args.config)
    n = _require(cfg, "n", int)
    lam = float(cfg.get("lambda", 1.0))
    mu = float(cfg.get("mu", 1.0))
    if lam <= 0 or mu <= 0 or not (np.isfinite(lam) and np.isfinite(mu)):
        raise ConfigError(f"lambda and mu must be finite and > 0, got {lam}, {mu}")
    grid = _grid_from_cfg(cfg, n, args.resolution)
    out = _outdir(args)

    g = solve_scalar_ground(grid)
    rep = scaled_ground_report(g, lam, mu)
    profile = scale_ground(g, lam, mu)
    state = State(grid, profile.values[None, :])
    save_state_csv(out / "profile.csv", state)
    report = {
        "schema_version": 1,
        "n": n, "R": grid.R, "M": grid.M,
        "lambda": lam, "mu": mu,
        "peak": rep["peak"],
        "l4_integral": rep["l4_integral"],
        "norm_sq": rep["norm_sq"],
        "nehari_defect": rep["nehari_defect"],
        "sigma_lambda": sigma_lambda(g, lam),
        "base_residual_norm": g.residual_norm,
        "newton_iters": g.newton_iters,
        "initial_amplitude": g.initial_amplitude,
    }
    save_json(out / "report.json", report)
    if cfg.get("sigma_lambdas"):
        rows = [(float(lv), sigma_lambda(g, float(lv))) for lv in cfg["sigma_lambdas"]]
        (out / "sigma_table.csv").write_text(table_to_csv(("lambda", "sigma"), rows))
    if not args.no_plot:
        from .plots import save_profile_figure
        save_profile_figure(out / "profile.png", state,
                            title=f"ground state, n={n}, lambda={lam:g}, mu={mu:g}")
    _say(args, f"ground: peak={rep['peak']:.8f} l4={rep['l4_integral']:.8f} "
         f"defect={rep['nehari_defect']:.2e} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# pair
# ---------------------------------------------------------------------------

def cmd_pair(args) -> int:
    cfg = load_json(args.config)
    n = _require(cfg, "n", int)
    lam = float(cfg.get("lambda", 1.0))
    triples = _require(cfg, "triples")
    if not triples:
        raise ConfigError("'triples' must be a nonempty list of [mu1, mu2, beta]")
    grid = _grid_from_cfg(cfg, n, args.resolution)
    out = _outdir(args)

    g = solve_scalar_ground(grid)
    rows = []
    for i, triple in enumerate(triples):
        if len(triple) != 3:
            raise ConfigError(f"triple {i} is not [mu1, mu2, beta]: {triple!r}")
        mu1, mu2, beta = (float(x) for x in triple)
        ps = pair_solution(g, lam, mu1, mu2, beta)
        rows.append((mu1, mu2, beta, ps.a1, ps.a2, ps.rho, ps.energy))
        if cfg.get("write_states"):
            save_state_csv(out / f"pair_state_{i:03d}.csv", ps.state())
    (out / "pair_sweep.csv").write_text(
        table_to_csv(("mu1", "mu2", "beta", "a1", "a2", "rho", "energy"), rows))
    if not args.no_plot:
        from .plots import save_pair_sweep_figure
        save_pair_sweep_figure(out / "pair_sweep.png", rows)
    _say(args, f"pair: {len(rows)} admissible triples -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# continue
# ---------------------------------------------------------------------------

def cmd_continue(args) -> int:
    cfg = load_json(args.config)
    problem = _require(cfg, "problem")
    p, b = params_from_dict(problem)
    if b is None:
        raise ConfigError("problem must carry the block keys (m, eps, tilde_beta)")
    grid_cfg = _require(cfg, "grid")
    grid = _grid_from_cfg(grid_cfg, p.n, args.resolution)
    eps_target = _require(cfg, "eps_target", float)
    steps = int(cfg.get("steps", 10))
    tol = float(cfg.get("tol", 1e-10))
    max_iter = int(cfg.get("max_iter", 50))
    out = _outdir(args)

    path = continue_in_eps(p, b, grid, eps_target, steps, tol=tol,
                           max_iter=max_iter)

    target_flags = positivity_obstruction_flags(params_at_eps(p, b, eps_target), b)
    header = ["eps", "residual", "energy"] \
        + [f"min_u{j + 1}" for j in range(p.N)] + ["dist_to_z"]
    rows = []
    mins_per_step = []
    for eps, rep, dist in zip(path.eps_values, path.reports, path.distance_to_z):
        mins = [float(np.min(v[:-1])) for v in rep.state.values]
        mins_per_step.append(mins)
        rows.append([eps, rep.residual_norm, rep.energy] + mins + [dist])
    (out / "path.csv").write_text(table_to_csv(header, rows))
    save_state_csv(out / "final_state.csv", path.final.state)
    report = {
        "schema_version": 1,
        "problem": params_to_dict(p, b),
        "grid": {"n": p.n, "R": grid.R, "M": grid.M},
        "eps_target": eps_target,
        "steps_requested": steps,
        "steps_taken": len(path.reports) - 1,
        "eps0_estimate": path.eps0_estimate,
        "path_flags": path.flags,
        "target_admissibility_flags": target_flags,
        "steps_summary": [rep.to_dict() for rep in path.reports],
        "distance_to_z": [float(d) for d in path.distance_to_z],
    }
    save_json(out / "report.json", report)
    if not args.no_plot:
        from .plots import save_continuation_figure, save_profile_figure
        save_continuation_figure(
            out / "path.png", path.eps_values,
            [r.residual_norm for r in path.reports],
            [r.energy for r in path.reports],
            path.distance_to_z, mins_per_step)
        save_profile_figure(out / "final_state.png", path.final.state,
                            title=f"state at eps={path.eps_values[-1]:g}")
    reached = path.eps_values[-1]
    _say(args, f"continue: reached eps={reached:g} in {len(path.reports) - 1} steps, "
         f"final positivity={path.final.positivity}, "
         f"eps0_estimate={path.eps0_estimate} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    thresholds = dict(VERIFY_DEFAULTS)
    if args.config:
        thresholds.update(load_json(args.config).get("thresholds", {}))
    pd = load_json(args.params_file)
    p, b = params_from_dict(pd)
    state = load_state_csv(args.state_file, p.n)
    if state.N != p.N:
        raise ConfigError(f"state has {state.N} components, problem has N={p.N}")
    out = _outdir(args)

    res = weighted_norm(state.grid, gradient(p, state).values)
    _, tot_sq = norms(p, state)
    neh = float(nehari_residual(p, state))
    energy_defect = float(abs(total_energy(p, state) - 0.25 * tot_sq))
    pos = classify_positivity(state)
    checks = {
        "residual": res <= thresholds["residual"],
        "nehari": abs(neh) <= thresholds["nehari"],
        "energy_identity": energy_defect <= thresholds["energy_identity"],
    }
    obstruction = None
    if checks["residual"] and p.N >= 2:
        try:
            vals = obstruction_identities(p, state,
                                          crit_tol=10 * thresholds["residual"])
            obstruction = [{"pair": [o.j, o.k], "value": o.value} for o in vals]
            checks["obstruction"] = all(
                abs(o.value) <= thresholds["obstruction"] for o in vals)
        except NotCritical:
            checks["obstruction"] = False
    flags = positivity_obstruction_flags(p, b) if b is not None else []
    admissibility_conflict = bool(flags) and pos.label == "positive"
    passed = all(checks.values()) and not admissibility_conflict
    verdict = {
        "schema_version": 1,
        "residual_norm": res,
        "nehari_residual": neh,
        "energy_identity_defect": energy_defect,
        "positivity": pos.label,
        "component_positivity": pos.component_labels,
        "obstruction_values": obstruction,
        "admissibility_flags": flags,
        "admissibility_conflict": admissibility_conflict,
        "checks": checks,
        "thresholds": thresholds,
        "pass": passed,
    }
    save_json(out / "verdict.json", verdict)
    print(dump_json(verdict), end="")
    return EXIT_OK if passed else EXIT_CHECK


# ---------------------------------------------------------------------------
# energy-report
# ---------------------------------------------------------------------------

def _fallback_block(p) -> BlockStructure:
    # no block keys: treat every component as a single and every coupling as
    # the perturbation part at unit scale
    has_coupling = bool(np.any(p.beta != 0.0))
    return BlockStructure(m=0, pair_beta=[], eps=1.0 if has_coupling else 0.0,
                          tilde_beta=np.zeros((p.N, 0)),
                          tilde_single=p.beta.copy())


def cmd_energy_report(args) -> int:
    pd = load_json(args.params_file)
    p, b = params_from_dict(pd)
    if b is None:
        b = _fallback_block(p)
    state = load_state_csv(args.state_file, p.n)
    if state.N != p.N:
        raise ConfigError(f"state has {state.N} components, problem has N={p.N}")
    out = _outdir(args)
    eb = energy_breakdown(p, b, state)
    report = {"schema_version": 1, "eps": b.eps, "m": b.m}
    report.update(eb.to_dict())
    save_json(out / "energy_report.json", report)
    print(dump_json(report), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    cfg = load_json(args.config)
    runs = _require(cfg, "runs")
    if not runs:
        raise ConfigError("'runs' must be a nonempty list")
    out = _outdir(args)
    handlers = {"ground": cmd_ground, "pair": cmd_pair, "continue": cmd_continue}
    summary = []
    worst = EXIT_OK
    for i, run in enumerate(runs):
        name = run.get("name", f"run{i:03d}")
        kind = _require(run, "kind")
        if kind not in handlers:
            raise ConfigError(f"run '{name}': unknown kind {kind!r}")
        sub_dir = out / name
        sub_cfg_path = sub_dir / "config.json"
        sub_dir.mkdir(parents=True, exist_ok=True)
        save_json(sub_cfg_path, run.get("config", {}))
        sub_args = argparse.Namespace(
            config=str(sub_cfg_path), out=str(sub_dir), quiet=args.quiet,
            resolution=args.resolution, no_plot=args.no_plot)
        try:
            code = handlers[kind](sub_args)
        except (SolverFailure, OutOfWindow) as exc:
            _say(args, f"sweep run '{name}': {type(exc).__name__}: {exc}")
            code = EXIT_SOLVER
        except ConfigError as exc:
            _say(args, f"sweep run '{name}': {type(exc).__name__}: {exc}")
            code = EXIT_USAGE
        summary.append({"name": name, "kind": kind, "exit_code": code})
        worst = max(worst, code)
    save_json(out / "summary.json", {"schema_version": 1, "runs": summary})
    return worst


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="cnls",
                     description="Radial bound states of coupled cubic "
                                 "Schrödinger systems.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        if config_required:
            sp.add_argument("--config", required=True, help="JSON config path")
        else:
            sp.add_argument("--config", help="JSON config path")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--resolution", type=int, default=None,
                        help="override the grid cell count M")
        sp.add_argument("--quiet", action="store_true")
        sp.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")

    common(sub.add_parser("ground", help="scalar ground state"))
    common(sub.add_parser("pair", help="synchronized pair sweep"))
    common(sub.add_parser("continue", help="continuation in eps"))
    sp = sub.add_parser("verify", help="verify a state against a problem")
    sp.add_argument("state_file", help="state CSV")
    sp.add_argument("params_file", help="problem JSON")
    common(sp, config_required=False)
    sp = sub.add_parser("energy-report",
                        help="energy breakdown of a state under a problem")
    sp.add_argument("state_file", help="state CSV")
    sp.add_argument("params_file", help="problem JSON")
    common(sp, config_required=False)
    common(sub.add_parser("sweep", help="run a list of configs"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "ground": cmd_ground,
        "pair": cmd_pair,
        "continue": cmd_continue,
        "verify": cmd_verify,
        "energy-report": cmd_energy_report,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except (SolverFailure, OutOfWindow) as exc:
        # admissibility failures count as solver failures, not usage errors
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CnlsError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
