"""Command-line front end: one JSON config in, JSON report + CSV curve + PNG figures out."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import continuous as cs
from . import discrete as ds
from .censorship import (MAX_OUTLETS_CHECK, CensorshipPolicy, MediaEnvironment, optimal_censorship,
                         policy_to_partition, policy_value, verify_outcome_equivalence)
from .errors import ConfigInvalid, PersuasionError
from .instances import random_discrete_prior, random_s_objective
from .numerics import BISECT_XTOL
from .objective import ObjectiveFn, classify_shape
from .oracle import ALL_CAP, brute_force, grid_search_continuous
from .priors import ContinuousPrior, DiscretePrior, induce_distribution, prior_from_dict, verify_contraction
from .schemas import validate_config, validate_report

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
SIG_DIGITS = 12

CSV_HELP = """\
CSV columns by curve:
  discrete walk      z, j, q, m, W, delta   (j is a 0-based support index; delta is the tangent gap)
  continuous cutoff  omega, value, cutoff   (value of the cutoff rule at omega and its tangency residual)
  censorship         mask, censored, value  (bit k of mask censors outlet k; censored is ';'-separated)
  oracle batch       index, n, omega_M, solver_value, oracle_value, gap, uc_match
"""


@dataclass
class RunContext:
    out: Path
    name: str
    seed: int
    grid: int | None
    xtol: float
    residual_tol: float
    figures: bool
    outputs: dict


# -- formatting and atomic output ------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), f".{SIG_DIGITS}g")


def clean(obj):
    """Round floats to 12 significant digits and make everything JSON-native."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(format(x, f".{SIG_DIGITS}g"))
        return 0.0 if x == 0.0 else x
    return obj


def write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def dump_json(report: dict) -> str:
    return json.dumps(clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


# -- config handling ---------------------------------------------------------------------

def _build(field_name: str, fn, d):
    try:
        return fn(d)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"config field '{field_name}': {exc}") from exc


def load_prior(cfg: dict, want: type | None = None):
    prior = _build("prior", prior_from_dict, cfg["prior"])
    if want is not None and not isinstance(prior, want):
        kind = "discrete" if want is DiscretePrior else "continuous"
        raise ConfigInvalid(f"config field 'prior.kind': task {cfg['task']!r} needs a {kind} prior")
    return prior


def load_objective(cfg: dict) -> ObjectiveFn:
    return _build("objective", ObjectiveFn.from_dict, cfg["objective"])


def load_environment(cfg: dict) -> MediaEnvironment:
    return _build("environment", MediaEnvironment.from_dict, cfg["environment"])


# -- tasks ------------------------------------------------------------------------------

def _contraction(g, prior) -> dict:
    rep = verify_contraction(g, prior)
    return {"passed": rep.passed, "mean_gap": rep.mean_gap, "worst_violation": rep.worst_violation}


def _walk_rows(prior: DiscretePrior, V: ObjectiveFn, K: int):
    pt, z = ds.walk_curve(prior, V, K)
    rows = zip(z, pt.j, pt.q, pt.m, pt.W, pt.delta)
    return ["z", "j", "q", "m", "W", "delta"], [list(r) for r in rows], (z, pt)


def _cutoff_rows(prior: ContinuousPrior, V: ObjectiveFn, K: int):
    omega = np.linspace(0.0, 1.0, K) if K > 1 else np.zeros(1)
    vals = cs.cutoff_value(prior, V, omega)
    gaps = [cs.cutoff_tangency(prior, V, w) if 0.0 < w < 1.0 else float("nan") for w in omega]
    return ["omega", "value", "cutoff"], [list(r) for r in zip(omega, vals, gaps)], (omega, vals)


def _policy_rows(env: MediaEnvironment):
    if env.n_outlets > MAX_OUTLETS_CHECK:
        raise ConfigInvalid(f"config field 'environment.outlets': at most {MAX_OUTLETS_CHECK} outlets "
                            "can be enumerated")
    rows = []
    for mask in range(1 << env.n_outlets):
        pol = CensorshipPolicy.from_mask(env, mask)
        rows.append([mask, ";".join(fmt(c) for c in pol.censored), policy_value(env, pol)])
    return ["mask", "censored", "value"], rows


def task_solve_discrete(cfg, ctx: RunContext) -> dict:
    from . import plotting

    prior, V = load_prior(cfg, DiscretePrior), load_objective(cfg)
    shape = classify_shape(V)
    mono = ds.solve_monotone_discrete(prior, V, shape)
    st = mono.stochastic
    report = {
        "task": "solve_discrete", "method": "solver", "shape": shape.kind,
        "omega_star": st.cutoff_state if st else mono.omega_star,
        "omega_star_index": st.cutoff_index if st else mono.omega_star_index,
        "q_star": st.q if st else None, "m_star": st.pooled_mean if st else None,
        "value": st.value if st else mono.value, "case": st.case if st else shape.kind,
        "monotone_value": mono.value,
        "partitions": [p.to_list() for p in mono.best_partitions],
        "uc_forms": [list(f) for f in mono.uc_forms],
        "contraction": _contraction(induce_distribution(prior, mono.canonical), prior),
    }
    if st is not None:
        report["tangency_residual"] = ds.tangency_residual(V, st)
        report["stochastic_contraction"] = _contraction(induce_distribution(prior, st), prior)
    cols, rows, (z, pt) = _walk_rows(prior, V, ctx.grid or 1000)
    files = {"csv": _write_csv(ctx, cols, rows)}
    if ctx.figures:
        zs = st.z if st else None
        files["walk_png"] = plotting.walk_figure(z, pt.W, pt.delta, str(ctx.out / f"{ctx.name}_walk.png"), zs)
        pts = [("state", w) for w in prior.support[:1]]
        if st:
            pts = [("cutoff state", st.cutoff_state), ("pooled mean", st.pooled_mean)]
        files["objective_png"] = plotting.objective_figure(V, str(ctx.out / f"{ctx.name}_objective.png"), pts)
    report["files"] = {k: os.path.basename(v) for k, v in files.items()}
    return report


def _continuous_payload(prior, V, ctx: RunContext, shape=None) -> tuple[dict, object, object]:
    shape = shape or classify_shape(V)
    sol = cs.solve_monotone_continuous(prior, V, shape, ctx.grid or cs.SCAN_POINTS, ctx.xtol, ctx.residual_tol)
    unres = cs.unrestricted_value(prior, V, shape)
    cert = unres.certificate
    out = {**sol.to_dict(), "residuals": sol.residuals, "alternatives": sol.alternatives,
           "diagnostics_ok": sol.diagnostics_ok, "bipooling_condition": cert.to_dict(),
           "unrestricted_value": unres.value, "unrestricted_signal": unres.description,
           "contraction": _contraction(sol.distribution(prior), prior)}
    if cert.bitangent is not None:
        bt = cert.bitangent
        out["bitangent"] = {"m_L": bt.m_L, "m_R": bt.m_R, "slope": bt.slope, "intercept": bt.intercept}
    if cert.holds:
        out["bipooling"] = {}
        for mode in ("deterministic_nonmonotone", "stochastic_monotone"):
            sig = cs.construct_bipooling(prior, V, cert, mode)
            out["bipooling"][mode] = {**sig.to_dict(), "atoms": sig.induce(prior).atoms,
                                      "contraction": _contraction(sig.induce(prior), prior)}
    return out, sol, cert


def task_solve_continuous(cfg, ctx: RunContext) -> dict:
    from . import plotting

    prior, V = load_prior(cfg, ContinuousPrior), load_objective(cfg)
    payload, sol, cert = _continuous_payload(prior, V, ctx)
    report = {"task": "solve_continuous", "method": "solver", **payload}
    cols, rows, (omega, vals) = _cutoff_rows(prior, V, ctx.grid or cs.SCAN_POINTS)
    files = {"csv": _write_csv(ctx, cols, rows)}
    if ctx.figures:
        files.update(_continuous_figures(plotting, V, prior, sol, cert, omega, vals, ctx))
    report["files"] = {k: os.path.basename(v) for k, v in files.items()}
    return report


def _continuous_figures(plotting, V, prior, sol, cert, omega, vals, ctx) -> dict:
    chord = None
    if cert.bitangent is not None:
        bt = cert.bitangent
        chord = (bt.m_L, bt.m_R, bt.slope, bt.intercept)
    pts = [("prior mean", prior.mean)]
    if sol.branch != "none":
        pts = [("left pooled mean", sol.m_L_star), ("right pooled mean", sol.m_R_star)]
    marks = [] if sol.branch == "none" else sorted({sol.omega_L_star, sol.omega_R_star})
    return {
        "objective_png": plotting.objective_figure(V, str(ctx.out / f"{ctx.name}_objective.png"), pts, chord,
                                                   f"monotone optimum: {sol.branch}"),
        "cutoff_png": plotting.cutoff_figure(omega, vals, str(ctx.out / f"{ctx.name}_cutoff.png"),
                                             float(V(prior.mean)), marks),
    }


def task_censorship(cfg, ctx: RunContext) -> dict:
    from . import plotting

    env = load_environment(cfg)
    res = optimal_censorship(env)
    report = {"task": "censorship", "method": "solver", **res.to_dict(),
              "outlets": "continuum" if env.is_continuum else list(env.outlets)}
    files = {}
    if env.is_continuum:
        cols, rows, (omega, vals) = _cutoff_rows(env.quality, env.citizens, ctx.grid or cs.SCAN_POINTS)
        files["csv"] = _write_csv(ctx, cols, rows)
        if ctx.figures:
            files["cutoff_png"] = plotting.cutoff_figure(omega, vals, str(ctx.out / f"{ctx.name}_cutoff.png"),
                                                         float(env.citizens(env.quality.mean)), res.permitted)
    else:
        eq = verify_outcome_equivalence(env) if env.n_outlets <= MAX_OUTLETS_CHECK else None
        if eq is not None:
            report["equivalence"] = {"passed": eq.passed, "policies": eq.n_policies,
                                     "partitions": eq.n_partitions, "max_atom_gap": eq.max_atom_gap,
                                     "roundtrip": eq.roundtrip_ok}
        best = CensorshipPolicy(res.censored)
        report["partition"] = policy_to_partition(env, best).to_list()
        cols, rows = _policy_rows(env)
        files["csv"] = _write_csv(ctx, cols, rows)
        if ctx.figures:
            files["policies_png"] = plotting.policy_figure([r[0] for r in rows], [r[2] for r in rows],
                                                           str(ctx.out / f"{ctx.name}_policies.png"),
                                                           best.mask(env))
    report["files"] = {k: os.path.basename(v) for k, v in files.items()}
    return report


def _random_batch(spec: dict, seed: int) -> tuple[dict, list, list]:
    rng = np.random.default_rng(seed)
    count = int(spec.get("count", 20))
    n_min, n_max = int(spec.get("n_min", 2)), int(spec.get("n_max", 8))
    if n_min > n_max:
        raise ConfigInvalid("config field 'oracle.random_batch': n_min exceeds n_max")
    rows, worst, all_match = [], 0.0, True
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        prior, V = random_discrete_prior(rng, n), random_s_objective(rng)
        sol = ds.solve_monotone_discrete(prior, V)
        bf = brute_force(prior, V, "monotone")
        gap = abs(sol.value - bf.value)
        match = all(p.is_upper_censorship for p in bf.best) and set(bf.best) <= set(sol.best_partitions)
        worst, all_match = max(worst, gap), all_match and match
        rows.append([i, n, V.spec["omega_M"], sol.value, bf.value, gap, match])
    summary = {"count": count, "seed": seed, "max_gap": worst, "all_uc_match": all_match}
    return summary, ["index", "n", "omega_M", "solver_value", "oracle_value", "gap", "uc_match"], rows


def task_oracle(cfg, ctx: RunContext) -> dict:
    ocfg = cfg.get("oracle", {})
    report = {"task": "oracle", "method": "oracle", "results": []}
    files = {}
    if "prior" in cfg:
        prior, V = load_prior(cfg), load_objective(cfg)
        if isinstance(prior, DiscretePrior):
            kinds = [ocfg["kind"]] if "kind" in ocfg else ["monotone"] + (["all"] if prior.n <= ALL_CAP else [])
            for kind in kinds:
                if kind == "stochastic_uc_z":
                    g = grid_search_continuous(prior, V, max(ctx.grid or 1000, 100), kind)
                    report["results"].append({"kind": kind, "params": g.params, "value": g.value, "K": g.K})
                    continue
                if kind not in ("monotone", "all"):
                    raise ConfigInvalid(f"config field 'oracle.kind': {kind!r} needs a continuous prior")
                bf = brute_force(prior, V, kind)
                report["results"].append({"kind": kind, "value": bf.value, "count": bf.count,
                                          "best": [_blocks(p) for p in bf.best]})
        else:
            kind = ocfg.get("kind", "interval_disclosure")
            if kind not in ("interval_disclosure", "bipooling_pairs"):
                raise ConfigInvalid(f"config field 'oracle.kind': {kind!r} needs a discrete prior")
            g = grid_search_continuous(prior, V, max(ctx.grid or 400, 100), kind)
            report["results"].append({"kind": kind, "params": g.params, "value": g.value, "K": g.K})
    if "random_batch" in ocfg:
        summary, cols, rows = _random_batch(ocfg["random_batch"], ctx.seed)
        report["batch"] = summary
        files["csv"] = _write_csv(ctx, cols, rows)
    if "prior" not in cfg and "random_batch" not in ocfg:
        raise ConfigInvalid("config field 'prior': the oracle task needs a prior or oracle.random_batch")
    report["files"] = {k: os.path.basename(v) for k, v in files.items()}
    return report


def _blocks(p) -> list:
    return p.to_list() if hasattr(p, "to_list") else [list(b) for b in p.blocks]


def task_sweep(cfg, ctx: RunContext) -> dict:
    from . import plotting

    family = cfg["sweep"]["family"]
    K = int(cfg["sweep"].get("K") or ctx.grid or (1000 if family == "discrete_uc" else 400))
    files = {}
    if family == "discrete_uc":
        prior, V = load_prior(cfg, DiscretePrior), load_objective(cfg)
        cols, rows, (z, pt) = _walk_rows(prior, V, K)
        if ctx.figures:
            files["walk_png"] = plotting.walk_figure(z, pt.W, pt.delta, str(ctx.out / f"{ctx.name}_walk.png"))
    elif family == "continuous_cutoff":
        prior, V = load_prior(cfg, ContinuousPrior), load_objective(cfg)
        cols, rows, (omega, vals) = _cutoff_rows(prior, V, K)
        if ctx.figures:
            files["cutoff_png"] = plotting.cutoff_figure(omega, vals, str(ctx.out / f"{ctx.name}_cutoff.png"),
                                                         float(V(prior.mean)))
    else:
        if "environment" not in cfg:
            raise ConfigInvalid("config field 'environment': required for the censorship_policies sweep")
        env = load_environment(cfg)
        if env.is_continuum:
            raise ConfigInvalid("config field 'environment.outlets': policy sweeps need finitely many outlets")
        cols, rows = _policy_rows(env)
        if ctx.figures:
            files["policies_png"] = plotting.policy_figure([r[0] for r in rows], [r[2] for r in rows],
                                                           str(ctx.out / f"{ctx.name}_policies.png"))
    files["csv"] = _write_csv(ctx, cols, rows)
    report = {"task": "sweep", "method": "solver", "family": family, "rows": len(rows), "columns": cols}
    if family == "discrete_uc":
        d = np.array([r[5] for r in rows])
        s = np.sign(d[d != 0.0])
        report["sign_changes"] = int(np.count_nonzero(s[1:] != s[:-1]))
        report["max_row"] = rows[int(np.argmax([r[4] for r in rows]))][0]
    elif family == "continuous_cutoff":
        report["max_row"] = rows[int(np.argmax([r[1] for r in rows]))][0]
    report["files"] = {k: os.path.basename(v) for k, v in files.items()}
    return report


TASKS = {
    "solve_discrete": task_solve_discrete,
    "solve_continuous": task_solve_continuous,
    "censorship": task_censorship,
    "oracle": task_oracle,
    "sweep": task_sweep,
}


def _write_csv(ctx: RunContext, cols, rows) -> str:
    path = ctx.out / ctx.outputs.get("csv", f"{ctx.name}.csv")
    write_atomic(path, dump_csv(cols, rows))
    return str(path)


# -- entry point ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="monopersuasion",
        description="Solve monotone persuasion problems from a JSON config and write a report, "
                    "a CSV curve and PNG figures.",
        epilog=CSV_HELP + "\nEnvironment: MP_SOLVER_THREADS caps oracle worker processes.\n"
               "Exit status: 0 ok, 2 invalid config, 3 solver error.",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="problem config (JSON)")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--seed", type=int, default=None, help="seed for random batches (overrides config)")
    p.add_argument("--grid", type=int, default=None, help="scan / curve resolution K")
    p.add_argument("--tol", type=float, default=None, help="bisection bracket width")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    return p


def run(cfg: dict, out: str | os.PathLike, *, seed=None, grid=None, tol=None, figures=True,
        name: str | None = None) -> dict:
    """Validate ``cfg``, run its task, write all artifacts to ``out`` and return the report."""
    validate_config(cfg)
    if grid is not None and grid < 1:
        raise ConfigInvalid("config field 'grid': must be positive")
    if tol is not None and not tol > 0:
        raise ConfigInvalid("config field 'tolerances.bisect': must be positive")
    tols = cfg.get("tolerances", {})
    outputs = cfg.get("outputs", {})
    ctx = RunContext(
        out=Path(out), name=name or cfg.get("name") or cfg["task"],
        seed=int(seed if seed is not None else cfg.get("seed", 0)),
        grid=grid if grid is not None else cfg.get("grid"),
        xtol=float(tol if tol is not None else tols.get("bisect", BISECT_XTOL)),
        residual_tol=float(tols.get("residual", cs.RESIDUAL_TOL)),
        figures=figures and outputs.get("figures", True),
        outputs=outputs,
    )
    ctx.out.mkdir(parents=True, exist_ok=True)
    report = TASKS[cfg["task"]](cfg, ctx)
    report = clean(report)
    report["files"]["report"] = outputs.get("report", f"{ctx.name}.report.json")
    validate_report(cfg["task"], report)
    write_atomic(ctx.out / report["files"]["report"], dump_json(report))
    return report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"config file: {exc}") from exc
        name = cfg.get("name") if isinstance(cfg, dict) else None
        report = run(cfg, args.out, seed=args.seed, grid=args.grid, tol=args.tol,
                     figures=not args.no_figures, name=name or Path(args.config).stem)
    except ConfigInvalid as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PersuasionError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(json.dumps({k: report[k] for k in ("task", "files")}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
