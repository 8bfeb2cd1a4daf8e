"""Command-line interface: sample, learn, analyze, sweep, reproduce."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiments
from .graphs import GraphFamilySpec, read_graph, write_graph
from .ising import (
    empirical_correlations,
    gibbs_sample,
    read_samples,
    write_correlations_csv,
    write_samples,
)
from .learners import (
    LearnerConfig,
    default_ind_params,
    local_independence_test,
    local_independence_test_pruned,
    rlr_graph,
    thresholding,
)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, frozenset):
        return sorted(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _cmd_sample(args) -> int:
    g = read_graph(args.graph)
    s = gibbs_sample(
        g,
        args.theta,
        n=args.n,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        mixing_cap=args.mixing_cap,
    )
    write_samples(s, args.out)
    if args.corr_out:
        write_correlations_csv(empirical_correlations(s), args.corr_out)
    print(f"wrote {s.n} samples of p={s.p} to {args.out} "
          f"(burn_in={s.burn_in}, thin={s.thin})")
    return 0


def _cmd_learn(args) -> int:
    s = read_samples(args.samples)
    diag_path = args.diag or (str(args.out) + ".jsonl")
    diags = []
    if args.alg == "thr":
        tau = args.tau
        if tau is None:
            if args.theta is None:
                print("learn thr: provide --tau or --theta", file=sys.stderr)
                return 2
            from .learners import tau_tree
            tau = tau_tree(args.theta)
        learned = thresholding(empirical_correlations(s), tau)
        diags.append({"alg": "thr", "tau": tau})
    elif args.alg in ("ind", "indd"):
        if args.delta is None:
            print("learn ind/indd: provide --delta", file=sys.stderr)
            return 2
        eps, gamma, kappa = (args.eps, args.gamma, args.kappa)
        if None in (eps, gamma) or (args.alg == "indd" and kappa is None):
            if args.theta is None:
                print("learn ind/indd: provide --eps/--gamma/--kappa or --theta",
                      file=sys.stderr)
                return 2
            d_eps, d_gamma, d_kappa = default_ind_params(args.theta, args.delta)
            eps = d_eps if eps is None else eps
            gamma = d_gamma if gamma is None else gamma
            kappa = d_kappa if kappa is None else kappa
        if args.alg == "ind":
            learned = local_independence_test(s, args.delta, eps, gamma, rule=args.rule)
        else:
            learned = local_independence_test_pruned(
                s, args.delta, eps, gamma, kappa, rule=args.rule
            )
        diags.append({"alg": args.alg, "eps": eps, "gamma": gamma, "kappa": kappa})
    elif args.alg == "rlr":
        if args.lam is None:
            print("learn rlr: provide --lambda", file=sys.stderr)
            return 2
        res = rlr_graph(s, args.lam, rule=args.rule, tol=args.tol,
                        max_iter=args.max_iter)
        learned = res.graph
        for r, est in sorted(res.estimates.items()):
            diags.append(
                {
                    "vertex": r,
                    "converged": est.converged,
                    "iterations": est.iterations,
                    "objective": est.objective,
                    "residual": est.residual,
                    "neighbors": sorted(est.neighbors),
                }
            )
    else:
        raise AssertionError(args.alg)
    write_graph(learned, args.out)
    with open(diag_path, "w") as fh:
        for d in diags:
            fh.write(json.dumps(_jsonable(d)) + "\n")
    print(f"wrote {learned.num_edges} edges to {args.out}; diagnostics in {diag_path}")
    return 0


def _cmd_analyze(args) -> int:
    if args.report == "incoherence":
        g = read_graph(args.graph)
        rep = analysis.graph_incoherence(g, args.theta, args.root)
        payload = _jsonable(rep)
        payload["q_ss"] = np.asarray(rep.q_ss).tolist()
        payload["q_scs"] = np.asarray(rep.q_scs).tolist()
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    elif args.report == "tree-limit":
        rep = analysis.tree_limit_report(args.delta, args.theta)
        Path(args.out).write_text(json.dumps(_jsonable(rep), indent=2) + "\n")
    elif args.report == "thresholds":
        files = experiments.reproduce("thresholds", Path(args.out).parent or Path("."))
        print("wrote", ", ".join(str(f) for f in files))
        return 0
    elif args.report in ("b-sweep", "incoherence-sweep", "x-sweep"):
        thetas = np.linspace(args.theta_min, args.theta_max, args.points)
        rows = []
        if args.report == "b-sweep":
            header = "theta,b_limit"
            for th in thetas:
                try:
                    rep = analysis.tree_limit_report(args.delta, float(th))
                    rows.append(f"{th:.6f},{rep.incoherence_limit:.10f}")
                except ValueError:
                    rows.append(f"{th:.6f},nan")
        elif args.report == "x-sweep":
            header = "theta,x_delta"
            for th in thetas:
                rows.append(f"{th:.6f},{analysis.gp_neighbor_corr(args.delta, float(th)):.10f}")
        else:
            g = read_graph(args.graph)
            header = "theta,incoherence"
            for th in thetas:
                rep = analysis.graph_incoherence(g, float(th), args.root)
                rows.append(f"{th:.6f},{rep.norm:.10f}")
        Path(args.out).write_text("\n".join([header] + rows) + "\n")
    else:
        raise AssertionError(args.report)
    print(f"wrote {args.out}")
    return 0


def _parse_kv_config(path) -> dict:
    """Flat `key = value` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected `key = value`")
        k, v = (part.strip() for part in line.split("=", 1))
        out[k] = v
    return out


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.split(","))


def _ints(v: str) -> tuple:
    return tuple(int(x) for x in v.split(","))


def sweep_config_from_file(path) -> experiments.SweepConfig:
    kv = _parse_kv_config(path)
    fam = GraphFamilySpec(
        family=kv["family"],
        p=int(kv.get("p", 0)),
        delta=int(kv.get("delta", 0)),
        deg=int(kv.get("deg", 0)),
        side=int(kv.get("side", 0)),
        periodic=kv.get("periodic", "false").lower() in ("1", "true", "yes"),
        dilution=float(kv.get("rho", 0.0)),
        shape=kv.get("shape", "path"),
        branching=int(kv.get("branching", 2)),
    )
    learner = LearnerConfig(
        alg=kv.get("learner", "rlr"),
        tau=float(kv["tau"]) if "tau" in kv else None,
        tau_rule=kv.get("tau_rule", "tree"),
        eps=float(kv["eps"]) if "eps" in kv else None,
        gamma=float(kv["gamma"]) if "gamma" in kv else None,
        kappa=float(kv["kappa"]) if "kappa" in kv else None,
        rule=kv.get("rule", "or"),
        tol=float(kv.get("tol", 1e-5)),
        max_iter=int(kv.get("max_iter", 3000)),
    )
    return experiments.SweepConfig(
        family=fam,
        learner=learner,
        theta_grid=_floats(kv["theta_grid"]),
        n_grid=_ints(kv["n_grid"]),
        lambda0_grid=_floats(kv.get("lambda0_grid", "1.0")),
        trials=int(kv.get("trials", 20)),
        seed=int(kv.get("seed", 0)),
        fresh_graph_per_trial=kv.get("fresh_graph", "true").lower()
        in ("1", "true", "yes"),
        burn_in=int(kv["burn_in"]) if "burn_in" in kv else None,
        thin=int(kv["thin"]) if "thin" in kv else None,
        mixing_cap=int(kv.get("mixing_cap", 300)),
        budget_units=float(kv.get("budget_units", 2.0e9)),
        out=kv.get("out"),
    )


def _cmd_sweep(args) -> int:
    cfg = sweep_config_from_file(args.config)
    if args.out:
        cfg.out = args.out
    res = experiments.run_sweep(cfg)
    if not cfg.out:
        for line in res.csv_lines(timestamp=False):
            print(line)
    else:
        print(f"wrote {cfg.out}")
    return 0


def _cmd_reproduce(args) -> int:
    files = experiments.reproduce(args.name, args.out, seed=args.seed)
    print("wrote:", ", ".join(str(f) for f in files))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isinglearn",
        description="Learn Ising model structure from samples and analyze "
        "when learning breaks down.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("sample", help="draw Gibbs samples from a graph file")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    sp.add_argument("--thin", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mixing-cap", dest="mixing_cap", type=int, default=1000)
    sp.add_argument("--out", required=True)
    sp.add_argument("--corr-out", dest="corr_out", default=None)
    sp.set_defaults(fn=_cmd_sample)

    lp = sub.add_parser("learn", help="reconstruct an edge set from samples")
    lp.add_argument("--alg", choices=("thr", "ind", "indd", "rlr"), required=True)
    lp.add_argument("--samples", required=True)
    lp.add_argument("--out", required=True)
    lp.add_argument("--tau", type=float, default=None)
    lp.add_argument("--eps", type=float, default=None)
    lp.add_argument("--gamma", type=float, default=None)
    lp.add_argument("--kappa", type=float, default=None)
    lp.add_argument("--lambda", dest="lam", type=float, default=None)
    lp.add_argument("--theta", type=float, default=None,
                    help="derive default parameters from the coupling")
    lp.add_argument("--delta", type=int, default=None)
    lp.add_argument("--rule", choices=("or", "and"), default="or")
    lp.add_argument("--tol", type=float, default=1e-6)
    lp.add_argument("--max-iter", dest="max_iter", type=int, default=5000)
    lp.add_argument("--diag", default=None, help="JSON-lines diagnostics path")
    lp.set_defaults(fn=_cmd_learn)

    an = sub.add_parser("analyze", help="population-level reports and sweeps")
    an.add_argument(
        "report",
        choices=("incoherence", "tree-limit", "thresholds",
                 "b-sweep", "incoherence-sweep", "x-sweep"),
    )
    an.add_argument("--graph", default=None)
    an.add_argument("--root", type=int, default=1)
    an.add_argument("--theta", type=float, default=None)
    an.add_argument("--delta", type=int, default=4)
    an.add_argument("--theta-min", dest="theta_min", type=float, default=0.1)
    an.add_argument("--theta-max", dest="theta_max", type=float, default=1.0)
    an.add_argument("--points", type=int, default=19)
    an.add_argument("--out", required=True)
    an.set_defaults(fn=_cmd_analyze)

    sw = sub.add_parser("sweep", help="run a sweep from a key=value config file")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", default=None)
    sw.set_defaults(fn=_cmd_sweep)

    rp = sub.add_parser("reproduce", help="run a pinned experiment recipe")
    rp.add_argument("name", choices=experiments.RECIPES)
    rp.add_argument("--out", required=True)
    rp.add_argument("--seed", type=int, default=0)
    rp.set_defaults(fn=_cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
