"""Command-line entry point: ``rtsched <subcommand> CONFIG [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import ChannelKind, ChannelModel
from .config import load_config
from .policy import verify_greedy
from .scheduling import SchedulerConfig
from .sim import ExperimentConfig, run_simulation, static_benchmark, sweep_epsilon
from .static import DEFAULT_ITERATIONS

log = logging.getLogger("rtsched")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.frames is not None:
        changes["frames"] = args.frames
    return cfg.replace(**changes) if changes else cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out_dir or cfg.out_dir or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load(args)
    m = run_simulation(cfg)
    out = _out_dir(args, cfg)
    m.write(out, cfg.name)
    print(m.summary_text())
    print(f"wrote {out}/{cfg.name}_*.csv")
    return 0


def _as_known(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.channel.kind is ChannelKind.KNOWN:
        return cfg
    return cfg.replace(channel=ChannelModel(ChannelKind.KNOWN, cfg.channel.dists), policy="auto")


def cmd_sweep(args) -> int:
    cfg = _load(args)
    eps = [float(e) for e in args.epsilons.split(",")]
    static = static_benchmark(_as_known(cfg), epsilon=args.benchmark_epsilon, iterations=args.iterations)
    if static.likely_infeasible:
        print("warning: static problem looks infeasible; gaps are not meaningful", file=sys.stderr)
    rows = sweep_epsilon(cfg, eps, static.objective)
    out = _out_dir(args, cfg)
    path = out / f"{cfg.name}_sweep.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["epsilon", "steady_deficit_sum", "objective", "objective_stderr", "static_objective", "gap"])
        for r in rows:
            wr.writerow([r.epsilon, r.steady_deficit_sum, r.objective, r.objective_stderr,
                         r.static_objective, r.gap])
    lines = [f"static objective {static.objective:.6f}"]
    lines += [f"eps={r.epsilon:<6g} sum d={r.steady_deficit_sum:10.4f}  objective={r.objective:.6f}"
              f"  gap={r.gap:+.6f} (+/- {r.objective_stderr:.2g})" for r in rows]
    (out / f"{cfg.name}_sweep_summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


MODEL_VARIANTS = (("known", "attempts"), ("per_frame", "attempts"),
                  ("per_frame", "successes"), ("per_slot", "attempts"))


def cmd_compare(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    rows, text = [], []
    for kind, variant in MODEL_VARIANTS:
        label = kind if kind != "per_frame" else f"per_frame_{variant}"
        run = cfg.replace(channel=ChannelModel(ChannelKind(kind), cfg.channel.dists),
                          policy="auto", perframe_deficit=variant, name=f"{cfg.name}_{label}")
        m = run_simulation(run)
        m.write(out, run.name)
        text.append(m.summary_text())
        for r in m.summary_rows():
            rows.append({"model": label, **r})
    with open(out / f"{cfg.name}_models.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
        wr.writeheader()
        wr.writerows(rows)
    (out / f"{cfg.name}_models_summary.txt").write_text("\n\n".join(text) + "\n")
    print("\n\n".join(text))
    return 0


def cmd_verify_greedy(args) -> int:
    checks = verify_greedy(args.instances, args.seed or 0, args.max_links, args.max_slots)
    worst = max(c.error for c in checks)
    ok = worst <= args.tol
    print(f"{len(checks)} colocated instances, max |U_greedy - V_opt| = {worst:.3g}: {'PASS' if ok else 'FAIL'}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "verify_greedy.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["links", "slots", "greedy", "optimal", "error"])
            for c in checks:
                wr.writerow([c.links, c.slots, c.greedy, c.optimal, c.error])
    return 0 if ok else 1


def cmd_static(args) -> int:
    cfg = _load(args)
    known = _as_known(cfg)
    sc = known.scheduler
    eps = args.epsilon if args.epsilon is not None else sc.epsilon
    sol = static_benchmark(known.replace(scheduler=SchedulerConfig(sc.w, eps, sc.p)), eps, args.iterations)
    out = _out_dir(args, cfg)
    L = known.graph.link_count
    path = out / f"{cfg.name}_static.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k"] + [f"dhat{l + 1}" for l in range(L)] + [f"mu{l + 1}" for l in range(L)] + ["objective"])
        for k, (dh, mu) in enumerate(zip(sol.dhat_trajectory[1:], sol.mu_trajectory)):
            wr.writerow([k + 1] + [f"{x:.6g}" for x in dh] + [f"{x:.6g}" for x in mu]
                        + [f"{float(sc.w @ mu):.6g}"])
    lines = [f"static objective {sol.objective:.6f}",
             "mu* " + " ".join(f"{x:.5f}" for x in sol.mu),
             f"{sol.metadata['averaging']}; likely infeasible: {sol.likely_infeasible}"]
    (out / f"{cfg.name}_static_summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rtsched", description="Deadline-constrained link scheduling experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", help="TOML experiment config")
        p.add_argument("--seed", type=int)
        p.add_argument("--frames", type=int)
        p.add_argument("--out-dir")

    p = sub.add_parser("simulate", help="run one experiment")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-epsilon", help="deficit and optimality gap versus epsilon")
    common(p)
    p.add_argument("--epsilons", default="0.2,0.1,0.05")
    p.add_argument("--benchmark-epsilon", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-models", help="run all channel models on one base config")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-greedy", help="greedy vs exact DP on random colocated instances")
    common(p, config=False)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--max-links", type=int, default=4)
    p.add_argument("--max-slots", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_greedy)

    p = sub.add_parser("static-opt", help="dual subgradient static benchmark")
    common(p)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_static)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
