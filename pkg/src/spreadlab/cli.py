"""Command-line harness: seeded runs with CSV metrics and JSON instances/traces.

Exit status is 0 on success, 2 when a run completed but an asymptotic
precondition is unmet (or a preset failed only on such a precondition), and 1
on errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from spreadlab import experiments
from spreadlab.assignment import DISTS, estimate_Z, scaling_fit
from spreadlab.exthresh import (
    InfeasibleWitness, extract_spread_measure, min_cover_cost, q_expectation_threshold,
    qf_fractional,
)
from spreadlab.fragmentation import (
    FragConfig, janson_bound, janson_corollary, janson_exact_vs_bound, run_fragmentation,
)
from spreadlab.hypergraph import (
    EnumerationCapError, Hypergraph, InstanceError, generators_of, load_hypergraph, spread_kappa,
)
from spreadlab.instances import (
    PatternGraph, copy_hypergraph, dpartite_spread_formula, dsp_checks, forest_rho,
    gen_dpartite_matchings, gen_factor, gen_loose_hamilton, gen_matchings, gen_tree, pattern,
    phi, random_antichain, spread_of_copies,
)
from spreadlab.lp import LPError
from spreadlab.measures import mu_p_exact, mu_p_mc, p_c

log = logging.getLogger("spreadlab")

OK, ERROR, WARN = 0, 1, 2


class Warned(Exception):
    """Raised after output is written when a precondition warning applies."""


@dataclass
class ExperimentConfig:
    command: str
    instance: str | None = None
    seed: int = 0
    trials: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    params: dict = field(default_factory=dict)

    def hash(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k != "output"}
        blob = json.dumps(body, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    skip = {"command", "instance", "seed", "trials", "tol", "out", "func", "verbose", "format"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    tol = {"tol": args.tol} if getattr(args, "tol", None) is not None else {}
    return ExperimentConfig(args.command, getattr(args, "instance", None),
                            getattr(args, "seed", 0) or 0, getattr(args, "trials", 0) or 0,
                            tol, getattr(args, "out", None), params)


# ---------------------------------------------------------------------------
# output


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def write_csv(rows: list[dict], cfg: ExperimentConfig) -> None:
    h = cfg.hash()
    rows = [{**r, "config_hash": h} for r in rows]
    fh, close = _open_out(cfg.output)
    try:
        if rows:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _cell(v) for k, v in r.items()})
    finally:
        if close:
            fh.close()


def write_json(obj, cfg: ExperimentConfig) -> None:
    obj = {"config_hash": cfg.hash(), "seed": cfg.seed, **obj}
    fh, close = _open_out(cfg.output)
    try:
        json.dump(obj, fh, indent=1, default=_json_default)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (tuple, list)):
        return json.dumps(v, default=_json_default)
    return v


def _json_default(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _load(path: str) -> Hypergraph:
    return load_hypergraph(path)


def _load_pattern(path: str) -> PatternGraph:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return pattern(int(obj["r"]), int(obj["m"]), obj["edges"])
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"pattern JSON needs 'r', 'm' and 'edges': {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_spread(args, cfg):
    H = _load(args.instance)
    cert = spread_kappa(H)
    write_csv([{"instance": args.instance, "n": H.n, "edges": len(H), "ell": H.ell,
                "kappa": cert.kappa, "witness": list(cert.witness), "count": cert.count,
                "total": cert.total, "seed": cfg.seed}], cfg)


def cmd_mu(args, cfg):
    G = generators_of(_load(args.instance))
    if args.method == "mc":
        est = mu_p_mc(G, args.p, args.trials, args.seed)
        row = {"mu": est.p, "ci_low": est.ci_low, "ci_high": est.ci_high, "trials": est.trials}
    else:
        v = float(mu_p_exact(G, Fraction(args.p)))
        row = {"mu": v, "ci_low": v, "ci_high": v, "trials": 0}
    write_csv([{"instance": args.instance, "method": args.method, "p": args.p, **row,
                "seed": args.seed}], cfg)


def cmd_pc(args, cfg):
    G = generators_of(_load(args.instance))
    cap = 0 if args.method == "mc" else 20
    est = p_c(G, args.tol, args.trials, args.seed, exact_cap=cap)
    write_csv([{"instance": args.instance, "method": est.method, "p": est.p,
                "ci_low": est.ci_low, "ci_high": est.ci_high, "trials": est.trials,
                "seed": args.seed}], cfg)


def cmd_q(args, cfg):
    G = generators_of(_load(args.instance))
    lo, hi = q_expectation_threshold(G, args.tol, bracket=True)
    cover = min_cover_cost(G, lo)
    write_csv([{"instance": args.instance, "q": float(lo), "q_high": float(hi), "tol": args.tol,
                "cover": [list(c) for c in cover.cover], "cover_cost": float(cover.cost),
                "seed": args.seed}], cfg)


def cmd_qf(args, cfg):
    G = generators_of(_load(args.instance))
    lo, hi = qf_fractional(G, args.tol, mode=args.mode, bracket=True)
    write_csv([{"instance": args.instance, "qf": float(lo), "qf_high": float(hi),
                "tol": args.tol, "mode": args.mode, "seed": args.seed}], cfg)


def cmd_dual_measure(args, cfg):
    G = generators_of(_load(args.instance))
    q = Fraction(args.q).limit_denominator(10**9) if args.q is not None else (
        Fraction(qf_fractional(G, args.tol, mode=args.mode)) + Fraction(2 * args.tol))
    res = extract_spread_measure(G, q, args.variant, args.mode)
    if isinstance(res, InfeasibleWitness):
        write_json({"status": "infeasible", "q": float(q), "variant": args.variant,
                    "value": float(res.value),
                    "cover": {",".join(map(str, S)): float(w) for S, w in res.cover.weights.items()}},
                   cfg)
    else:
        write_json({"status": "feasible", **res.to_json(),
                    "mass_exact": [str(m) for m in res.mass]}, cfg)


def _frag_instance(args) -> tuple[Hypergraph, float | None]:
    if args.instance:
        return _load(args.instance), None
    return gen_dpartite_matchings(2, args.perm), dpartite_spread_formula(2, args.perm)


def cmd_fragment(args, cfg):
    H, kappa = _frag_instance(args)
    rows, traces, warned = [], [], set()
    for run in range(args.runs):
        seed = args.seed + run
        tr = run_fragmentation(H, FragConfig(gamma=args.gamma, C=args.C, seed=seed,
                                             dedup=args.dedup), kappa=kappa)
        rows.append({"run": run, "seed": seed, "n": tr.n, "ell": tr.ell, "kappa": tr.kappa,
                     "p": tr.p, "m": tr.m, "q_final": tr.q_final,
                     "rounds_ok": sum(r.success for r in tr.rounds),
                     "final_w_size": tr.final_w_size, "overall": tr.overall,
                     "backpointer_ok": tr.backpointer_ok, "flags": ";".join(tr.flags)})
        traces.append((seed, tr))
        warned.update(f for f in tr.flags if not f.startswith("round-"))
    write_csv(rows, cfg)
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            for seed, tr in traces:
                for rec in tr.records():
                    fh.write(json.dumps({"seed": seed, "config_hash": cfg.hash(), **rec},
                                        default=_json_default) + "\n")
    if warned:
        raise Warned(", ".join(sorted(warned)))


def cmd_janson(args, cfg):
    if args.instance:
        H = _load(args.instance)
        chk = janson_exact_vs_bound(H, Fraction(args.alpha).limit_denominator(10**9))
        row = {"r": chk.r, "kappa": chk.kappa, "alpha": chk.alpha, "bound": chk.bound,
               "exact": chk.exact}
    else:
        if args.r is None or args.kappa is None:
            raise InstanceError("janson needs --instance or both --r and --kappa")
        row = {"r": args.r, "kappa": args.kappa, "alpha": args.alpha,
               "bound": janson_bound(args.r, args.kappa, args.alpha), "exact": ""}
    cor = janson_corollary(row["r"], row["kappa"], row["alpha"])
    write_csv([{**row, "corollary": "" if cor is None else cor, "seed": cfg.seed}], cfg)


def cmd_assign(args, cfg):
    rows = []
    for n in args.n:
        est = estimate_Z((args.d, n), args.dist, args.trials, args.seed + n)
        rows.append({"d": args.d, "n": n, "dist": args.dist, "trials": args.trials,
                     "mean": est.mean, "ci_low": est.ci_low, "ci_high": est.ci_high,
                     "seed": args.seed + n})
    if args.fit:
        fit = scaling_fit(args.d, args.n, args.trials, args.seed, args.dist)
        for r in rows:
            r.update(slope=fit.slope, intercept=fit.intercept, stderr=fit.stderr)
    write_csv(rows, cfg)


def _generate(args):
    k = args.kind
    if k == "matchings":
        return gen_matchings(args.r, args.n)
    if k == "dpartite":
        return gen_dpartite_matchings(args.d, args.n)
    if k == "antichain":
        return random_antichain(args.n, args.k, args.ell, args.seed).as_hypergraph()
    if k == "copies":
        return copy_hypergraph(_pattern_from_args(args), args.host)
    return _pattern_from_args(args)


def _pattern_from_args(args) -> PatternGraph:
    shape = args.shape if args.kind == "copies" else args.kind
    if shape in ("path", "star", "dary", "random"):
        return gen_tree(shape, args.n, args.d, args.seed)
    if shape == "loose-hamilton":
        return gen_loose_hamilton(args.r, args.n)
    if shape == "factor":
        return gen_factor(args.clique, args.n)
    raise InstanceError(f"unknown pattern {shape!r}")


def cmd_gen(args, cfg):
    if args.kind == "corpus":
        fam = experiments.corpus(args.n, args.k, args.count, args.seed, args.ell)
        write_json({"instances": [G.as_hypergraph().to_json() for G in fam]}, cfg)
        return
    obj = _generate(args)
    if isinstance(obj, PatternGraph):
        body = {"r": obj.r, "m": obj.m, "edges": [list(e) for e in obj.edges]}
    else:
        body = obj.to_json()
    fh, close = _open_out(cfg.output)
    try:
        json.dump(body, fh)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def cmd_forest(args, cfg):
    F = _load_pattern(args.instance)
    rho, forest = forest_rho(F)
    st = phi(F, connected_only=not args.all_subfamilies)
    write_csv([{"instance": args.instance, "edges": len(F.edges), "rho": rho,
                "forest": [list(e) for e in forest], "phi": st.phi,
                "phi_witness": [list(e) for e in st.witness_subfamily], "seed": cfg.seed}], cfg)


def cmd_copyspread(args, cfg):
    F = _load_pattern(args.instance)
    q, wit, pr = spread_of_copies(F, args.host, args.size_cap, connected=not args.all_subgraphs)
    write_csv([{"instance": args.instance, "host": args.host or F.m, "q_star": q,
                "witness": [list(e) for e in wit], "probability": pr,
                "connected_only": not args.all_subgraphs, "seed": cfg.seed}], cfg)


def cmd_dsp(args, cfg):
    rep = dsp_checks(args.d, args.max_vertices, args.n_host, args.hosts, seed=args.seed)
    write_csv([{"d": rep.d, "bound": rep.bound, "graphs": rep.graphs, "excluded": rep.excluded,
                "min_ratio": rep.min_ratio, "dsp2_violations": rep.dsp2_violations,
                "extremal_ratio": rep.extremal_ratio, "extremal_attained": rep.extremal_attained,
                "dsp1_checked": rep.dsp1_checked, "dsp1_violations": rep.dsp1_violations,
                "dsp1_worst": rep.dsp1_worst, "seed": args.seed}], cfg)
    if rep.dsp2_violations or rep.dsp1_violations:
        raise InstanceError(f"{rep.dsp2_violations} (dsp2) and {rep.dsp1_violations} (dsp1) violations")


def cmd_sandwich(args, cfg):
    if args.corpus == "small":
        fam = experiments.corpus(args.n, args.k, args.count, args.seed, args.ell)
    else:
        fam = experiments.mixed_corpus(args.count, args.seed, args.n)
    rows = experiments.threshold_rows(fam, args.tol)
    slack = 2 * args.tol
    for r in rows:
        r["ok"] = r["q"] <= r["qf"] + slack and r["qf"] <= r["pc"] + slack
        r["seed"] = args.seed
    write_csv(rows, cfg)
    bad = [r["index"] for r in rows if not r["ok"]]
    if bad:
        raise InstanceError(f"sandwich fails on instances {bad}")


def cmd_report(args, cfg):
    results = experiments.run_all(quick=args.quick)
    write_csv([{"criterion": r.number, "title": r.title, "passed": r.passed,
                "detail": json.dumps(r.detail, default=str), "seed": cfg.seed} for r in results],
              cfg)
    for r in results:
        log.info(r.line())
    failed = [r for r in results if not r.passed]
    if failed and all(any("precondition" in str(v) for v in r.detail.values()) for r in failed):
        raise Warned("failed only on unmet preconditions: "
                     + ", ".join(str(r.number) for r in failed))
    if failed:
        raise InstanceError("failed criteria: " + ", ".join(str(r.number) for r in failed))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spreadlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_, instance=True, seed=True, tol=False, trials=None):
        p = sub.add_parser(name, help=help_)
        if instance:
            p.add_argument("--instance", required=instance == "required",
                           help="instance JSON path")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if tol:
            p.add_argument("--tol", type=float, default=1e-4)
        if trials is not None:
            p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--out", help="output path (default stdout)")
        p.set_defaults(func=func)
        return p

    add("spread", cmd_spread, "exact spread kappa* with witness", instance="required")
    p = add("mu", cmd_mu, "mu_p of the up-closure", instance="required", trials=10_000)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p = add("pc", cmd_pc, "threshold p_c", instance="required", tol=True, trials=4000)
    p.add_argument("--method", choices=("auto", "mc"), default="auto")
    add("q", cmd_q, "expectation-threshold q", instance="required", tol=True)
    p = add("qf", cmd_qf, "fractional expectation-threshold q_f", instance="required", tol=True)
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")
    p = add("dual-measure", cmd_dual_measure, "spread measure or infeasibility witness",
            instance="required", tol=True)
    p.add_argument("--q", type=float, help="default: q_f + 2 tol")
    p.add_argument("--variant", choices=("power", "doubled"), default="power")
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")
    p = add("fragment", cmd_fragment, "seeded fragmentation runs")
    p.add_argument("--perm", type=int, default=8, help="permutation matrices of this order "
                   "when no instance is given")
    p.add_argument("--C", type=float, default=experiments.FRAG_C)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--trace-out", help="JSON-lines trace path")
    p = add("janson", cmd_janson, "Janson bound, with exact failure probability for an instance")
    p.add_argument("--r", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--alpha", type=float, required=True)
    p = add("assign", cmd_assign, "random assignment means", instance=False, trials=100)
    p.add_argument("--d", type=int, choices=(2, 3), default=3)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--dist", choices=DISTS, default="exp1")
    p.add_argument("--fit", action="store_true", help="add log-log slope columns")
    p = add("gen", cmd_gen, "generate an instance as JSON", instance=False)
    p.add_argument("kind", choices=("matchings", "dpartite", "antichain", "corpus", "copies",
                                    "path", "star", "dary", "random", "loose-hamilton", "factor"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--clique", type=int, default=3)
    p.add_argument("--shape", default="path", help="pattern for 'copies'")
    p.add_argument("--host", type=int, help="host size for 'copies'")
    p = add("forest", cmd_forest, "max forest rho and phi of a pattern", instance="required")
    p.add_argument("--all-subfamilies", action="store_true")
    p = add("copyspread", cmd_copyspread, "spread of copies of a pattern", instance="required")
    p.add_argument("--host", type=int)
    p.add_argument("--size-cap", type=int, default=4)
    p.add_argument("--all-subgraphs", action="store_true")
    p = add("dsp", cmd_dsp, "degree-bounded subgraph checks", instance=False)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--max-vertices", type=int, default=9)
    p.add_argument("--n-host", type=int, default=12)
    p.add_argument("--hosts", type=int, default=3)
    p = add("sandwich", cmd_sandwich, "q <= q_f <= p_c over a corpus", instance=False, tol=True)
    p.add_argument("--corpus", choices=("small", "mixed"), default="small")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--ell", type=int)
    p.add_argument("--count", type=int, default=100)
    p = add("report", cmd_report, "run the acceptance presets", instance=False)
    p.add_argument("--quick", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    cfg = config_from_args(args)
    try:
        args.func(args, cfg)
    except Warned as w:
        print(f"warning: {w}", file=sys.stderr)
        return WARN
    except (InstanceError, EnumerationCapError, LPError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    return OK


if __name__ == "__main__":
    sys.exit(main())
