"""``mdsrel`` command-line interface.

Every table-producing subcommand writes RFC-4180 CSV (to ``--out`` or standard
output) whose first column is the schema version.  With ``--out`` a JSON run
manifest is written next to it as ``<out>.manifest.json``; feeding that file
back through ``--config`` repeats the run.

Exit codes: 0 success, 1 oracle mismatch, 2 configuration error,
3 infeasible target.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import subprocess
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from mdsrel import __version__, kernels
from mdsrel.bounds import BoundConfig, best_retrieval_bound, clt_mixture_score, retrieval_bound
from mdsrel.config import KEY_SECTION, SCHEMA, ExperimentConfig, flag_name
from mdsrel.consensus import ConfigurationError, consensus_error_rate, symbol_error_rate
from mdsrel.inner_code import InnerCode, build_outcome_table
from mdsrel.montecarlo import mc_success_probability
from mdsrel.optimizer import (
    BracketError,
    DesignPoint,
    ReliabilityTarget,
    default_rho_out_grid,
    min_reads,
    opt_density,
)
from mdsrel.retrieval import OuterCode, clt_success_approx, score_pmf
from mdsrel.sequencing import MULTINOMIAL, POISSON, RNG_NAME, SamplingSpec, load_probabilities, sample_dirichlet

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ORACLE, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3

COMMANDS = {
    "eps": "post-consensus nucleotide and symbol error rates per read count",
    "inner": "inner-code success/miscorrection/failure probabilities per read count",
    "retrieve": "score distribution and retrieval probability for a read profile file",
    "bound": "Poisson-model lower bound on the retrieval probability",
    "sweep-reads": "bound and Monte Carlo estimate over a list of read totals",
    "min-reads": "fewest reads meeting the reliability target, per code design",
    "opt-density": "highest information density meeting the target, per read depth",
    "oracle": "run every brute-force validation suite",
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _git_version() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# ---------------------------------------------------------------- builders

def _inner(cfg: ExperimentConfig) -> InnerCode:
    k_sym = cfg.require("k_sym")
    n_sym = cfg.get("n_sym")
    if n_sym is None:
        n_sym = k_sym + 2 * cfg.require("t")
    return InnerCode(n_sym, k_sym, cfg.get("m"))


def _probs(cfg: ExperimentConfig, N: int) -> np.ndarray:
    if cfg.get("p_file"):
        p = load_probabilities(cfg.get("p_file"))
        if p.size != N:
            raise ConfigurationError(f"{cfg.get('p_file')} has {p.size} probabilities, need N={N}")
        return p
    if cfg.get("xi") is not None:
        return sample_dirichlet(N, cfg.get("xi"), cfg.get("seed"))
    return np.full(N, 1.0 / N)


def _spec(cfg: ExperimentConfig, N: int, mean_reads: float, model: str | None = None) -> SamplingSpec:
    model = model or cfg.get("model")
    probs = _probs(cfg, N)
    if model == MULTINOMIAL:
        return SamplingSpec(probs, MULTINOMIAL, R_all=int(round(mean_reads)), seed=cfg.get("seed"))
    if model == POISSON:
        return SamplingSpec(probs, POISSON, lam=float(mean_reads), seed=cfg.get("seed"))
    raise ConfigurationError(f"unknown sampling model {model!r}")


def _mean_reads(cfg: ExperimentConfig) -> float:
    lam = cfg.get("lam")
    if lam is None:
        lam = cfg.get("R_all")
    if lam is None:
        raise ConfigurationError(f"missing required settings: {flag_name('lam')} or {flag_name('R_all')}")
    return float(lam)


def _bound_config(cfg: ExperimentConfig) -> BoundConfig:
    r_prime = cfg.get("r_prime")
    return BoundConfig(r_prime=r_prime if isinstance(r_prime, int) else None,
                       trunc_eps=cfg.get("trunc_eps"), method=cfg.get("method"))


def _evaluate_bound(cfg: ExperimentConfig, spec, outer, table):
    """``r_prime = best`` maximizes over ``r_primes``; otherwise a single threshold."""
    if cfg.get("r_prime") == "best":
        return best_retrieval_bound(spec, outer, table, cfg.get("r_primes"), top=None)
    return retrieval_bound(spec, outer, table, _bound_config(cfg))


# ---------------------------------------------------------------- commands

def cmd_eps(cfg, meta):
    epsilon, r_max = cfg.require("epsilon", "r_max")
    m = cfg.get("m")
    rows = []
    for r in range(1, r_max + 1):
        eps_r = consensus_error_rate(epsilon, r)
        rows.append((r, eps_r, symbol_error_rate(eps_r, m)))
    return ["r", "eps_r", "eps_sym_r"], rows


def cmd_inner(cfg, meta):
    epsilon, r_max = cfg.require("epsilon", "r_max")
    table = build_outcome_table(_inner(cfg), epsilon, r_max)
    rows = [(r, *table.row(r)) for r in range(r_max + 1)]
    return ["r", "alpha", "beta", "gamma"], rows


def cmd_retrieve(cfg, meta):
    epsilon, path, K = cfg.require("epsilon", "profile_file", "K")
    try:
        text = Path(path).read_text(encoding="utf-8")
        profile = np.array([int(x) for x in text.split()], dtype=np.int64)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read read profile {path}: {exc}") from exc
    r_max = max(cfg.get("r_max"), int(profile.max(initial=1)))
    table = build_outcome_table(_inner(cfg), epsilon, r_max)
    dist = score_pmf(profile, table, K)
    approx, err = clt_success_approx(profile, table, K)
    meta.update(success_prob=dist.success_prob, truncation_loss=dist.truncation_loss,
                clt_approx=approx, clt_error_bound=err, N=int(profile.size))
    tails = np.cumsum(dist.pmf.mass[::-1])[::-1]
    rows = [(int(s), float(p), float(t)) for s, p, t in zip(dist.pmf.support, dist.pmf.mass, tails)]
    return ["s", "probability", "tail_ge"], rows


def cmd_bound(cfg, meta):
    epsilon, N, K = cfg.require("epsilon", "N", "K")
    lam = _mean_reads(cfg)
    spec = _spec(cfg, N, lam).poissonized()
    table = build_outcome_table(_inner(cfg), epsilon, max(cfg.get("r_max"), max(cfg.get("r_primes")) + 1))
    outer = OuterCode(N, K, cfg.get("M"))
    res = _evaluate_bound(cfg, spec, outer, table)
    approx, radius = clt_mixture_score(spec, table, K, res.r_prime)
    return (["lam", "r_prime", "bound", "mass_deficit", "method", "clt_approx", "clt_error_bound"],
            [(lam, res.r_prime, res.bound, res.mass_deficit, res.method, approx, radius)])


def cmd_sweep_reads(cfg, meta):
    epsilon, N, K, values = cfg.require("epsilon", "N", "K", "r_all_values")
    trials, seed = cfg.get("trials"), cfg.get("seed")
    table = build_outcome_table(_inner(cfg), epsilon, max(cfg.get("r_max"), max(cfg.get("r_primes")) + 1))
    outer = OuterCode(N, K, cfg.get("M"))
    probs = _probs(cfg, N)
    header = ["R_all", "r_prime", "bound", "mc_mean", "mc_stderr",
              "clt_approx", "clt_error_bound", "truncation_loss", "seed", "bound_exceeds_mc"]
    rows = []
    for i, R in enumerate(values):
        poisson_spec = SamplingSpec(probs, POISSON, lam=float(R))
        res = _evaluate_bound(cfg, poisson_spec, outer, table)
        if cfg.get("model") == MULTINOMIAL:
            mc_spec = SamplingSpec(probs, MULTINOMIAL, R_all=int(round(R)))
        else:
            mc_spec = poisson_spec
        est = mc_success_probability(mc_spec, outer, table, trials, seed + i)
        approx, radius = clt_mixture_score(poisson_spec, table.extended(res.r_prime + 1), K, res.r_prime)
        flag = res.bound > est.mean + 3.0 * est.stderr
        rows.append((R, res.r_prime, res.bound, est.mean, est.stderr,
                     approx, radius, res.mass_deficit, seed + i, flag))
    return header, rows


def cmd_min_reads(cfg, meta):
    epsilon, K, k_sym, ts, rhos = cfg.require("epsilon", "K", "k_sym", "t_values", "rho_out_values")
    target = ReliabilityTarget(cfg.get("delta_th"))
    lo, hi = cfg.get("search_lo"), cfg.get("search_hi")
    search = (lo, hi) if lo is not None and hi is not None else None
    header = ["t", "rho_in", "rho_out", "N", "feasible", "R_all", "depth", "bound", "r_prime", "path"]
    rows, failures = [], 0
    for t in ts:
        for rho in rhos:
            design = DesignPoint.from_rates(K, k_sym, t, rho, cfg.get("m"))
            probs = _probs(cfg, design.N)
            try:
                res = min_reads(design, epsilon, probs, target, search, cfg.get("r_primes"))
                rows.append((t, design.rho_in, design.rho_out, design.N, True, res.R_all, res.depth,
                             res.bound, res.r_prime, res.path))
            except BracketError as exc:
                failures += 1
                print(f"min-reads: t={t} rho_out={rho}: {exc}", file=sys.stderr)
                rows.append((t, design.rho_in, design.rho_out, design.N, False, None, None, None, None, None))
    meta["infeasible_points"] = failures
    if failures:
        meta["exit_reason"] = "infeasible"
    return header, rows


def cmd_opt_density(cfg, meta):
    epsilon, K, k_sym, depths = cfg.require("epsilon", "K", "k_sym", "depth_values")
    target = ReliabilityTarget(cfg.get("delta_th"))
    ts = cfg.get("t_values", list(range(0, 11)))
    rhos = cfg.get("rho_out_values")
    grid = default_rho_out_grid() if rhos is None else rhos
    header = ["depth", "feasible", "delta", "rho_in", "rho_out", "t", "N", "certificate", "certified_by"]
    rows, failures = [], 0
    for depth in depths:
        res = opt_density(K, k_sym, cfg.get("m"), epsilon, lambda n: _probs(cfg, n), depth, target,
                          ts, grid, cfg.get("r_primes"), cfg.get("exhaustive"), cfg.get("certify"),
                          cfg.get("trials"), cfg.get("seed"))
        if res.feasible:
            d = res.design
            rows.append((depth, True, res.delta, d.rho_in, d.rho_out, d.t, d.N, res.certificate, res.certified_by))
        else:
            failures += 1
            rows.append((depth, False, None, None, None, None, None, None, res.certified_by))
    meta["infeasible_points"] = failures
    if failures:
        meta["exit_reason"] = "infeasible"
    return header, rows


def cmd_oracle(cfg, meta):
    from mdsrel.oracles import format_result, run_all

    results = run_all()
    for res in results:
        print(format_result(res), file=sys.stderr)
    ok = all(r.passed for r in results)
    meta["oracles_ok"] = ok
    print("ORACLES OK" if ok else "ORACLES FAILED")
    rows = [(r.suite, r.error, r.tolerance, r.passed) for r in results]
    return ["suite", "error", "tolerance", "passed"], rows


HANDLERS = {
    "eps": cmd_eps, "inner": cmd_inner, "retrieve": cmd_retrieve, "bound": cmd_bound,
    "sweep-reads": cmd_sweep_reads, "min-reads": cmd_min_reads, "opt-density": cmd_opt_density,
    "oracle": cmd_oracle,
}


# ---------------------------------------------------------------- plumbing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdsrel", description="Reliability analysis for MDS-coded DNA storage.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="INI config file or a JSON run manifest")
        for section, keys in SCHEMA.items():
            group = p.add_argument_group(section)
            for key in keys:
                group.add_argument(flag_name(key), dest=key, metavar="VALUE", default=None)
    return parser


def write_csv(header, rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(["schema_version", *header])
    for row in rows:
        writer.writerow([SCHEMA_VERSION, *(_fmt(v) for v in row)])


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if cfg.command and cfg.command != args.command:
        raise ConfigurationError(f"manifest was written by {cfg.command!r}, not {args.command!r}")
    for key, section in KEY_SECTION.items():
        raw = getattr(args, key, None)
        if raw is not None:
            cfg.set(section, key, raw)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        print("mdsrel: error: a subcommand is required", file=sys.stderr)
        return EXIT_CONFIG
    started = time.perf_counter()
    meta: dict = {}
    try:
        cfg = resolve_config(args)
        header, rows = HANDLERS[args.command](cfg, meta)
    except ConfigurationError as exc:
        parser.print_usage(sys.stderr)
        print(f"mdsrel {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BracketError as exc:
        print(f"mdsrel {args.command}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    out = cfg.get("out")
    buf = io.StringIO(newline="")
    write_csv(header, rows, buf)
    if out:
        Path(out).write_text(buf.getvalue(), encoding="utf-8", newline="")
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "config": cfg.to_json(),
            "seed": cfg.get("seed"),
            "rng": RNG_NAME,
            "version": _git_version(),
            "kernel_backend": kernels.BACKEND,
            "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time_ms": round((time.perf_counter() - started) * 1000.0, 3),
            "rows": len(rows),
            "results": {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in meta.items()},
        }
        Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, default=_fmt) + "\n",
                                                     encoding="utf-8")
    elif args.command != "oracle":
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()

    if args.command == "oracle" and not meta.get("oracles_ok", False):
        return EXIT_ORACLE
    if meta.get("exit_reason") == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
