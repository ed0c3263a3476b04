"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
4 acceptance-threshold failure.  Environment variables PLSTAT_OUTPUT_DIR
and PLSTAT_WORKERS supply defaults for --output-dir and --workers.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import functions, limit_laws, montecarlo, report
from . import rigidity as _rig
from . import sampling_clt as _sclt
from .ensembles import SampleCovSpec, WignerSpec, sample_matrix
from .errors import NonConvergenceError
from .montecarlo import ConfigError
from .rng import MATRIX, derive
from .spectra import eigenvalues_sym
from .variance_functionals import DEFAULT_NODES, sc_variance, wigner_variance

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_THRESHOLD = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def _seed_args(p):
    g = p.add_argument_group("seeding")
    g.add_argument("--seed", type=int, help="master seed (required for randomized runs)")
    g.add_argument("--seed-from-entropy", action="store_true", help="draw a fresh seed and record it")


def _output_args(p):
    p.add_argument("--output-dir", help="directory for report files (env PLSTAT_OUTPUT_DIR)")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plstats", description="Partial linear eigenvalue statistics toolkit.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    th = sub.add_parser("theory", help="limiting variances v^2[f] and d^2[f]")
    th.add_argument("--law", required=True, help="wigner/semicircle or sc/mp")
    th.add_argument("--f", required=True)
    th.add_argument("--m4", type=float, default=3.0)
    th.add_argument("--sigma2", type=float, default=1.0)
    th.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    th.add_argument("--literal-fourth-moment-term", action="store_true")
    _seed_args(th)
    _output_args(th)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    sim.add_argument("--config", help="JSON experiment config; flags below override it")
    sim.add_argument("--ensemble", choices=("wigner", "sample_cov"))
    sim.add_argument("--n", type=int)
    sim.add_argument("--entry", help="entry law: gaussian, rademacher, uniform, two_point")
    sim.add_argument("--m4", type=float, help="fourth moment for the two_point entry law")
    sim.add_argument("--f")
    sim.add_argument("--comparison", choices=montecarlo.COMPARISONS)
    sim.add_argument("--k", type=int)
    sim.add_argument("--k-ratio", type=float)
    sim.add_argument("--k-factor", type=float)
    sim.add_argument("--l", type=int)
    sim.add_argument("--replications", type=int)
    sim.add_argument("--limit-replications", type=int)
    sim.add_argument("--nodes", type=int)
    sim.add_argument("--ks-max", type=float)
    sim.add_argument("--workers", type=int)
    _seed_args(sim)
    _output_args(sim)

    rg = sub.add_parser("rigidity", help="rigidity profile of one realization, or edge-bound checks")
    rg.add_argument("--ensemble", choices=("wigner", "sample_cov"), default="wigner")
    rg.add_argument("--n", type=int, required=True)
    rg.add_argument("--replications", type=int, default=1)
    rg.add_argument("--edge-checks", action="store_true", help="deterministic quantile bounds only")
    rg.add_argument("--c", type=float, default=1.0)
    rg.add_argument("--soft-constant", type=float, default=9 * math.sqrt(2) * math.pi)
    rg.add_argument("--workers", type=int)
    _seed_args(rg)
    _output_args(rg)

    sc = sub.add_parser("sampling-clt", help="sampling-without-replacement CLT")
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--k", type=int, required=True)
    sc.add_argument("--g", default="identity")
    sc.add_argument("--exhaustive", action="store_true", help="exact enumeration (small n)")
    sc.add_argument("--replications", "--reps", type=int, default=10000)
    _seed_args(sc)
    _output_args(sc)

    cp = sub.add_parser("compare", help="KS distance between sample CSVs or against a normal law")
    cp.add_argument("--dir", help="re-ingest an output directory written by simulate")
    cp.add_argument("--samples")
    cp.add_argument("--against")
    cp.add_argument("--normal-variance", type=float)
    _seed_args(cp)
    _output_args(cp)

    ct = sub.add_parser("catalog", help="list test functions and entry laws")
    _seed_args(ct)
    _output_args(ct)
    return parser


# -- helpers ------------------------------------------------------------------


def _resolve_seed(args, required: bool) -> int | None:
    if args.seed is not None and args.seed_from_entropy:
        raise ConfigError(["--seed and --seed-from-entropy are mutually exclusive"])
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(["--seed: must be an integer in [0, 2^64)"])
        return args.seed
    if args.seed_from_entropy:
        return int(np.random.SeedSequence().entropy % 2**64)
    if required:
        raise ConfigError(["--seed: required (or pass --seed-from-entropy)"])
    return None


def _workers(args) -> int:
    w = getattr(args, "workers", None)
    if w is None:
        env = os.environ.get("PLSTAT_WORKERS")
        try:
            w = int(env) if env else 1
        except ValueError:
            raise ConfigError([f"PLSTAT_WORKERS: not an integer: {env!r}"]) from None
    if w < 1:
        raise ConfigError(["--workers: must be >= 1"])
    return w


def _output_dir(args) -> Path | None:
    d = args.output_dir or os.environ.get("PLSTAT_OUTPUT_DIR")
    return Path(d) if d else None


def _finish(args, rep: dict, samples: dict | None = None, resolved: dict | None = None, extra: dict | None = None):
    out = _output_dir(args)
    sys.stdout.write(report.to_json(rep))
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    if resolved is not None:
        (out / "config.resolved.json").write_text(report.to_json(resolved))
    report.emit_report(rep, args.format, out, samples)
    for name, text in (extra or {}).items():
        if args.format in ("csv", "both"):
            (out / name).write_text(text)


def _status(rep: dict) -> int:
    return EXIT_OK if rep.get("pass", True) is True else EXIT_THRESHOLD


# -- subcommands --------------------------------------------------------------


def cmd_theory(args) -> int:
    try:
        law = limit_laws.get_law(args.law)
        f = functions.get(args.f)
    except (KeyError, ValueError) as exc:
        raise ConfigError([str(exc.args[0] if exc.args else exc)]) from None
    try:
        if law is limit_laws.SEMICIRCLE:
            vr = wigner_variance(f, args.m4, args.sigma2, args.nodes)
        else:
            vr = sc_variance(f, args.m4, args.nodes, literal_fourth_moment_term=args.literal_fourth_moment_term)
        rep = {
            "law": law.kind,
            "f": f.name,
            "m4": args.m4,
            **vr.to_dict(),
            "single_mean": limit_laws.expect_f(law, f),
            "single_variance": limit_laws.var_f(law, f),
        }
        if law is limit_laws.SEMICIRCLE:
            rep["sigma2"] = args.sigma2
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    _finish(args, rep)
    return EXIT_OK


def _overrides(args, cfg: dict) -> dict:
    cfg = json.loads(json.dumps(cfg))  # deep copy
    if args.comparison is not None:
        cfg["comparison"] = args.comparison
    sampling = cfg.get("comparison") == "sampling_clt"
    if not sampling:
        ens = cfg.get("ensemble") or {}
        if args.ensemble is not None:
            ens["type"] = args.ensemble
        ens.setdefault("type", "wigner")
        if args.n is not None:
            ens["n"] = args.n
        if args.entry is not None:
            entry = {"kind": args.entry}
            if args.m4 is not None:
                entry["m4"] = args.m4
            ens["offdiag" if ens["type"] == "wigner" else "entry"] = entry
        cfg["ensemble"] = ens
    elif args.n is not None:
        cfg["n"] = args.n
    if args.f is not None:
        cfg["f"] = args.f
    if args.k is not None:
        cfg["k_rule"] = {"kind": "fixed", "k": args.k}
    if args.k_ratio is not None:
        cfg["k_rule"] = {"kind": "proportional", "ratio": args.k_ratio}
    if args.k_factor is not None:
        cfg["k_rule"] = {"kind": "growing_sqrt", "factor": args.k_factor}
    if args.l is not None:
        cfg["k_rule"] = {"kind": "fixed_tail", "l": args.l}
    for key in ("replications", "limit_replications", "nodes"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.ks_max is not None:
        cfg.setdefault("thresholds", {})["ks_max"] = args.ks_max
    return cfg


def cmd_simulate(args) -> int:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"--config: {exc}"]) from None
    cfg = _overrides(args, cfg)
    if args.seed is not None or args.seed_from_entropy or "master_seed" not in cfg:
        cfg["master_seed"] = _resolve_seed(args, required=True)
    config = montecarlo.parse_config(cfg)
    rep, samples = montecarlo.run_experiment(config, _workers(args))
    theory = rep.get("theory", {})
    _finish(args, rep, samples, resolved=config.to_dict())
    if isinstance(theory, dict) and "error" in theory:
        return EXIT_NONCONVERGENCE
    return _status(rep)


def cmd_rigidity(args) -> int:
    if args.n < 3:
        raise ConfigError(["--n: must be >= 3"])
    if args.edge_checks:
        er = _rig.edge_bound_checks(args.n, args.c, soft_constant=args.soft_constant)
        rep = {
            "n": args.n,
            "c": args.c,
            "phi_c": er.phi_c,
            "soft_constant": args.soft_constant,
            "hard_edge_ok": er.hard_edge_ok,
            "soft_edge_ok": er.soft_edge_ok,
            "hard_edge_checked": len(er.hard_edge),
            "soft_edge_checked": len(er.soft_edge),
            "soft_edge_failures": [list(r[:3]) for r in er.soft_edge_failures],
            "pass": er.ok,
        }
        rows = [("hard", *r[:3], int(r[3])) for r in er.hard_edge] + [("soft", *r[:3], int(r[3])) for r in er.soft_edge]
        extra = {"edges.csv": report.table_csv(["edge", "index", "value", "bound", "holds"], rows)}
        _finish(args, rep, extra=extra)
        return _status(rep)
    seed = _resolve_seed(args, required=True)
    if args.replications < 1:
        raise ConfigError(["--replications: must be >= 1"])
    ens = WignerSpec(args.n) if args.ensemble == "wigner" else SampleCovSpec(args.n)
    law = limit_laws.SEMICIRCLE if args.ensemble == "wigner" else limit_laws.MARCHENKO_PASTUR
    locs = limit_laws.classical_locations(law, args.n)
    spec = eigenvalues_sym(sample_matrix(ens, derive(seed, MATRIX, 0)))
    prof = (_rig.wigner_rigidity if args.ensemble == "wigner" else _rig.sc_rigidity)(spec, locs)
    rep = {
        "ensemble": args.ensemble,
        "n": args.n,
        "seed": seed,
        "max_weighted": prof.max_weighted,
        "argmax": prof.argmax(),
    }
    samples = None
    if args.replications > 1:
        cfg = montecarlo.ExperimentConfig(ens, "x", "rigidity", args.replications, seed)
        mc, samples = montecarlo.run_experiment(cfg, _workers(args))
        rep["replicated"] = mc
    extra = {
        "profile.csv": report.table_csv(
            ["j", "eigenvalue", "location", "deviation", "weighted"], list(prof.rows(spec, locs))
        )
    }
    _finish(args, rep, samples, extra=extra)
    return EXIT_OK


def cmd_sampling_clt(args) -> int:
    try:
        g = functions.get(args.g)
    except KeyError as exc:
        raise ConfigError([f"--g: {exc.args[0]}"]) from None
    n, k = args.n, args.k
    if not 0 < k < n:
        raise ConfigError([f"--k: need 0 < k < n = {n}"])
    if args.exhaustive:
        if n > _sclt.MAX_EXHAUSTIVE_N:
            raise ConfigError([f"--n: exhaustive mode is capped at n <= {_sclt.MAX_EXHAUSTIVE_N}"])
        mart = _sclt.martingale_exhaustive(n, k, g)
        rows = []
        for j in range(1, k + 1):
            r2, r4 = _sclt.lemma_b2_residuals(n, k, j, g)
            rows.append({"j": j, "r2": float(r2), "r4": float(r4), "r2_scaled": float(r2 * (n - j + 1)), "r4_scaled": float(r4 * (n - j + 1))})
        rep = {
            "n": n,
            "k": k,
            "g": g.name,
            "exact": mart["exact"],
            "paths": mart["paths"],
            "max_form_gap": float(mart["max_form_gap"]),
            "max_conditional_mean": float(mart["max_conditional_mean"]),
            "lemma_b2": rows,
            "predictable_variance_limit": _sclt.predictable_variance_limit(n, k),
        }
        extra = {"lemma_b2.csv": report.table_csv(["j", "r2", "r4", "r2_scaled", "r4_scaled"], [tuple(r.values()) for r in rows])}
        _finish(args, rep, extra=extra)
        return EXIT_OK
    seed = _resolve_seed(args, required=True)
    cfg = montecarlo.parse_config(
        {
            "ensemble": None,
            "n": n,
            "f": args.g,
            "comparison": "sampling_clt",
            "k_rule": {"kind": "fixed", "k": k},
            "replications": args.replications,
            "master_seed": seed,
        }
    )
    rep, samples = montecarlo.run_experiment(cfg)
    rep["predictable_variance_limit"] = _sclt.predictable_variance_limit(n, k)
    _finish(args, rep, samples, resolved=cfg.to_dict())
    return EXIT_OK


def _load(path) -> np.ndarray:
    try:
        return report.read_samples_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError([str(exc)]) from None


def cmd_compare(args) -> int:
    if args.dir:
        d = Path(args.dir)
        try:
            prior = json.loads((d / "report.json").read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"--dir: {exc}"]) from None
        samples = _load(d / "samples.csv")
        if (d / "limit_samples.csv").exists():
            ks = montecarlo.ks_two_sample(samples, _load(d / "limit_samples.csv"))
            mode = "two_sample"
        else:
            var = prior.get("reference_variance")
            if not isinstance(var, (int, float)):
                raise ConfigError(["--dir: report has no numeric reference_variance"])
            ks = montecarlo.ks_one_sample(samples, montecarlo.normal_cdf(var))
            mode = "one_sample"
        rep = {"mode": mode, "ks_distance": ks, "reported_ks_distance": prior.get("ks_distance")}
        rep["identical"] = rep["reported_ks_distance"] == ks
    elif args.samples and args.against:
        rep = {"mode": "two_sample", "ks_distance": montecarlo.ks_two_sample(_load(args.samples), _load(args.against))}
    elif args.samples and args.normal_variance is not None:
        if args.normal_variance <= 0:
            raise ConfigError(["--normal-variance: must be positive"])
        rep = {
            "mode": "one_sample",
            "ks_distance": montecarlo.ks_one_sample(_load(args.samples), montecarlo.normal_cdf(args.normal_variance)),
        }
    else:
        raise ConfigError(["compare: give --dir, or --samples with --against or --normal-variance"])
    _finish(args, rep)
    return EXIT_OK


def cmd_catalog(args) -> int:
    rep = {
        "functions": [
            {
                "name": f.name,
                "lipschitz_bound": f.lipschitz_bound,
                "bounded": f.bounded,
                "description": f.description,
            }
            for f in functions.CATALOG.values()
        ],
        "aliases": dict(functions.ALIASES),
        "entry_laws": ["gaussian", "rademacher", "uniform", "two_point", "custom"],
        "comparisons": list(montecarlo.COMPARISONS),
    }
    _finish(args, rep)
    return EXIT_OK


_DISPATCH = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "rigidity": cmd_rigidity,
    "sampling-clt": cmd_sampling_clt,
    "compare": cmd_compare,
    "catalog": cmd_catalog,
}


def _error(kind: str, problems: list[str], code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "problems": problems}, sort_keys=True) + "\n")
    return code


def parse_and_dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.subcommand is None:
            raise ConfigError(["missing subcommand: " + ", ".join(_DISPATCH)])
        return _DISPATCH[args.subcommand](args)
    except ConfigError as exc:
        return _error("config", exc.problems, EXIT_CONFIG)
    except NonConvergenceError as exc:
        return _error("nonconvergence", [str(exc)], EXIT_NONCONVERGENCE)


def main(argv=None) -> int:
    code = parse_and_dispatch(argv)
    sys.exit(code)
