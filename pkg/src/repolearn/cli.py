"""Command-line experiment runner.

    repolearn gen         random or fixture instance -> JSON
    repolearn run         run a learner, check it against brute force, report
    repolearn verify-cff  build (or load) a family and check it exhaustively
    repolearn bruteforce  ground-truth report for an instance file

Exit codes: 0 success, 1 a run was not verified exact (or a family failed),
2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .cff import CoverFreeFamily, build_randomized_cff, verify_cff
from .errors import GuardError, RepoLearnError
from .fixtures import FIXTURE_KINDS, FixtureSpec
from .gbs import find_defects, group_testing_lower_bound
from .generate import derived_bounds, random_instance
from .learners import (
    Bounds,
    anytime_full_learning,
    derive_seed,
    learn_full_known_deps,
    learn_full_known_deps_adaptive,
    learn_full_unknown_deps,
    learn_full_unknown_deps_adaptive,
    learn_full_unknown_deps_layered,
    learn_max_subrepo,
    planned_queries,
)
from .model import InstallationOracle, RepositoryInstance
from .truth import GUARD_N, max_subrepo_bruteforce, true_root_defects, weak_relations

ALGORITHMS = (
    "gbs",
    "max-subrepo",
    "full-known",
    "full-known-adaptive",
    "full-unknown",
    "full-unknown-layered",
    "full-unknown-adaptive",
    "anytime",
)
CSV_COLUMNS = ("rep", "algorithm", "n", "d", "u", "c", "r", "queries", "bound", "verdict", "ms")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    algorithm: str
    instance_file: Optional[str] = None
    fixture: Optional[str] = None
    random_params: dict = field(default_factory=dict)
    fixture_params: dict = field(default_factory=dict)
    bounds_override: Optional[Bounds] = None
    r_override: Optional[int] = None
    delta: float = 0.01
    seed: int = 0
    reps: int = 1
    jobs: int = 1

    def __post_init__(self) -> None:
        sources = sum(x is not None for x in (self.instance_file, self.fixture)) + bool(self.random_params)
        if sources != 1:
            raise ConfigError("give exactly one instance source: --instance, --fixture, or random parameters")
        if self.reps < 1:
            raise ConfigError("--reps must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")


def load_instance(path: str) -> RepositoryInstance:
    with open(path) as fh:
        return RepositoryInstance.from_json(fh.read())


def instance_for_rep(cfg: ExperimentConfig, rep: int) -> RepositoryInstance:
    if cfg.instance_file is not None:
        return load_instance(cfg.instance_file)
    if cfg.fixture is not None:
        return FixtureSpec(cfg.fixture, cfg.fixture_params).build()
    return random_instance(seed=derive_seed(cfg.seed, rep), **cfg.random_params)


def _bounds_for(cfg: ExperimentConfig, inst: RepositoryInstance) -> tuple[Bounds, int]:
    base = inst.bounds if inst.bounds is not None else derived_bounds(inst)
    bounds = cfg.bounds_override or Bounds.coerce(base)
    if cfg.bounds_override is None and cfg.algorithm.startswith("full-unknown"):
        # these learners ignore K, so its edges count towards u
        bounds = Bounds(bounds.d, bounds.u + len(inst.known_deps), bounds.c)
    r = cfg.r_override if cfg.r_override is not None else int(base.get("r", base.get("d", 0)))
    return bounds, r


def _model_verdict(model, report, with_deps: bool) -> bool:
    same = model.defects == report.true_defects and model.weak_conflicts == report.weak_conflict_pairs
    return same and (not with_deps or model.weak_dep_closure == report.weak_dep_pairs)


def run_once(cfg: ExperimentConfig, rep: int) -> dict:
    inst = instance_for_rep(cfg, rep)
    bounds, r = _bounds_for(cfg, inst)
    n = inst.n
    seed = derive_seed(cfg.seed, rep, 1)
    oracle = InstallationOracle(inst)
    record: dict = {
        "rep": rep,
        "algorithm": cfg.algorithm,
        "n": n,
        "d": bounds.d,
        "u": bounds.u,
        "c": bounds.c,
        "r": r,
    }
    check = n <= GUARD_N
    start = time.perf_counter()
    try:
        alg = cfg.algorithm
        output: dict
        if alg == "gbs":
            roots = find_defects(oracle, n, inst.known_deps, r)
            bound = group_testing_lower_bound(n, r) + r - 1
            output = {"root_defects": sorted(roots)}
            closure_only = not inst.unknown_deps and not inst.conflicts
            ok = (lambda: roots == true_root_defects(inst)) if check or closure_only else None
        elif alg == "max-subrepo":
            keep = learn_max_subrepo(oracle, n, inst.known_deps, bounds, delta=cfg.delta, seed=seed)
            bound = planned_queries(alg, n, bounds, cfg.delta)
            output = {"installation": sorted(keep)}
            ok = (lambda: keep == weak_relations(inst).non_defects
                  and len(keep) == len(max_subrepo_bruteforce(inst))) if check else None
        elif alg == "anytime":
            res = anytime_full_learning(oracle, n, inst.known_deps, delta=cfg.delta, seed=seed)
            bound = None
            output = {**res.model.to_json_dict(), "stopped_at": res.bounds.as_dict(),
                      "rounds": res.rounds, "consistent": res.consistent}
            record.update(res.bounds.as_dict())
            ok = (lambda: res.consistent and _model_verdict(res.model, weak_relations(inst), True)) if check else None
        else:
            learner = {
                "full-known": lambda: learn_full_known_deps(oracle, n, inst.known_deps, bounds, delta=cfg.delta, seed=seed),
                "full-known-adaptive": lambda: learn_full_known_deps_adaptive(
                    oracle, n, inst.known_deps, bounds, delta=cfg.delta, seed=seed),
                "full-unknown": lambda: learn_full_unknown_deps(oracle, n, bounds, delta=cfg.delta, seed=seed),
                "full-unknown-layered": lambda: learn_full_unknown_deps_layered(
                    oracle, n, bounds, delta=cfg.delta, seed=seed),
                "full-unknown-adaptive": lambda: learn_full_unknown_deps_adaptive(
                    oracle, n, bounds, delta=cfg.delta, seed=seed),
            }[alg]
            model = learner()
            bound = planned_queries(alg, n, bounds, cfg.delta)
            output = model.to_json_dict()
            with_deps = alg.startswith("full-unknown")
            ok = (lambda: _model_verdict(model, weak_relations(inst), with_deps)) if check else None
        elapsed = (time.perf_counter() - start) * 1000
        verdict = "unverified" if ok is None else ("exact" if ok() else "wrong")
    except RepoLearnError as exc:
        elapsed = (time.perf_counter() - start) * 1000
        bound, output, verdict = None, {}, f"error: {exc}"
    record.update(queries=oracle.query_count, bound=bound, verdict=verdict, ms=round(elapsed, 3))
    record["output"] = output
    return record


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    if cfg.jobs > 1 and cfg.reps > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(lambda rep: run_once(cfg, rep), range(cfg.reps)))
    return [run_once(cfg, rep) for rep in range(cfg.reps)]


def format_records(records: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: ("" if rec.get(k) is None else rec[k]) for k in CSV_COLUMNS})
        return buf.getvalue()
    return json.dumps({"runs": records}, indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_bounds(text: str) -> Bounds:
    try:
        d, u, c = (int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--bounds expects D,U,C, got {text!r}") from None
    return Bounds(d, u, c)


# Subcommands --------------------------------------------------------------


def _fixture_params(args) -> dict:
    return {k: getattr(args, k) for k in ("n", "d", "u", "c", "pivot") if getattr(args, k, None) is not None}


def cmd_gen(args) -> int:
    if args.fixture:
        _emit(FixtureSpec(args.fixture, _fixture_params(args)).to_json(), args.output)
        return 0
    if args.n is None:
        raise ConfigError("--n is required for a random instance")
    inst = random_instance(
        args.n,
        known=args.known,
        unknown=args.u or 0,
        conflicts=args.c or 0,
        defects=args.d or 0,
        seed=args.seed,
        strict=args.strict,
        acyclic_unknown=args.acyclic_unknown,
    )
    _emit(inst.to_json(), args.output)
    return 0


def cmd_run(args) -> int:
    random_params = {}
    if args.instance is None and args.fixture is None:
        if args.n is None:
            raise ConfigError("give --instance, --fixture, or --n for a random instance")
        random_params = dict(
            n=args.n, known=args.known, unknown=args.u or 0, conflicts=args.c or 0, defects=args.d or 0,
            strict=args.strict, acyclic_unknown=args.acyclic_unknown,
        )
    cfg = ExperimentConfig(
        algorithm=args.algorithm,
        instance_file=args.instance,
        fixture=args.fixture,
        random_params=random_params,
        fixture_params=_fixture_params(args) if args.fixture else {},
        bounds_override=_parse_bounds(args.bounds) if args.bounds else None,
        r_override=args.r,
        delta=args.delta,
        seed=args.seed,
        reps=args.reps,
        jobs=args.jobs,
    )
    records = run_experiment(cfg)
    _emit(format_records(records, args.format), args.output)
    if args.log:
        with open(args.log, "w") as fh:
            json.dump([r["output"] for r in records], fh)
    return 0 if all(r["verdict"] == "exact" for r in records) else 1


def cmd_verify_cff(args) -> int:
    if args.family:
        with open(args.family) as fh:
            family = CoverFreeFamily.from_json(fh.read())
    else:
        if None in (args.n, args.a, args.b):
            raise ConfigError("--n, --a and --b are required unless --family is given")
        family = build_randomized_cff(args.n, args.a, args.b, args.delta, args.seed)
    result = verify_cff(family, args.a if args.family else None, args.b if args.family else None)
    doc = {"n": family.n, "a": family.a if args.a is None else args.a, "b": family.b if args.b is None else args.b,
           "size": family.realized_size, "pass": result is True}
    if result is not True:
        doc["counterexample"] = {"S1": list(result[0]), "S2": list(result[1])}
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(family.to_json())
    _emit(json.dumps(doc) + "\n", args.output)
    return 0 if result is True else 1


def cmd_bruteforce(args) -> int:
    inst = load_instance(args.instance)
    _emit(weak_relations(inst).to_json(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repolearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--fixture", choices=FIXTURE_KINDS)
        p.add_argument("--n", type=int)
        p.add_argument("--d", type=int, help="defects (random) / fixture d")
        p.add_argument("--u", type=int, help="unknown dependencies (random) / fixture u")
        p.add_argument("--c", type=int, help="conflicts (random) / fixture c")
        p.add_argument("--pivot", type=int, help="fixture index i or ell")
        p.add_argument("--known", type=int, default=0, help="known dependencies (random)")
        p.add_argument("--strict", action="store_true", help="forbid dependencies on root defects")
        p.add_argument("--acyclic-unknown", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-o", "--output")

    gen = sub.add_parser("gen", help="generate an instance")
    instance_flags(gen)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run a learner and verify it")
    instance_flags(run)
    run.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    run.add_argument("--instance")
    run.add_argument("--r", type=int, help="root-defect budget for gbs")
    run.add_argument("--bounds", help="override learner bounds as D,U,C")
    run.add_argument("--delta", type=float, default=0.01)
    run.add_argument("--reps", type=int, default=1)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--log", help="write per-run learner outputs as JSON")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify-cff", help="build and exhaustively verify a cover-free family")
    ver.add_argument("--n", type=int)
    ver.add_argument("--a", type=int)
    ver.add_argument("--b", type=int)
    ver.add_argument("--delta", type=float, default=0.01)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--family", help="load a family JSON instead of building one")
    ver.add_argument("--export", help="write the family JSON here")
    ver.add_argument("-o", "--output")
    ver.set_defaults(func=cmd_verify_cff)

    brute = sub.add_parser("bruteforce", help="ground-truth report for an instance")
    brute.add_argument("--instance", required=True)
    brute.add_argument("-o", "--output")
    brute.set_defaults(func=cmd_bruteforce)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GuardError, RepoLearnError, ValueError, OSError) as exc:
        print(f"repolearn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
