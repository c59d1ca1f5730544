#!/usr/bin/env python3
"""
Command-line front end.

    python cli.py generate --family S --noise II --L 100 --seed 7 --out data/s7
    python cli.py solve data/s7.graph --alg qp --oracle opt
    python cli.py experiment config.yaml --output results.csv

Exit codes: 0 success, 1 usage or config error, 2 runtime error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from datagen import (
    apply_noise,
    generate_planted,
    load_weighted_graph,
    read_clustering,
    read_graph,
    resolve_flip_budget,
    write_clustering,
    write_graph,
)
from errors import CCQueryError, ConfigError
from experiment import build_oracle, env_seed, load_config, measure_mistakes, run_algorithm, run_experiment, write_csv
from models import (
    DEFAULT_NODE_BUDGET,
    DEFAULT_P,
    ELL1,
    ELL2,
    AlgorithmName,
    Family,
    FamilySpec,
    NoiseModel,
    NoiseSpec,
    OracleRegime,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class CLIParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with ``EXIT_USAGE``."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None


def build_parser() -> CLIParser:
    parser = CLIParser(prog="ccquery", description="Correlation clustering with same-cluster queries")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (logs go to stderr)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a planted instance and its ground truth")
    gen.add_argument("--family", type=Family, choices=list(Family), required=True, metavar="FAMILY")
    gen.add_argument("--n", type=int, help="Vertex count for skew/sqrtn")
    gen.add_argument("--sizes", type=_sizes, help="Comma-separated sizes for the explicit family")
    gen.add_argument("--noise", type=NoiseModel, choices=list(NoiseModel), default=NoiseModel.NONE, metavar="MODEL")
    gen.add_argument("--L", dest="flip_budget", type=int, help="Flip budget; defaults per family")
    gen.add_argument("--ell1", type=float, default=ELL1, help="Inter-clique flip fraction (model III)")
    gen.add_argument("--ell2", type=float, default=ELL2, help="Flip fraction of all pairs on large families")
    gen.add_argument("--seed", type=int, help="Instance seed; defaults to $CCQ_SEED or 0")
    gen.add_argument("--out", type=Path, help="Output prefix; writes PREFIX.graph and PREFIX.truth")
    gen.set_defaults(handler=cmd_generate)

    solve = sub.add_parser("solve", help="Run one algorithm on one instance")
    solve.add_argument("graph", type=Path, help="Signed-graph file (or weighted file with --weighted)")
    solve.add_argument("--weighted", action="store_true", help="Read a weighted file and threshold at 1/2")
    solve.add_argument("--alg", type=AlgorithmName, choices=list(AlgorithmName), required=True, metavar="ALG")
    solve.add_argument("--oracle", type=OracleRegime, choices=list(OracleRegime), default=OracleRegime.OPT, metavar="REGIME")
    solve.add_argument("--truth", type=Path, help="Ground-truth clustering file")
    solve.add_argument("--p", type=float, default=DEFAULT_P, help="Engagement probability for rqp")
    solve.add_argument("--seed", type=int, help="Run seed; defaults to $CCQ_SEED")
    solve.add_argument("--error-rate", type=float, default=0.1, help="Per-answer flip probability (noisy)")
    solve.add_argument("--votes", type=int, default=5, help="Annotators per question (noisy)")
    solve.add_argument("--oracle-seed", type=int, default=0, help="Crowd seed (noisy)")
    solve.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET, help="Exact solver node budget")
    solve.add_argument("--out-clustering", type=Path, help="Write the output clustering here")
    solve.set_defaults(handler=cmd_solve)

    exp = sub.add_parser("experiment", help="Run an experiment grid from a YAML config")
    exp.add_argument("config", type=Path, help="Flat YAML experiment config")
    exp.add_argument("--output", type=Path, help="CSV path; overrides the config")
    exp.add_argument("--workers", type=int, help="Worker processes; overrides the config")
    exp.set_defaults(handler=cmd_experiment)
    return parser


def cmd_generate(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else env_seed(0)
    try:
        family_spec = FamilySpec(family=args.family, n=args.n, sizes=args.sizes, seed=seed)
        noise_spec = NoiseSpec(
            model=args.noise, flip_budget=args.flip_budget, ell1=args.ell1, ell2=args.ell2, seed=seed
        )
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    planted, truth = generate_planted(family_spec)
    graph = apply_noise(planted, truth, noise_spec, family=args.family)
    prefix = args.out or Path(f"{args.family.value}-{args.noise.value}-{seed}")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    graph_path = prefix.with_name(prefix.name + ".graph")
    truth_path = prefix.with_name(prefix.name + ".truth")
    write_graph(graph, graph_path)
    write_clustering(truth, truth_path)
    flips = resolve_flip_budget(noise_spec, graph.n, args.family) if args.noise != NoiseModel.NONE else 0
    print(f"n={graph.n} plus_edges={graph.num_plus_edges} clusters={truth.num_clusters} L={flips}")
    print(f"graph={graph_path} truth={truth_path}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    if not 0.0 <= args.p <= 1.0:
        raise ConfigError(f"--p must lie in [0, 1], got {args.p}")
    if args.votes < 1 or args.votes % 2 == 0:
        raise ConfigError(f"--votes must be an odd positive integer, got {args.votes}")
    if not 0.0 <= args.error_rate <= 1.0:
        raise ConfigError(f"--error-rate must lie in [0, 1], got {args.error_rate}")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be non-negative")
    seed = args.seed if args.seed is not None else env_seed()
    graph = load_weighted_graph(args.graph) if args.weighted else read_graph(args.graph)
    truth = read_clustering(args.truth) if args.truth is not None else None

    start = time.perf_counter()
    oracle = None
    if args.alg in (AlgorithmName.QP, AlgorithmName.RQP):
        oracle = build_oracle(
            args.oracle,
            graph,
            truth=truth,
            error_rate=args.error_rate,
            votes=args.votes,
            oracle_seed=args.oracle_seed,
            budget=args.budget,
        )
    outcome = run_algorithm(graph, args.alg, oracle=oracle, p=args.p, seed=seed, budget=args.budget)
    elapsed_ms = (time.perf_counter() - start) * 1000
    mistakes = measure_mistakes(args.oracle, graph, outcome.clustering, truth)

    if args.out_clustering is not None:
        write_clustering(outcome.clustering, args.out_clustering)
    fields = [
        f"algorithm={args.alg.value}",
        f"oracle={args.oracle.value}",
        f"mistakes={mistakes}",
        f"queries={outcome.queries}",
        f"clusters={outcome.clustering.num_clusters}",
        f"elapsed_ms={elapsed_ms:.3f}",
    ]
    if outcome.seed is not None:
        fields.append(f"seed={outcome.seed}")
    print(" ".join(fields))
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.output is not None:
        overrides["output"] = args.output
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        overrides["workers"] = args.workers
    if overrides:
        config = config.model_copy(update=overrides)
    rows = run_experiment(config)
    text = write_csv(rows, config.output)
    if config.output is None:
        sys.stdout.write(text)
    failed = sum(1 for r in rows if not r.ok)
    if failed:
        logger.error("%d of %d run(s) failed", failed, len(rows))
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CCQueryError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
