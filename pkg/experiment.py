"""
Experiment harness shared by the command line and the HTTP service.

A config names an instance source, a list of algorithms and an oracle
regime. Every (instance, algorithm, parameter, trial) cell becomes one
``RunResult`` row; failures become rows with the ``error`` column set.
"""

import csv
import io
import logging
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NamedTuple, Optional, Union

import yaml
from pydantic import ValidationError

from algorithms import RunOutcome, acn_pivot, query_pivot, random_query_pivot
from datagen import apply_noise, generate_planted, load_weighted_graph, read_clustering, read_graph
from errors import CCQueryError, ConfigError, GraphError, OracleError
from exact import solve_exact
from graph import Clustering, SignedGraph, count_disagreements, count_pair_disagreements
from models import (
    DEFAULT_NODE_BUDGET,
    DEFAULT_P,
    AlgorithmName,
    ExperimentConfig,
    FamilySpec,
    NoiseSpec,
    OracleRegime,
    RunResult,
)
from oracles import NoisyOracleSpec, Oracle, make_noisy_oracle, make_optimal_oracle, make_truth_oracle

logger = logging.getLogger(__name__)

SEED_ENV = "CCQ_SEED"

CSV_COLUMNS = [
    "instance_id",
    "family",
    "noise",
    "algorithm",
    "params",
    "oracle",
    "trial_seed",
    "mistakes",
    "queries",
    "elapsed_ms",
    "error",
]

SUMMARY_COLUMNS = ["family", "noise", "algorithm", "params", "oracle", "runs", "failed", "mean_mistakes", "mean_queries"]

QUERY_ALGORITHMS = (AlgorithmName.QP, AlgorithmName.RQP)


def env_seed(default: Optional[int] = None) -> Optional[int]:
    """Seed from ``CCQ_SEED``, or ``default`` when the variable is unset."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}") from None
    if seed < 0:
        raise ConfigError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}")
    return seed


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a flat key-value mapping")
    if "seed" not in data:
        seed = env_seed()
        if seed is not None:
            data["seed"] = seed
    # relative file paths are resolved against the config's directory
    for key in ("graph", "weighted", "truth"):
        if isinstance(data.get(key), str) and not Path(data[key]).is_absolute():
            data[key] = str(path.parent / data[key])
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}:\n{e}") from e


def build_oracle(
    regime: OracleRegime,
    g: SignedGraph,
    truth: Optional[Clustering] = None,
    optimum: Optional[Clustering] = None,
    error_rate: float = 0.1,
    votes: int = 5,
    oracle_seed: int = 0,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Oracle:
    if regime == OracleRegime.OPT:
        return make_optimal_oracle(g, budget=budget, optimum=optimum)
    if truth is None:
        raise OracleError(f"The {regime.value} oracle needs a ground-truth clustering")
    if truth.n != g.n:
        raise GraphError(f"Truth covers {truth.n} vertices but the graph has {g.n}")
    if regime == OracleRegime.TRUTH:
        return make_truth_oracle(truth)
    spec = NoisyOracleSpec(base=truth, per_answer_error_rate=error_rate, votes=votes, seed=oracle_seed)
    return make_noisy_oracle(spec)


def run_algorithm(
    g: SignedGraph,
    algorithm: AlgorithmName,
    oracle: Optional[Oracle] = None,
    p: float = DEFAULT_P,
    seed: Optional[int] = None,
    budget: int = DEFAULT_NODE_BUDGET,
) -> RunOutcome:
    """Dispatch one run; ``mistakes`` in the outcome are always against the graph."""
    if algorithm == AlgorithmName.EXACT:
        result = solve_exact(g, budget=budget)
        return RunOutcome(clustering=result.clustering, queries=0, mistakes=result.cost)
    if algorithm == AlgorithmName.ACN:
        return acn_pivot(g, seed=seed)
    if oracle is None:
        raise OracleError(f"{algorithm.value} needs an oracle")
    if algorithm == AlgorithmName.QP:
        return query_pivot(g, oracle)
    return random_query_pivot(g, oracle, p, seed=seed)


def measure_mistakes(
    regime: OracleRegime, g: SignedGraph, clustering: Clustering, truth: Optional[Clustering]
) -> int:
    """Against the graph for the optimal oracle, against ground truth otherwise."""
    if regime == OracleRegime.OPT or truth is None:
        return count_disagreements(g, clustering)
    return count_pair_disagreements(clustering, truth)


class Instance(NamedTuple):
    instance_id: str
    family: str
    noise: str
    graph: SignedGraph
    truth: Optional[Clustering]
    optimum: Optional[Clustering] = None
    optimum_error: str = ""


class RunTask(NamedTuple):
    index: int
    instance: Instance
    algorithm: AlgorithmName
    algorithm_rank: int
    p: Optional[float]
    trial_seed: Optional[int]


def _needs_optimum(config: ExperimentConfig) -> bool:
    if AlgorithmName.EXACT in config.algorithms:
        return True
    return config.oracle == OracleRegime.OPT and any(a in QUERY_ALGORITHMS for a in config.algorithms)


def _with_optimum(instance: Instance, budget: int) -> Instance:
    try:
        optimum = solve_exact(instance.graph, budget=budget).clustering
    except CCQueryError as e:
        logger.warning("No exact optimum for %s: %s", instance.instance_id, e)
        return instance._replace(optimum_error=str(e))
    return instance._replace(optimum=optimum)


def prepare_instances(config: ExperimentConfig) -> list[Instance]:
    """Generate or load every instance of the config, with its optimum when some run needs it."""
    instances: list[Instance] = []
    if config.family is not None:
        for i in range(config.instances):
            seed = config.instance_seed + i
            try:
                family_spec = FamilySpec(family=config.family, n=config.n, sizes=config.sizes, seed=seed)
            except ValidationError as e:
                raise ConfigError(f"Invalid family settings:\n{e}") from e
            planted, truth = generate_planted(family_spec)
            noise_spec = NoiseSpec(model=config.noise, flip_budget=config.flip_budget, seed=seed)
            graph = apply_noise(planted, truth, noise_spec, family=config.family)
            instances.append(
                Instance(
                    instance_id=f"{config.family.value}+{config.noise.value}-{i}",
                    family=config.family.value,
                    noise=config.noise.value,
                    graph=graph,
                    truth=truth,
                )
            )
    else:
        source = config.graph if config.graph is not None else config.weighted
        graph = read_graph(source) if config.graph is not None else load_weighted_graph(source)
        truth = read_clustering(config.truth) if config.truth is not None else None
        if truth is not None and truth.n != graph.n:
            raise ConfigError(f"Truth {config.truth} covers {truth.n} vertices but {source} has {graph.n}")
        instances.append(Instance(instance_id=source.stem, family="file", noise="", graph=graph, truth=truth))

    if _needs_optimum(config):
        instances = [_with_optimum(inst, config.budget) for inst in instances]
    logger.info("Prepared %d instance(s)", len(instances))
    return instances


def plan_tasks(config: ExperimentConfig, instances: list[Instance]) -> list[RunTask]:
    """QP and the exact solver run once per instance unless the crowd is re-seeded per trial."""
    tasks: list[RunTask] = []
    trial_seeds = [config.seed + t for t in range(config.trials)]
    per_trial_oracle = config.oracle == OracleRegime.NOISY and config.resample_noise
    for index, instance in enumerate(instances):
        for rank, algorithm in enumerate(config.algorithms):
            if algorithm == AlgorithmName.RQP:
                for p in config.rqp_p:
                    tasks.extend(RunTask(index, instance, algorithm, rank, p, s) for s in trial_seeds)
            elif algorithm == AlgorithmName.ACN or (algorithm == AlgorithmName.QP and per_trial_oracle):
                tasks.extend(RunTask(index, instance, algorithm, rank, None, s) for s in trial_seeds)
            else:
                tasks.append(RunTask(index, instance, algorithm, rank, None, None))
    return tasks


def _params(task: RunTask) -> str:
    return f"p={task.p:g}" if task.p is not None else ""


def execute_task(task: RunTask, config: ExperimentConfig) -> RunResult:
    instance = task.instance
    row = dict(
        instance_id=instance.instance_id,
        family=instance.family,
        noise=instance.noise,
        algorithm=task.algorithm,
        params=_params(task),
        oracle=config.oracle,
        trial_seed=task.trial_seed,
    )
    start = time.perf_counter()
    try:
        oracle = None
        if task.algorithm in QUERY_ALGORITHMS:
            if config.oracle == OracleRegime.OPT and instance.optimum is None:
                raise OracleError(instance.optimum_error or "No optimal clustering available")
            oracle_seed = config.oracle_seed
            if config.resample_noise and task.trial_seed is not None:
                oracle_seed = task.trial_seed
            oracle = build_oracle(
                config.oracle,
                instance.graph,
                truth=instance.truth,
                optimum=instance.optimum,
                error_rate=config.error_rate,
                votes=config.votes,
                oracle_seed=oracle_seed,
                budget=config.budget,
            )
        if task.algorithm == AlgorithmName.EXACT and instance.optimum is None:
            raise OracleError(instance.optimum_error or "No optimal clustering available")
        if task.algorithm == AlgorithmName.EXACT:
            outcome = RunOutcome(
                clustering=instance.optimum,
                queries=0,
                mistakes=count_disagreements(instance.graph, instance.optimum),
            )
        else:
            outcome = run_algorithm(
                instance.graph,
                task.algorithm,
                oracle=oracle,
                p=task.p if task.p is not None else DEFAULT_P,
                seed=task.trial_seed,
                budget=config.budget,
            )
        mistakes = measure_mistakes(config.oracle, instance.graph, outcome.clustering, instance.truth)
    except CCQueryError as e:
        logger.warning("Run %s/%s failed: %s", instance.instance_id, task.algorithm.value, e)
        return RunResult(**row, elapsed_ms=(time.perf_counter() - start) * 1000, error=str(e))
    return RunResult(
        **row,
        mistakes=mistakes,
        queries=outcome.queries,
        elapsed_ms=(time.perf_counter() - start) * 1000,
    )


def _execute_packed(args: tuple[RunTask, ExperimentConfig]) -> tuple[RunTask, RunResult]:
    task, config = args
    return task, execute_task(task, config)


def _sort_key(item: tuple[RunTask, RunResult]):
    task, result = item
    return (task.index, task.algorithm_rank, task.p or 0.0, -1 if task.trial_seed is None else task.trial_seed)


def run_experiment(config: ExperimentConfig, instances: Optional[list[Instance]] = None) -> list[RunResult]:
    """Run the whole grid; rows come back ordered by (instance, algorithm, params, trial seed)."""
    if instances is None:
        instances = prepare_instances(config)
    tasks = plan_tasks(config, instances)
    logger.info("Running %d task(s) on %d worker(s)", len(tasks), config.workers)
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            done = list(pool.map(_execute_packed, [(t, config) for t in tasks]))
    else:
        done = [(t, execute_task(t, config)) for t in tasks]
    done.sort(key=_sort_key)
    return [result for _, result in done]


def summarize(rows: list[RunResult]) -> list[dict]:
    """Per-cell means over successful runs, cells in first-appearance order."""
    cells: dict[tuple, list[RunResult]] = defaultdict(list)
    for row in rows:
        key = (row.family, row.noise, row.algorithm.value, row.params, row.oracle.value)
        cells[key].append(row)
    summary = []
    for (family, noise, algorithm, params, oracle), members in cells.items():
        ok = [r for r in members if r.ok]
        summary.append(
            dict(
                family=family,
                noise=noise,
                algorithm=algorithm,
                params=params,
                oracle=oracle,
                runs=len(members),
                failed=len(members) - len(ok),
                mean_mistakes=f"{sum(r.mistakes for r in ok) / len(ok):.4f}" if ok else "",
                mean_queries=f"{sum(r.queries for r in ok) / len(ok):.4f}" if ok else "",
            )
        )
    return summary


def _cell(value) -> str:
    return "" if value is None else str(value)


def format_csv(rows: list[RunResult], with_summary: bool = True) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.instance_id,
                row.family,
                row.noise,
                row.algorithm.value,
                row.params,
                row.oracle.value,
                _cell(row.trial_seed),
                _cell(row.mistakes),
                _cell(row.queries),
                f"{row.elapsed_ms:.3f}",
                row.error,
            ]
        )
    if with_summary:
        out.write("\n")
        summary_writer = csv.DictWriter(out, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        summary_writer.writeheader()
        summary_writer.writerows(summarize(rows))
    return out.getvalue()


def write_csv(rows: list[RunResult], output: Optional[Path]) -> str:
    text = format_csv(rows)
    if output is not None:
        Path(output).write_text(text, encoding="utf-8")
        logger.info("Wrote %d row(s) to %s", len(rows), output)
    return text
