from fastapi import FastAPI, HTTPException, status
from pydantic import ValidationError
from models import (
    AlgorithmMenu,
    AlgorithmName,
    Family,
    InstanceRequest,
    InstanceResponse,
    NoiseModel,
    OracleRegime,
    RunRecord,
    RunRequest,
)
from datagen import apply_noise, generate_planted, resolve_flip_budget
from errors import BudgetExceededError, CCQueryError
from experiment import build_oracle, measure_mistakes, run_algorithm
from graph import Clustering, build_graph, count_disagreements
import logging
import time
import uuid
from datetime import datetime
from typing import Dict, List
import uvicorn

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Correlation Clustering Query API",
    description="Pivot-based correlation clustering with same-cluster queries",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc"
)

# In-memory run store
runs_db: Dict[str, RunRecord] = {}


def solve_request(request: RunRequest) -> RunRecord:
    """Build the graph and oracle for a request and run the chosen algorithm."""
    graph = build_graph(request.graph.n, request.graph.plus_edges)
    truth = Clustering(assignment=tuple(request.truth)) if request.truth is not None else None

    start = time.perf_counter()
    oracle = None
    if request.algorithm in (AlgorithmName.QP, AlgorithmName.RQP):
        oracle = build_oracle(
            request.oracle,
            graph,
            truth=truth,
            error_rate=request.error_rate,
            votes=request.votes,
            oracle_seed=request.seed or 0,
            budget=request.budget,
        )
    outcome = run_algorithm(
        graph, request.algorithm, oracle=oracle, p=request.p, seed=request.seed, budget=request.budget
    )
    elapsed_ms = (time.perf_counter() - start) * 1000

    return RunRecord(
        run_id=str(uuid.uuid4()),
        algorithm=request.algorithm,
        oracle=request.oracle,
        n=graph.n,
        assignment=list(outcome.clustering.assignment),
        num_clusters=outcome.clustering.num_clusters,
        mistakes=measure_mistakes(request.oracle, graph, outcome.clustering, truth),
        graph_mistakes=count_disagreements(graph, outcome.clustering),
        queries=outcome.queries,
        seed=outcome.seed,
        p=request.p if request.algorithm == AlgorithmName.RQP else None,
        elapsed_ms=round(elapsed_ms, 3),
        created_at=datetime.now(),
    )


@app.get("/", tags=["General"])
async def root():
    """Welcome message for the clustering API."""
    return {
        "message": "Correlation clustering with same-cluster queries",
        "docs": "/docs",
        "algorithms": "/algorithms"
    }


@app.get("/algorithms", response_model=AlgorithmMenu, tags=["Algorithms"])
async def get_algorithms():
    """List algorithms, oracle regimes, instance families and noise models."""
    return AlgorithmMenu(
        algorithms=[a.value for a in AlgorithmName],
        oracle_regimes=[r.value for r in OracleRegime],
        families=[f.value for f in Family],
        noise_models=[m.value for m in NoiseModel],
    )


@app.post("/runs", response_model=RunRecord, status_code=status.HTTP_201_CREATED, tags=["Runs"])
async def create_run(request: RunRequest):
    """Solve a posted instance and keep the run."""
    try:
        record = solve_request(request)
    except BudgetExceededError as e:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Exact solve failed: {e}"
        )
    except (CCQueryError, ValidationError, ValueError) as e:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Error running {request.algorithm.value}: {e}"
        )
    runs_db[record.run_id] = record
    logger.info("Run %s: %s on n=%d, %d mistakes", record.run_id, record.algorithm.value, record.n, record.mistakes)
    return record


@app.get("/runs", response_model=List[RunRecord], tags=["Runs"])
async def get_all_runs():
    """Get all stored runs."""
    return list(runs_db.values())


@app.get("/runs/{run_id}", response_model=RunRecord, tags=["Runs"])
async def get_run(run_id: str):
    """Get a specific run by ID."""
    if run_id not in runs_db:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run {run_id} not found"
        )
    return runs_db[run_id]


@app.delete("/runs/{run_id}", tags=["Runs"])
async def delete_run(run_id: str):
    """Forget a stored run."""
    if run_id not in runs_db:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run {run_id} not found"
        )
    del runs_db[run_id]
    return {"message": f"Run {run_id} has been deleted"}


@app.post("/instances", response_model=InstanceResponse, tags=["Instances"])
async def create_instance(request: InstanceRequest):
    """Generate a planted instance with its ground truth."""
    try:
        planted, truth = generate_planted(request.family)
        graph = apply_noise(planted, truth, request.noise, family=request.family.family)
    except CCQueryError as e:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Error generating instance: {e}"
        )
    flips = 0
    if request.noise.model != NoiseModel.NONE:
        flips = resolve_flip_budget(request.noise, graph.n, request.family.family)
    return InstanceResponse(
        n=graph.n,
        plus_edges=graph.plus_edges(),
        truth=list(truth.assignment),
        cluster_sizes=truth.sizes(),
        flip_budget=flips,
    )


@app.get("/health", tags=["General"])
async def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "timestamp": datetime.now().isoformat(),
        "total_runs": len(runs_db)
    }


if __name__ == "__main__":
    uvicorn.run("main:app", host="0.0.0.0", port=8000, reload=True)
