from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Noise constants for the synthetic families
ELL1 = 0.01
ELL2 = 0.1
SMALL_FLIP_BUDGET = 100

DEFAULT_NODE_BUDGET = 10_000_000
EXHAUSTIVE_LIMIT = 12

DEFAULT_TRIALS = 3
DEFAULT_P = 0.25


class Family(str, Enum):
    N = "N"
    S = "S"
    D = "D"
    SKEW = "skew"
    SQRTN = "sqrtn"
    EXPLICIT = "explicit"


SMALL_FAMILIES = (Family.N, Family.S, Family.D, Family.EXPLICIT)
LARGE_FAMILIES = (Family.SKEW, Family.SQRTN)


class NoiseModel(str, Enum):
    NONE = "none"
    I = "I"
    II = "II"
    III = "III"


class AlgorithmName(str, Enum):
    QP = "qp"
    RQP = "rqp"
    ACN = "acn"
    EXACT = "exact"


class OracleRegime(str, Enum):
    OPT = "opt"
    TRUTH = "truth"
    NOISY = "noisy"


def _check_votes(v: int) -> int:
    if v < 1 or v % 2 == 0:
        raise ValueError("votes must be an odd positive integer")
    return v


class FamilySpec(BaseModel):
    family: Family = Field(..., description="Cluster-size family")
    n: Optional[int] = Field(None, gt=0, description="Vertex count for skew/sqrtn")
    sizes: Optional[list[int]] = Field(None, description="Cluster sizes for the explicit family")
    normal_count: int = Field(10, gt=0, description="Number of Normal-sized cliques (N)")
    normal_mean: float = Field(8.0, description="Mean clique size (N)")
    normal_sd: float = Field(2.0, ge=0, description="Clique size standard deviation (N)")
    normal_min_size: int = Field(2, ge=1, description="Draws below this are resampled (N)")
    dirichlet_alpha: tuple[float, ...] = Field((3.0, 1.0, 1.0), description="Concentration vector (D)")
    dirichlet_total: int = Field(100, gt=0, description="Total vertices split by the Dirichlet draw (D)")
    seed: int = Field(0, ge=0, description="Seed for size draws")

    @field_validator("sizes")
    @classmethod
    def validate_sizes(cls, v):
        if v is not None and any(s <= 0 for s in v):
            raise ValueError("Cluster sizes must be positive integers")
        return v

    @field_validator("dirichlet_alpha")
    @classmethod
    def validate_alpha(cls, v):
        if not v or any(a <= 0 for a in v):
            raise ValueError("Dirichlet concentrations must be positive")
        return v

    @model_validator(mode="after")
    def validate_family_fields(self):
        if self.family == Family.EXPLICIT and not self.sizes:
            raise ValueError("The explicit family needs a non-empty sizes list")
        if self.family == Family.D and self.dirichlet_total < len(self.dirichlet_alpha):
            raise ValueError("dirichlet_total must allow at least one vertex per cluster")
        return self


class NoiseSpec(BaseModel):
    model: NoiseModel = Field(NoiseModel.I, description="Noise model")
    flip_budget: Optional[int] = Field(None, ge=0, description="L; defaults per family when omitted")
    ell1: float = Field(ELL1, ge=0, le=1, description="Inter-clique flip fraction (model III)")
    ell2: float = Field(ELL2, ge=0, le=1, description="Fraction of all pairs used as L on large families")
    seed: int = Field(0, ge=0, description="Seed for flip sampling")


class RunResult(BaseModel):
    """One row of an experiment or a single solve."""

    instance_id: str
    family: str = ""
    noise: str = ""
    algorithm: AlgorithmName
    params: str = ""
    oracle: OracleRegime
    trial_seed: Optional[int] = None
    mistakes: Optional[int] = None
    queries: Optional[int] = None
    elapsed_ms: float = 0.0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


class ExperimentConfig(BaseModel):
    """Flat experiment description; keys mirror the YAML config file."""

    model_config = ConfigDict(extra="forbid")

    family: Optional[Family] = Field(None, description="Synthetic family to generate")
    n: Optional[int] = Field(None, gt=0, description="Vertex count for skew/sqrtn")
    sizes: Optional[list[int]] = Field(None, description="Sizes for the explicit family")
    noise: NoiseModel = Field(NoiseModel.NONE, description="Noise model applied to generated instances")
    flip_budget: Optional[int] = Field(None, ge=0, description="L for the noise model")
    instances: int = Field(1, gt=0, description="Number of generated instances")
    instance_seed: int = Field(0, ge=0, description="Seed of the first generated instance")

    graph: Optional[Path] = Field(None, description="Signed-graph file instead of a generated family")
    weighted: Optional[Path] = Field(None, description="Weighted file, thresholded at 1/2")
    truth: Optional[Path] = Field(None, description="Ground-truth clustering file")

    algorithms: list[AlgorithmName] = Field(..., description="Algorithms to run")
    rqp_p: list[float] = Field([DEFAULT_P], description="Engagement probabilities for rqp")
    trials: int = Field(DEFAULT_TRIALS, gt=0, description="Seeds per randomized cell")
    seed: int = Field(0, ge=0, description="First trial seed")

    oracle: OracleRegime = Field(OracleRegime.OPT, description="Oracle regime")
    error_rate: float = Field(0.1, ge=0, le=1, description="Per-answer flip probability (noisy)")
    votes: int = Field(5, description="Annotators per question (noisy)")
    oracle_seed: int = Field(0, ge=0, description="Crowd seed when noise is not resampled")
    resample_noise: bool = Field(False, description="Re-seed the crowd per trial")

    budget: int = Field(DEFAULT_NODE_BUDGET, gt=0, description="Exact solver node budget")
    workers: int = Field(1, gt=0, description="Worker processes")
    output: Optional[Path] = Field(None, description="CSV output path; stdout when omitted")

    @field_validator("algorithms")
    @classmethod
    def validate_algorithms(cls, v):
        if not v:
            raise ValueError("At least one algorithm is required")
        return v

    @field_validator("rqp_p")
    @classmethod
    def validate_rqp_p(cls, v):
        if not v:
            raise ValueError("rqp_p needs at least one probability")
        for p in v:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"rqp probability {p} is outside [0, 1]")
        return v

    @field_validator("votes")
    @classmethod
    def validate_votes(cls, v):
        return _check_votes(v)

    @model_validator(mode="after")
    def validate_source(self):
        sources = [s for s in (self.family, self.graph, self.weighted) if s is not None]
        if len(sources) != 1:
            raise ValueError("Exactly one of family, graph or weighted must be given")
        if self.family is None and self.oracle != OracleRegime.OPT and self.truth is None:
            raise ValueError(f"The {self.oracle.value} oracle needs a truth clustering file")
        return self


# HTTP payloads

class GraphPayload(BaseModel):
    n: int = Field(..., ge=0, description="Vertex count")
    plus_edges: list[tuple[int, int]] = Field(default=[], description="Unordered + edges; the rest are -")


class RunRequest(BaseModel):
    graph: GraphPayload
    algorithm: AlgorithmName = Field(..., description="Algorithm to run")
    oracle: OracleRegime = Field(OracleRegime.OPT, description="Oracle regime")
    truth: Optional[list[int]] = Field(None, description="Ground-truth assignment for truth/noisy oracles")
    p: float = Field(DEFAULT_P, ge=0, le=1, description="Engagement probability for rqp")
    seed: Optional[int] = Field(None, ge=0, description="Run seed; fresh entropy when omitted")
    error_rate: float = Field(0.1, ge=0, le=1, description="Per-answer flip probability (noisy)")
    votes: int = Field(5, description="Annotators per question (noisy)")
    budget: int = Field(DEFAULT_NODE_BUDGET, gt=0, description="Exact solver node budget")

    @field_validator("votes")
    @classmethod
    def validate_votes(cls, v):
        return _check_votes(v)


class RunRecord(BaseModel):
    run_id: str = Field(..., description="Unique run identifier")
    algorithm: AlgorithmName
    oracle: OracleRegime
    n: int
    assignment: list[int] = Field(..., description="Canonical cluster id per vertex")
    num_clusters: int
    mistakes: int = Field(..., description="Disagreements under the oracle regime's convention")
    graph_mistakes: int = Field(..., description="Disagreements with the graph labels")
    queries: int
    seed: Optional[int] = None
    p: Optional[float] = None
    elapsed_ms: float
    created_at: datetime


class InstanceRequest(BaseModel):
    family: FamilySpec
    noise: NoiseSpec = Field(default_factory=lambda: NoiseSpec(model=NoiseModel.NONE))


class InstanceResponse(BaseModel):
    n: int
    plus_edges: list[tuple[int, int]]
    truth: list[int]
    cluster_sizes: list[int]
    flip_budget: int


class AlgorithmMenu(BaseModel):
    algorithms: list[str]
    oracle_regimes: list[str]
    families: list[str]
    noise_models: list[str]
    default_p: float = DEFAULT_P
    default_budget: int = DEFAULT_NODE_BUDGET
    exhaustive_limit: int = EXHAUSTIVE_LIMIT
