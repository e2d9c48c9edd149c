import json
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, root_validator, validator

from covlp.binpack import BinPackInstance
from covlp.explicit import ExplicitCoveringLp
from covlp.reference import ExplicitLp
from covlp.utils import md5_digest


class InstanceDocument(BaseModel):
    @property
    def digest(self) -> str:
        payload = json.dumps(self.dict(exclude_none=True), sort_keys=True)
        return md5_digest(payload)


class ExplicitLpDocument(InstanceDocument):
    """{"A": [[...]], "b": [...], "c": [...]} with floats or decimal strings."""

    A: List[List[float]]
    b: List[float]
    c: List[float]

    @validator("A")
    def rectangular(cls, A: List[List[float]]) -> List[List[float]]:
        if not A or not A[0]:
            raise ValueError("A must be a non-empty matrix")
        if any(len(row) != len(A[0]) for row in A):
            raise ValueError("A must be rectangular")
        if any(v < 0 for row in A for v in row):
            raise ValueError("A >= 0 is required")
        return A

    @validator("b")
    def positive_rhs(cls, b: List[float], values) -> List[float]:
        A = values.get("A")
        if A is not None and len(b) != len(A):
            raise ValueError(f"b has {len(b)} entries for {len(A)} rows of A")
        if any(v <= 0 for v in b):
            raise ValueError("b > 0 is required")
        return b

    @validator("c")
    def positive_costs(cls, c: List[float], values) -> List[float]:
        A = values.get("A")
        if A is not None and len(c) != len(A[0]):
            raise ValueError(f"c has {len(c)} entries for {len(A[0])} columns of A")
        if any(v <= 0 for v in c):
            raise ValueError("c > 0 is required")
        return c

    def to_covering_lp(self) -> ExplicitCoveringLp:
        return ExplicitCoveringLp(self.A, self.b, self.c)

    def to_exact_lp(self) -> ExplicitLp:
        return ExplicitLp.create(self.A, self.b, self.c)


class BinPackDocument(InstanceDocument):
    """{"sizes": [...], "multiplicities": [...]} or {"items": [...]}."""

    sizes: Optional[List[float]] = None
    multiplicities: Optional[List[int]] = None
    items: Optional[List[float]] = None

    @root_validator(skip_on_failure=True)
    def one_layout(cls, values):
        grouped = (
            values.get("sizes") is not None
            or values.get("multiplicities") is not None
        )
        if values.get("items") is not None:
            if grouped:
                raise ValueError("Give either items or sizes with multiplicities")
            if not values["items"]:
                raise ValueError("items must not be empty")
        elif values.get("sizes") is None or values.get("multiplicities") is None:
            raise ValueError("Both sizes and multiplicities are required")
        return values

    def to_instance(self) -> BinPackInstance:
        if self.items is not None:
            return BinPackInstance.from_items(self.items)
        return BinPackInstance(sizes=self.sizes, multiplicities=self.multiplicities)


class Parameters(BaseModel):
    eps: float
    eta: float
    q: float
    rho: float
    feas_tol: float
    max_calls: int
    oracle: str


class SolutionEntry(BaseModel):
    """A column index for explicit LPs or a count vector for bin packing."""

    column: Union[int, List[int]]
    weight: float


class Outcome(BaseModel):
    objective: float
    alpha: float
    beta: float
    mu: float
    support: int
    solution: List[SolutionEntry]


class Counters(BaseModel):
    index_find_calls: int
    column_calls: int
    cost_calls: int
    point_find_calls: int
    max_point_find_calls: int
    product_calls: int
    product_support: int
    improve_cover_calls: int
    max_improve_cover_calls: int
    frac_cover_calls: int
    binary_search_iterations: int
    steps: int


class Bounds(BaseModel):
    M: float
    M_basis: Literal["exact", "worst_case"]
    U: int
    improve_cover_per_run: int
    checks: Dict[str, bool]

    @property
    def satisfied(self) -> bool:
        return all(self.checks.values())


class Verification(BaseModel):
    r_star: float
    r_star_exact: str
    ratio: Optional[float] = None
    guarantee: float
    feasible: bool
    verdict: Literal["PASS", "FAIL"]
    failures: List[str] = []


class RunReport(BaseModel):
    command: str
    instance_digest: str
    parameters: Parameters
    outcome: Optional[Outcome] = None
    counters: Optional[Counters] = None
    bounds: Optional[Bounds] = None
    verification: Optional[Verification] = None
    error: Optional[str] = None
    wall_time_seconds: float = 0.0


class BenchRow(BaseModel):
    instance: str
    eps: float
    eta: float
    objective: float
    r_star: float
    ratio: float
    pointfind_calls: int
    U: int
    M: float
