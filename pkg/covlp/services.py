"""
Application services behind each CLI command.

Each service parses an instance file, builds the oracle suite and solver
parameters for it, runs the solve and assembles a RunReport.
"""
import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Callable, List, Optional, Sequence, TextIO, Union

import numpy as np
from loguru import logger

from covlp.binpack import (
    BinPackInstance,
    Configuration,
    KnapsackKind,
    config_lp_oracles,
    default_bounds,
    knapsack_oracle_factory,
)
from covlp.config import config_from_env
from covlp.cov_lp import CovLpResult, cov_lp_solve
from covlp.dtos import (
    BenchRow,
    BinPackDocument,
    Bounds,
    Counters,
    ExplicitLpDocument,
    InstanceDocument,
    Outcome,
    Parameters,
    RunReport,
    SolutionEntry,
    Verification,
)
from covlp.exceptions import DomainViolation, SolverContractError
from covlp.explicit import EXACT_MODE
from covlp.oracles import CoveringOracleSuite
from covlp.params import SolveParams, bound_M, bound_U, improve_cover_invocation_bound
from covlp.reference import configuration_lp, exact_lp_solve
from covlp.utils import stopwatch
from covlp.vectors import ColumnId, DenseVec, SparseVec

ColumnLabel = Union[int, List[int]]


def load_json(path: Path) -> dict:
    with open(path, "r") as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise DomainViolation(f"Malformed JSON in {path}: {e}")
    if not isinstance(payload, dict):
        raise DomainViolation(f"Expected a JSON object in {path}")
    return payload


def load_instance(path: Path) -> InstanceDocument:
    """Explicit LP when the document has an "A" matrix, bin packing otherwise."""
    payload = load_json(path)
    if "A" in payload:
        return ExplicitLpDocument(**payload)
    return BinPackDocument(**payload)


@dataclass
class PreparedSolve:
    """Oracle suite, parameters and instance-specific helpers for one solve."""

    command: str
    document: InstanceDocument
    covering: CoveringOracleSuite
    b: DenseVec
    params: SolveParams
    oracle: str
    r_lower: float
    label: Callable[[ColumnId], ColumnLabel]
    coverage: Callable[[SparseVec], DenseVec]
    reference: Callable[[], Fraction]

    @property
    def parameters(self) -> Parameters:
        return Parameters(
            eps=self.params.eps,
            eta=self.params.eta,
            q=self.params.q,
            rho=self.params.rho,
            feas_tol=self.params.feas_tol,
            max_calls=self.params.call_cap(self.covering.rows),
            oracle=self.oracle,
        )


def _feas_tol(feas_tol: Optional[float]) -> float:
    return config_from_env.COVLP_FEAS_TOL if feas_tol is None else feas_tol


def prepare_explicit(
    document: ExplicitLpDocument,
    eps: float,
    eta_mode: str = EXACT_MODE,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    declare_eta: Optional[float] = None,
    debug: bool = False,
    command: str = "covlp-solve",
) -> PreparedSolve:
    lp = document.to_covering_lp()
    covering = lp.suite(eta_mode, declared_eta=declare_eta)
    q, rho = lp.default_bounds()
    params = SolveParams(
        eps=eps,
        eta=covering.eta,
        q=q,
        rho=rho,
        max_oracle_calls=max_calls,
        feas_tol=_feas_tol(feas_tol),
        debug=debug,
    )

    def coverage(x: SparseVec) -> DenseVec:
        dense = np.zeros(lp.columns)
        for j, weight in x.items():
            dense[j] = weight
        return lp.A @ dense

    return PreparedSolve(
        command=command,
        document=document,
        covering=covering,
        b=lp.b,
        params=params,
        oracle=eta_mode,
        r_lower=lp.lower_bound(),
        label=int,
        coverage=coverage,
        reference=lambda: exact_lp_solve(document.to_exact_lp()).r_star,
    )


def prepare_binpack(
    document: BinPackDocument,
    eps: float,
    oracle: KnapsackKind = KnapsackKind.EXACT,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    debug: bool = False,
    command: str = "binpack-solve",
) -> PreparedSolve:
    instance: BinPackInstance = document.to_instance()
    knapsack = knapsack_oracle_factory(oracle, instance, _feas_tol(feas_tol))
    q, rho = default_bounds(instance)
    params = SolveParams(
        eps=eps,
        eta=knapsack.eta,
        q=q,
        rho=rho,
        max_oracle_calls=max_calls,
        feas_tol=_feas_tol(feas_tol),
        debug=debug,
    )

    def label(configuration: ColumnId) -> ColumnLabel:
        assert isinstance(configuration, Configuration)
        return list(configuration.counts)

    def coverage(x: SparseVec) -> DenseVec:
        total = np.zeros(instance.m)
        for configuration, weight in x.items():
            total += weight * np.asarray(configuration.counts, dtype=np.float64)
        return total

    def reference() -> Fraction:
        _, lp = configuration_lp(instance, feas_tol=_feas_tol(feas_tol))
        return exact_lp_solve(lp).r_star

    return PreparedSolve(
        command=command,
        document=document,
        covering=config_lp_oracles(instance, knapsack),
        b=instance.b,
        params=params,
        oracle=KnapsackKind(oracle).value,
        r_lower=1.0,
        label=label,
        coverage=coverage,
        reference=reference,
    )


def prepare(
    document: InstanceDocument,
    eps: float,
    oracle: KnapsackKind = KnapsackKind.EXACT,
    eta_mode: str = EXACT_MODE,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    declare_eta: Optional[float] = None,
    command: str = "verify",
) -> PreparedSolve:
    if isinstance(document, ExplicitLpDocument):
        return prepare_explicit(
            document,
            eps,
            eta_mode,
            feas_tol=feas_tol,
            max_calls=max_calls,
            declare_eta=declare_eta,
            command=command,
        )
    assert isinstance(document, BinPackDocument)
    return prepare_binpack(
        document, eps, oracle, feas_tol=feas_tol, max_calls=max_calls, command=command
    )


def _outcome(prepared: PreparedSolve, result: CovLpResult) -> Outcome:
    entries = [
        SolutionEntry(column=prepared.label(column), weight=weight)
        for column, weight in result.x_feasible.items()
    ]
    if isinstance(prepared.document, ExplicitLpDocument):
        entries.sort(key=lambda e: e.column)
    else:
        entries.sort(key=lambda e: Configuration(tuple(e.column)).sort_key)
    return Outcome(
        objective=result.objective,
        alpha=result.alpha,
        beta=result.beta,
        mu=result.mu,
        support=result.support,
        solution=entries,
    )


def _counters(result: CovLpResult) -> Counters:
    stats = result.stats
    return Counters(
        index_find_calls=result.counters.index_find,
        column_calls=result.counters.column,
        cost_calls=result.counters.cost,
        point_find_calls=stats.point_find_calls,
        max_point_find_calls=stats.max_point_find_calls,
        product_calls=stats.product_calls,
        product_support=stats.product_support,
        improve_cover_calls=stats.improve_cover_calls,
        max_improve_cover_calls=stats.max_improve_cover_calls,
        frac_cover_calls=stats.frac_cover_calls,
        binary_search_iterations=stats.binary_search_iterations,
        steps=stats.steps,
    )


def _bounds(
    prepared: PreparedSolve, result: CovLpResult, r_star: Optional[float] = None
) -> Bounds:
    params = prepared.params
    m = prepared.covering.rows
    basis = "exact" if r_star is not None else "worst_case"
    r_bound = r_star if r_star is not None else prepared.r_lower
    M = bound_M(params.eps, params.eta, params.q, min(r_bound, params.q))
    U = bound_U(m, params.rho, params.eps, params.eta)
    per_run = improve_cover_invocation_bound(m, params.eta)
    counters = _counters(result)
    checks = {
        "frac_cover_calls_within_M": counters.frac_cover_calls <= M,
        "point_find_calls_per_run_within_U": counters.max_point_find_calls <= U,
        "improve_cover_calls_per_run_within_lg": counters.max_improve_cover_calls
        <= per_run,
        "index_find_calls_within_MU": counters.index_find_calls <= M * U,
        "support_within_point_find_calls": result.support
        <= counters.max_point_find_calls,
        "index_find_matches_point_find": counters.index_find_calls
        == counters.point_find_calls,
        "cost_matches_index_find": counters.cost_calls == counters.index_find_calls,
        "column_matches_product_support": counters.column_calls
        == counters.product_support,
    }
    for name, passed in checks.items():
        if not passed:
            logger.warning(f"Bound check failed: {name}")
    return Bounds(M=M, M_basis=basis, U=U, improve_cover_per_run=per_run, checks=checks)


def run_solve(prepared: PreparedSolve) -> RunReport:
    """Solve and report. Solver contract errors propagate to the caller."""
    with stopwatch(prepared.command) as watch:
        result = cov_lp_solve(prepared.covering, prepared.b, prepared.params)
    logger.success(
        f"Objective {result.objective:.6g} with {result.support} columns"
        f" in {watch.seconds:.3f} s"
    )
    return RunReport(
        command=prepared.command,
        instance_digest=prepared.document.digest,
        parameters=prepared.parameters,
        outcome=_outcome(prepared, result),
        counters=_counters(result),
        bounds=_bounds(prepared, result),
        wall_time_seconds=watch.seconds,
    )


def solve_covlp(
    path: Path,
    eps: float,
    eta_mode: str = EXACT_MODE,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    declare_eta: Optional[float] = None,
) -> RunReport:
    document = ExplicitLpDocument(**load_json(path))
    logger.info(f"Solving explicit covering LP from: {path}")
    prepared = prepare_explicit(
        document, eps, eta_mode, feas_tol, max_calls, declare_eta=declare_eta
    )
    return run_solve(prepared)


def solve_binpack(
    path: Path,
    eps: float,
    oracle: KnapsackKind = KnapsackKind.EXACT,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
) -> RunReport:
    document = BinPackDocument(**load_json(path))
    logger.info(f"Solving configuration LP from: {path}")
    prepared = prepare_binpack(document, eps, oracle, feas_tol, max_calls)
    return run_solve(prepared)


def _verification(
    prepared: PreparedSolve, r_star: Fraction, result: Optional[CovLpResult]
) -> Verification:
    params = prepared.params
    guarantee = (1 + params.eps + params.eps**2) / params.eta * float(r_star)
    failures = []
    feasible = False
    ratio = None
    if result is not None:
        tol = max(params.feas_tol, 1e-9)
        coverage = prepared.coverage(result.x_feasible)
        feasible = bool(np.all(coverage >= prepared.b * (1 - tol)))
        ratio = result.objective / float(r_star)
        if not feasible:
            failures.append("solution does not cover b")
        if result.objective > guarantee + params.feas_tol:
            failures.append(
                f"objective {result.objective} exceeds guarantee {guarantee}"
            )
    else:
        failures.append("solver aborted")
    return Verification(
        r_star=float(r_star),
        r_star_exact=str(r_star),
        ratio=ratio,
        guarantee=guarantee,
        feasible=feasible,
        verdict="FAIL" if failures else "PASS",
        failures=failures,
    )


def verify(
    path: Path,
    eps: float,
    oracle: KnapsackKind = KnapsackKind.EXACT,
    eta_mode: str = EXACT_MODE,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    declare_eta: Optional[float] = None,
) -> RunReport:
    """Solve, then compare against the exact optimum.

    Solver contract errors become a FAIL verdict instead of propagating.
    """
    document = load_instance(path)
    prepared = prepare(
        document, eps, oracle, eta_mode, feas_tol, max_calls, declare_eta
    )
    r_star = prepared.reference()
    logger.info(f"Exact optimum r*={r_star}")

    result = None
    error = None
    with stopwatch(prepared.command) as watch:
        try:
            result = cov_lp_solve(prepared.covering, prepared.b, prepared.params)
        except SolverContractError as e:
            logger.exception(e)
            error = f"{type(e).__name__}: {e}"

    verification = _verification(prepared, r_star, result)
    outcome: Optional[Outcome] = None
    counters: Optional[Counters] = None
    bounds: Optional[Bounds] = None
    if result is not None:
        bounds = _bounds(prepared, result, float(r_star))
        if not bounds.satisfied:
            verification.failures.append("counter exceeded a bound")
            verification.verdict = "FAIL"
        outcome = _outcome(prepared, result)
        counters = _counters(result)
    if verification.verdict == "PASS":
        logger.success(f"PASS with ratio {verification.ratio:.6g}")
    else:
        logger.warning(f"FAIL: {verification.failures}")
    return RunReport(
        command=prepared.command,
        instance_digest=document.digest,
        parameters=prepared.parameters,
        outcome=outcome,
        counters=counters,
        bounds=bounds,
        verification=verification,
        error=error,
        wall_time_seconds=watch.seconds,
    )


def bench(
    paths: Sequence[Path],
    eps_values: Sequence[float],
    oracles: Sequence[KnapsackKind] = (KnapsackKind.EXACT,),
    eta_modes: Sequence[str] = (EXACT_MODE,),
    feas_tol: Optional[float] = None,
) -> List[BenchRow]:
    """Sweep eps and oracle choices over instance files.

    Explicit LPs sweep eta_modes, bin packing instances sweep oracles.
    """
    rows = []
    for path in paths:
        document = load_instance(path)
        if isinstance(document, ExplicitLpDocument):
            choices = [
                partial(prepare_explicit, document, eta_mode=mode, command="bench")
                for mode in eta_modes
            ]
        else:
            choices = [
                partial(prepare_binpack, document, oracle=kind, command="bench")
                for kind in oracles
            ]
        r_star = None
        for choose in choices:
            for eps in eps_values:
                prepared = choose(eps, feas_tol=feas_tol)
                if r_star is None:
                    r_star = prepared.reference()
                result = cov_lp_solve(prepared.covering, prepared.b, prepared.params)
                bounds = _bounds(prepared, result, float(r_star))
                rows.append(
                    BenchRow(
                        instance=path.name,
                        eps=eps,
                        eta=prepared.params.eta,
                        objective=result.objective,
                        r_star=float(r_star),
                        ratio=result.objective / float(r_star),
                        pointfind_calls=result.stats.point_find_calls,
                        U=bounds.U,
                        M=bounds.M,
                    )
                )
                logger.info(
                    f"{path.name} eps={eps} oracle={prepared.oracle}:"
                    f" ratio {rows[-1].ratio:.4f}"
                )
    return rows


def write_bench_csv(rows: Sequence[BenchRow], stream: TextIO):
    writer = csv.DictWriter(stream, fieldnames=list(BenchRow.__fields__))
    writer.writeheader()
    for row in rows:
        writer.writerow(row.dict())
