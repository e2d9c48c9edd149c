"""
Entrypoint to covlp command.

This module is just a thin wrapper that parses CLI arguments and calls out to
application services defined in covlp.services. Reports go to standard output
as JSON, logs go to standard error.
"""
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import typer
from loguru import logger
from pydantic import ValidationError

from covlp import services
from covlp.binpack import KnapsackKind
from covlp.config import config_from_env
from covlp.exceptions import (
    CapExceeded,
    DomainViolation,
    InfeasibleLp,
    SolverContractError,
)
from covlp.explicit import EXACT_MODE

EXIT_INPUT_ERROR = 1
EXIT_VERIFY_FAIL = 3

app = typer.Typer()

EPS_OPTION = typer.Option(0.5, "--eps", min=0, max=1, help="Accuracy in (0, 1].")
FEAS_TOL_OPTION = typer.Option(
    config_from_env.COVLP_FEAS_TOL, "--feas-tol", help="Relative feasibility tolerance."
)
MAX_CALLS_OPTION = typer.Option(
    None,
    "--max-calls",
    help="Point-find cap per frac-cover run (default 10 x U or COVLP_MAX_CALLS).",
)
ETA_MODE_OPTION = typer.Option(
    EXACT_MODE, "--eta-mode", help="'exact' or 'degrade:<eta>' for explicit LPs."
)
ORACLE_OPTION = typer.Option(KnapsackKind.EXACT, "--oracle", help="Knapsack oracle.")
DECLARE_ETA_OPTION = typer.Option(None, "--declare-eta", hidden=True)


@contextmanager
def input_errors() -> Iterator[None]:
    """Exit 1 with a diagnostic on standard error for bad input."""
    try:
        yield
    except (
        ValidationError,
        DomainViolation,
        CapExceeded,
        InfeasibleLp,
        OSError,
        SolverContractError,
    ) as e:
        logger.exception(e)
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=EXIT_INPUT_ERROR)


@app.command("covlp-solve")
def covlp_solve(
    path: Path = typer.Argument(..., help="Explicit LP JSON with A, b and c."),
    eps: float = EPS_OPTION,
    eta_mode: str = ETA_MODE_OPTION,
    feas_tol: float = FEAS_TOL_OPTION,
    max_calls: Optional[int] = MAX_CALLS_OPTION,
    declare_eta: Optional[float] = DECLARE_ETA_OPTION,
):
    """Approximately solve an explicit covering LP."""
    with input_errors():
        report = services.solve_covlp(
            path, eps, eta_mode, feas_tol, max_calls, declare_eta=declare_eta
        )
    typer.echo(report.json(indent=2))


@app.command("binpack-solve")
def binpack_solve(
    path: Path = typer.Argument(..., help="Bin packing JSON with sizes or items."),
    eps: float = EPS_OPTION,
    oracle: KnapsackKind = ORACLE_OPTION,
    feas_tol: float = FEAS_TOL_OPTION,
    max_calls: Optional[int] = MAX_CALLS_OPTION,
):
    """Approximately solve the configuration LP of a bin packing instance."""
    with input_errors():
        report = services.solve_binpack(path, eps, oracle, feas_tol, max_calls)
    typer.echo(report.json(indent=2))


@app.command()
def verify(
    path: Path = typer.Argument(..., help="Explicit LP or bin packing JSON."),
    eps: float = EPS_OPTION,
    oracle: KnapsackKind = ORACLE_OPTION,
    eta_mode: str = ETA_MODE_OPTION,
    feas_tol: float = FEAS_TOL_OPTION,
    max_calls: Optional[int] = MAX_CALLS_OPTION,
    declare_eta: Optional[float] = DECLARE_ETA_OPTION,
):
    """Solve and check the result against the exact rational optimum.

    Exits 0 on PASS and 3 on FAIL.
    """
    with input_errors():
        report = services.verify(
            path, eps, oracle, eta_mode, feas_tol, max_calls, declare_eta
        )
    typer.echo(report.json(indent=2))
    assert report.verification is not None
    if report.verification.verdict != "PASS":
        raise typer.Exit(code=EXIT_VERIFY_FAIL)


@app.command()
def bench(
    paths: List[Path] = typer.Argument(..., help="Instance files to sweep."),
    eps: List[float] = typer.Option([1.0, 0.5], "--eps", help="Accuracies to sweep."),
    oracle: List[KnapsackKind] = typer.Option(
        [KnapsackKind.EXACT], "--oracle", help="Knapsack oracles for bin packing."
    ),
    eta_mode: List[str] = typer.Option(
        [EXACT_MODE], "--eta-mode", help="Eta modes for explicit LPs."
    ),
    feas_tol: float = FEAS_TOL_OPTION,
    output: Optional[Path] = typer.Option(None, "--output", help="CSV destination."),
):
    """Sweep eps and oracles over instances and write CSV."""
    with input_errors():
        rows = services.bench(paths, eps, oracle, eta_mode, feas_tol)
        if output is None:
            services.write_bench_csv(rows, sys.stdout)
        else:
            with open(output, "w", newline="") as f:
                services.write_bench_csv(rows, f)


if __name__ == "__main__":
    app()
