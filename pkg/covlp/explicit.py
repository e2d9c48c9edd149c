"""Oracle suites over an explicitly stored covering matrix."""
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt
from loguru import logger

from covlp.exceptions import DomainViolation, InfeasibleLp
from covlp.oracles import CoveringOracleSuite
from covlp.vectors import DenseVec, dense_vec

EXACT_MODE = "exact"
DEGRADE_PREFIX = "degrade:"


def parse_eta_mode(eta_mode: str) -> Optional[float]:
    """None for the exact oracle, otherwise the eta of a degraded oracle.

    Examples
    --------
    >>> parse_eta_mode("exact") is None
    True
    >>> parse_eta_mode("degrade:0.5")
    0.5
    """
    if eta_mode == EXACT_MODE:
        return None
    if eta_mode.startswith(DEGRADE_PREFIX):
        try:
            eta = float(eta_mode[len(DEGRADE_PREFIX) :])
        except ValueError:
            raise DomainViolation(f"Unparseable eta mode: {eta_mode}")
        if not 0 < eta <= 1:
            raise DomainViolation(f"Degraded eta must lie in (0, 1], received {eta}")
        return eta
    raise DomainViolation(
        f"eta mode must be '{EXACT_MODE}' or '{DEGRADE_PREFIX}<eta>', received {eta_mode}"
    )


class ExplicitCoveringLp:
    """covLP(A, b, c) with A held as a dense m x N matrix.

    Columns are identified by their integer index.
    """

    def __init__(self, A: npt.ArrayLike, b: npt.ArrayLike, c: npt.ArrayLike):
        matrix = np.array(A, dtype=np.float64)
        if matrix.ndim != 2 or 0 in matrix.shape:
            raise DomainViolation(f"A must be a non-empty matrix, shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
            raise DomainViolation("A must be finite and satisfy A >= 0")
        matrix.setflags(write=False)
        self.A = matrix
        self.b = dense_vec(b, self.rows)
        self.c = dense_vec(c, self.columns)
        if np.any(self.b <= 0):
            raise DomainViolation(f"b > 0 is required, received {self.b.tolist()}")
        if np.any(self.c <= 0):
            raise DomainViolation(f"c > 0 is required, received {self.c.tolist()}")

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    @property
    def columns(self) -> int:
        return self.A.shape[1]

    def column(self, j: int) -> DenseVec:
        return self.A[:, j]

    def cost(self, j: int) -> float:
        return float(self.c[j])

    def scores(self, y: DenseVec) -> DenseVec:
        """D_j(y) = y^T A e_j / c_j for every column."""
        return (np.asarray(y) @ self.A) / self.c

    def index_find_exact(self, y: DenseVec) -> int:
        return int(np.argmax(self.scores(y)))

    def index_find_degraded(self, y: DenseVec, eta: float) -> int:
        """Worst column still within the eta promise, lowest index on ties."""
        scores = self.scores(y)
        admissible = np.flatnonzero(scores >= eta * np.max(scores))
        return int(admissible[np.argmin(scores[admissible])])

    def suite(
        self, eta_mode: str = EXACT_MODE, declared_eta: Optional[float] = None
    ) -> CoveringOracleSuite:
        """Oracle suite for the given eta mode.

        declared_eta overrides the eta the suite advertises, which lets
        verification runs exercise an oracle weaker than declared.
        """
        degrade = parse_eta_mode(eta_mode)
        if degrade is None:
            eta, index_find = 1.0, self.index_find_exact
        else:
            eta = degrade

            def index_find(y: DenseVec) -> int:
                return self.index_find_degraded(y, degrade)

        if declared_eta is not None:
            logger.warning(f"Declaring eta={declared_eta} for an eta={eta} oracle")
            eta = declared_eta
        return CoveringOracleSuite(
            rows=self.rows,
            column=self.column,
            cost=self.cost,
            index_find=index_find,
            eta=eta,
        )

    def check_rows(self):
        zero_rows = np.flatnonzero(~np.any(self.A > 0, axis=1))
        if zero_rows.size:
            raise InfeasibleLp(f"Rows {zero_rows.tolist()} of A are zero")

    def default_bounds(self) -> Tuple[float, float]:
        """Upper bound q on OPT and the matching width bound rho.

        q is the cheaper of two feasible points: sum_i b_i a_i / ||a_i||^2 over
        the rows a_i of A, and the point covering each row alone with its best
        cost ratio column.
        """
        self.check_rows()
        norms = np.sum(self.A**2, axis=1)
        projection = (self.b / norms) @ self.A
        with np.errstate(divide="ignore"):
            ratios = np.where(self.A > 0, self.c / self.A, np.inf)
        per_row = float(self.b @ np.min(ratios, axis=1))
        q = min(float(self.c @ projection), per_row)
        rho = q * float(np.max(self.A / np.outer(self.b, self.c)))
        return q, rho

    def lower_bound(self) -> float:
        """max_i b_i min_j c_j / A[i, j], a lower bound on OPT."""
        self.check_rows()
        with np.errstate(divide="ignore"):
            ratios = np.where(self.A > 0, self.c / self.A, np.inf)
        return float(np.max(self.b * np.min(ratios, axis=1)))
