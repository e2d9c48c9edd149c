from importlib.metadata import PackageNotFoundError, version

from covlp.binpack import (
    BinPackInstance,
    Configuration,
    KnapsackKind,
    config_lp_oracles,
    knapsack_oracle_factory,
    solve_binpack_lp,
)
from covlp.cov_lp import CovLpResult, cov_lp_solve, frac_cov_2
from covlp.frac_cover import FcovResult, frac_cover
from covlp.oracles import CoveringOracleSuite, FcovOracleSuite
from covlp.params import SolveParams, bound_M, bound_U, derived_params
from covlp.vectors import SparseVec

try:
    __version__ = version("covlp")
except PackageNotFoundError:
    __version__ = "0.0.0"
