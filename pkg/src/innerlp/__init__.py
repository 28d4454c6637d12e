"""Interior-point LP solver whose normal equations are solved by Krylov
methods preconditioned with NE-SOR/NE-SSOR inner iterations."""

from .errors import (
    DimensionError,
    IndefiniteMatrixError,
    InfeasibleError,
    InnerLPError,
    InteriorError,
    MpsParseError,
)
from .sparse import CsrMatrix, RowOperator, matvec, matvec_transpose
from .inner import InnerIterConfig, ne_sor_apply, ne_ssor_apply
from .krylov import KrylovConfig, Method, SolveReport, krylov_solve
from .mps import LpProblem, StandardFormLp, parse_mps, read_mps, recover_solution, to_standard_form, write_mps

__version__ = "0.1.0"
