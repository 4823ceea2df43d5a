from .causal import (
    Certificate,
    CertificateError,
    DetStrategy,
    Equality,
    ExtremalityReport,
    all_strategies,
    enumerate_classical_vertices,
    extremality,
    in_nbts_polytope,
    last_mover_check,
    last_mover_violations,
    membership,
    nbts_dimension,
    nbts_equalities,
    verify_symmetries,
)
from .rank import exact_rank
from .simplex import solve_lp
from .table import ProbTable, constant_table, uniform_table
