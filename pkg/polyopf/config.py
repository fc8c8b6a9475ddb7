"""Configuration constants for polyopf."""

# Case corpus
CASES_ENV_VAR = "POLYOPF_CASES"
CORPUS_NAMES = ("WB2", "LMBM3", "WB5", "case9mod", "case14", "case30", "case39")

# Interior-point solver
FEAS_TOL = 1e-7
GAP_TOL = 1e-7
MAX_ITERATIONS = 200
STEP_FRACTION = 0.95  # Fraction of the distance to the cone boundary
DEPENDENT_ROW_TOL = 1e-11  # Relative pivot size below which a row is dropped
DIVERGENCE_LIMIT = 1e10  # Scaled objective magnitude treated as infeasibility
MIN_STEP = 1e-9  # Steps shorter than this count as stagnation
STAGNATION_LIMIT = 5  # Consecutive short steps before giving up

# Relaxations
BASIS_SIZE_CAP = 5000  # Largest moment basis built before BasisOverflow
MERGE_THRESHOLD = 16  # Clique merging when binom(|I|+r, r) is below this

# Extraction / certification
RANK_TOL = 1e-4  # lambda_2 / lambda_1 of the moment matrix
FEASIBILITY_TOL = 1e-6  # Residual violation (p.u.)
CERTIFICATION_TOL = 5e-3  # Relative gap between bound and objective(x)
STITCH_TOL = 1e-4  # Allowed |V| mismatch between overlapping cliques
AUX_TOL = 1e-3  # Relative gap between auxiliary first moments and their lifted values

# DIGS
DIGS_EPS = 1e-5  # Stop when the subproblem objective is >= -eps * (1 + |bound|)
DIGS_MAX_ITER = 30
DIGS_TIME_BUDGET = 600.0  # Seconds
DUPLICATE_CUT_TOL = 1e-8

# Reports
JSON_SCHEMA_VERSION = 1

# Web server settings
HOST = "127.0.0.1"
PORT = 5000
