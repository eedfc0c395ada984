import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv(override=True)


def _env(name: str, default: str) -> str:
    return os.getenv(f"HOTELLING_{name}", default)


def _env_bool(name: str, default: str) -> bool:
    return _env(name, default).strip().lower() in ("1", "true", "yes", "on")


# Share solver
SOLVER_TOL = float(_env("SOLVER_TOL", "1e-12"))
SOLVER_MAX_ITER = int(_env("SOLVER_MAX_ITER", "200"))
SOLVER_RESIDUAL_TOL = float(_env("SOLVER_RESIDUAL_TOL", "1e-10"))

# 消去程序
ELIMINATION_TOL = float(_env("ELIMINATION_TOL", "1e-9"))
MAX_ROUNDS = int(_env("MAX_ROUNDS", "10000"))
LIMIT_COLLAPSE_FACTOR = float(_env("LIMIT_COLLAPSE_FACTOR", "10"))
INVARIANT_TOL = float(_env("INVARIANT_TOL", "1e-12"))

# 區間集合與反應函數容差
CHOICE_SET_MERGE_TOL = float(_env("CHOICE_SET_MERGE_TOL", "1e-12"))
BOUNDARY_TOL = float(_env("BOUNDARY_TOL", "1e-12"))
DEDUPE_TOL = float(_env("DEDUPE_TOL", "1e-9"))
HALF_SNAP_TOL = float(_env("HALF_SNAP_TOL", "1e-12"))

# Grid oracle
ORACLE_ELIMINATION_M = int(_env("ORACLE_ELIMINATION_M", "1000"))
ORACLE_ELIMINATION_M_THREE = int(_env("ORACLE_ELIMINATION_M_THREE", "300"))
ORACLE_BEST_RESPONSE_M = int(_env("ORACLE_BEST_RESPONSE_M", "10000"))
EPS_OPT_SCALE = float(_env("EPS_OPT_SCALE", "0.01"))
ORACLE_CHUNK_ROWS = int(_env("ORACLE_CHUNK_ROWS", "262144"))
ORACLE_WORKERS = int(_env("ORACLE_WORKERS", "1"))
COMPARE_GRID_STEPS = float(_env("COMPARE_GRID_STEPS", "2"))

# Nash 檢查與驗證
NASH_SCAN_N = int(_env("NASH_SCAN_N", "10001"))
NASH_GAP_TOL = float(_env("NASH_GAP_TOL", "1e-12"))
VERIFY_SOLVER_SAMPLES = int(_env("VERIFY_SOLVER_SAMPLES", "200"))
VERIFY_SEED = int(_env("VERIFY_SEED", "20240611"))
VERIFY_CLOSED_FORM_TOL = float(_env("VERIFY_CLOSED_FORM_TOL", "1e-6"))
SWEEP_WORKERS = int(_env("SWEEP_WORKERS", "1"))

# 輸出配置
OUTPUT_SIGNIFICANT_DIGITS = int(_env("OUTPUT_SIGNIFICANT_DIGITS", "15"))

# Logging
LOG_LEVEL = _env("LOG_LEVEL", "INFO").upper()
LOG_TO_FILE = _env_bool("LOG_TO_FILE", "false")
LOG_DIR = _env("LOG_DIR", "logs")
