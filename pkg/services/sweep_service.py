from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Sequence

from core.elimination import closed_form_limit, iterate
from core.models import ModelParams
from utils.config import ELIMINATION_TOL, MAX_ROUNDS, SWEEP_WORKERS
from utils.logger import logger

SWEEP_COLUMNS = [
    "index",
    "inefficiencies",
    "kind",
    "converged",
    "converged_at",
    "limit_lo",
    "limit_hi",
    "closed_form_lo",
    "closed_form_hi",
    "gap",
]


def _limit_row(job) -> Dict[str, Any]:
    """單一參數組合的迭代極限與封閉解（須可被 pickle，供行程池使用）"""
    index, inefficiencies, tol, max_rounds = job
    params = ModelParams(inefficiencies=inefficiencies)
    trace = iterate(params, tol, max_rounds)
    closed = closed_form_limit(params)
    limit = trace.limit[0]
    gap = max(lim.hausdorff(c) for lim, c in zip(trace.limit, closed))
    return {
        "index": index,
        "inefficiencies": ":".join(f"{a:g}" for a in inefficiencies),
        "kind": trace.kind,
        "converged": trace.converged,
        "converged_at": trace.converged_at,
        "limit_lo": limit.lo,
        "limit_hi": limit.hi,
        "closed_form_lo": closed[0].lo,
        "closed_form_hi": closed[0].hi,
        "gap": gap,
    }


class SweepService:
    """參數掃描：比較不同 a 下的迭代極限與封閉解"""

    @staticmethod
    def sweep_limits(
        param_list: Sequence[ModelParams],
        tol: float = ELIMINATION_TOL,
        max_rounds: int = MAX_ROUNDS,
        workers: int = SWEEP_WORKERS
    ) -> List[Dict[str, Any]]:
        """
        回傳每組參數一列，依輸入順序排列
        兩廠商時 limit_lo/limit_hi 是兩個極限點，三廠商時是極限區間的端點
        """
        jobs = [(i, tuple(p.inefficiencies), tol, max_rounds) for i, p in enumerate(param_list)]
        logger.info(f"Sweeping {len(jobs)} parameter sets with {workers} worker(s)")
        if workers <= 1 or len(jobs) <= 1:
            rows = [_limit_row(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_limit_row, jobs))

        not_converged = [row["index"] for row in rows if not row["converged"]]
        if not_converged:
            logger.warning(f"Sweep rows without convergence: {not_converged}")
        return rows
