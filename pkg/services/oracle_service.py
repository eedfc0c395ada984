from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from core.choice_set import ChoiceSet
from core.exceptions import PreconditionError
from core.market import solve_shares_batch
from core.models import EliminationTrace, Grid, ModelParams, RoundState, TraceComparison
from utils.config import COMPARE_GRID_STEPS, MAX_ROUNDS, ORACLE_CHUNK_ROWS, ORACLE_WORKERS
from utils.logger import logger

T = TypeVar("T")


class OracleService:
    """
    暴力網格驗證：網格上的最佳回應，以及「限制在存活集合內最適」消去規則的逐點實作。
    所有網格掃描依列切塊，可用執行緒池平行處理；彙整只用 OR 與加總，結果與執行緒數無關。
    """

    @staticmethod
    def _map_chunks(
        work: Callable[[int, int], T],
        n_items: int,
        chunk: int,
        workers: int
    ) -> List[T]:
        ranges = [(start, min(start + chunk, n_items)) for start in range(0, n_items, max(chunk, 1))]
        if workers <= 1 or len(ranges) <= 1:
            return [work(lo, hi) for lo, hi in ranges]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda bounds: work(*bounds), ranges))

    @staticmethod
    def _restrict_mask(grid: Grid, restrict_to: Optional[ChoiceSet]) -> np.ndarray:
        points = grid.points
        if restrict_to is None:
            return np.ones(points.shape[0], dtype=bool)
        slack = 1e-9 * grid.step
        mask = np.zeros(points.shape[0], dtype=bool)
        for lo, hi in restrict_to.intervals:
            mask |= (points >= lo - slack) & (points <= hi + slack)
        return mask

    @staticmethod
    def grid_shares(
        firm: int,
        opponents: Sequence[float],
        params: ModelParams,
        grid: Grid,
        workers: int = ORACLE_WORKERS
    ) -> np.ndarray:
        """firm 位於每個網格點時的市占，對手位置固定（依輸入順序，不含 firm 本身）"""
        n = params.n
        if not 0 <= firm < n:
            raise PreconditionError(f"firm index {firm} out of range for {n} firms")
        if len(opponents) != n - 1:
            raise PreconditionError(f"expected {n - 1} opponent locations, got {len(opponents)}")
        if any(not 0.0 <= c <= 1.0 for c in opponents):
            raise PreconditionError("opponent locations must lie in [0, 1]")

        points = grid.points
        others = iter(opponents)
        columns = [points if j == firm else np.full(points.shape[0], float(next(others))) for j in range(n)]
        locations = np.column_stack(columns)
        a = np.asarray(params.inefficiencies)

        def work(lo: int, hi: int) -> np.ndarray:
            return solve_shares_batch(locations[lo:hi], a)[1][:, firm]

        parts = OracleService._map_chunks(work, points.shape[0], ORACLE_CHUNK_ROWS, workers)
        return np.concatenate(parts)

    @staticmethod
    def grid_best_response(
        firm: int,
        opponents: Sequence[float],
        params: ModelParams,
        grid: Grid,
        restrict_to: Optional[ChoiceSet] = None,
        workers: int = ORACLE_WORKERS
    ) -> np.ndarray:
        """回傳市占在（限制後）最大值 eps_opt 以內的所有網格點"""
        shares = OracleService.grid_shares(firm, opponents, params, grid, workers)
        mask = OracleService._restrict_mask(grid, restrict_to)
        if not mask.any():
            return np.empty(0)
        best = shares[mask].max()
        keep = mask & (shares >= best - grid.eps_opt)
        return grid.points[keep]

    # ---- restricted elimination on the grid -----------------------------

    @staticmethod
    def _two_firm_share_matrix(params: ModelParams, grid: Grid, workers: int) -> np.ndarray:
        """S[j, k]：廠商 0 位於 j/m、廠商 1 位於 k/m 時廠商 0 的市占"""
        size = grid.m + 1
        points = grid.points
        a = np.asarray(params.inefficiencies)

        def work(lo: int, hi: int) -> np.ndarray:
            rows = np.arange(lo, hi)
            locations = np.column_stack((points[rows // size], points[rows % size]))
            return solve_shares_batch(locations, a)[1][:, 0]

        parts = OracleService._map_chunks(work, size * size, ORACLE_CHUNK_ROWS, workers)
        return np.concatenate(parts).reshape(size, size)

    @staticmethod
    def _survivors(
        shares: np.ndarray,
        own_alive: np.ndarray,
        belief_alive: np.ndarray,
        eps: float
    ) -> Tuple[np.ndarray, int]:
        """
        shares[j, b]：自己位於 j、對手信念為 b 時的市占
        回傳限制最適下存活的 j，以及非限制最適點落在存活集合外的信念數
        """
        sub = shares[:, belief_alive]
        restricted = np.where(own_alive[:, None], sub, -np.inf)
        best_restricted = restricted.max(axis=0)
        keep = (own_alive[:, None] & (sub >= best_restricted[None, :] - eps)).any(axis=1)

        best_free = sub.max(axis=0)
        outside = ((sub >= best_free[None, :] - eps) & ~own_alive[:, None]).any(axis=0)
        return keep, int(outside.sum())

    @staticmethod
    def _eliminate_two(
        params: ModelParams,
        grid: Grid,
        max_rounds: int,
        workers: int
    ) -> Tuple[List[RoundState], Optional[int], int]:
        share_first = OracleService._two_firm_share_matrix(params, grid, workers)
        # firm 1 at k against firm 0 at j, indexed [own, belief]
        share_second = (1.0 - share_first).T

        size = grid.m + 1
        alive = [np.ones(size, dtype=bool), np.ones(size, dtype=bool)]
        unit = ChoiceSet.unit()
        rounds = [RoundState(k=0, sets=(unit, unit), rules=("initial", "initial"))]
        counterexamples = 0
        for k in range(1, max_rounds + 1):
            keep0, cex0 = OracleService._survivors(share_first, alive[0], alive[1], grid.eps_opt)
            keep1, cex1 = OracleService._survivors(share_second, alive[1], alive[0], grid.eps_opt)
            removed = int(alive[0].sum() - keep0.sum() + alive[1].sum() - keep1.sum())
            counterexamples += OracleService._report_counterexamples(k, cex0 + cex1)
            alive = [keep0, keep1]
            rounds.append(RoundState(
                k=k,
                sets=(ChoiceSet.from_grid_mask(keep0, grid.m), ChoiceSet.from_grid_mask(keep1, grid.m)),
                rules=("grid", "grid"),
            ))
            logger.debug(f"Grid round {k}: removed {removed}, survivors {int(keep0.sum())}/{int(keep1.sum())}")
            if removed == 0:
                return rounds, k, counterexamples
        return rounds, None, counterexamples

    @staticmethod
    def _eliminate_three(
        params: ModelParams,
        grid: Grid,
        max_rounds: int,
        workers: int
    ) -> Tuple[List[RoundState], Optional[int], int]:
        m = grid.m
        points = grid.points
        a = np.asarray(params.inefficiencies)
        alive = np.ones(m + 1, dtype=bool)
        unit = ChoiceSet.unit()
        rounds = [RoundState(k=0, sets=(unit,) * 3, rules=("initial",) * 3)]
        counterexamples = 0
        beliefs_per_chunk = max(1, ORACLE_CHUNK_ROWS // (m + 1))

        for k in range(1, max_rounds + 1):
            idx = np.flatnonzero(alive)
            left, right = np.meshgrid(idx, idx, indexing="ij")
            reduced = (left <= right) & (left + right >= m)
            belief_l, belief_r = left[reduced], right[reduced]
            current = alive

            def work(lo: int, hi: int) -> Tuple[np.ndarray, int]:
                count = hi - lo
                locations = np.column_stack((
                    np.tile(points, count),
                    np.repeat(points[belief_l[lo:hi]], m + 1),
                    np.repeat(points[belief_r[lo:hi]], m + 1),
                ))
                shares = solve_shares_batch(locations, a)[1][:, 0].reshape(count, m + 1)
                keep, outside = OracleService._survivors(shares.T, current, np.ones(count, dtype=bool), grid.eps_opt)
                return keep, outside

            results = OracleService._map_chunks(work, belief_l.shape[0], beliefs_per_chunk, workers)
            keep = np.zeros(m + 1, dtype=bool)
            found = 0
            for part, outside in results:
                keep |= part
                found += outside
            # survivors of the mirrored beliefs are the mirrored survivors
            keep = (keep | keep[::-1]) & alive
            removed = int(alive.sum() - keep.sum())
            counterexamples += OracleService._report_counterexamples(k, found)
            alive = keep

            survivors = ChoiceSet.from_grid_mask(keep, m)
            rounds.append(RoundState(k=k, sets=(survivors,) * 3, rules=("grid",) * 3))
            logger.info(f"Three-firm grid round {k}: {belief_l.shape[0]} beliefs, removed {removed}, survivors {survivors}")
            if removed == 0:
                return rounds, k, counterexamples
        return rounds, None, counterexamples

    @staticmethod
    def _report_counterexamples(k: int, found: int) -> int:
        if found:
            logger.warning(
                f"Grid round {k}: {found} surviving beliefs have an unrestricted optimum outside the surviving set"
            )
        return found

    @staticmethod
    def grid_eliminate(
        params: ModelParams,
        n_firms: int,
        grid: Grid,
        max_rounds: int = MAX_ROUNDS,
        workers: int = ORACLE_WORKERS
    ) -> EliminationTrace:
        """
        消去規則的網格版本：每回合保留在存活集合內對至少一組存活對手位置為 eps_opt 最適的點，
        直到某回合沒有刪除任何點為止。三廠商只列舉化簡後的信念再鏡射存活點。
        """
        if grid.m < 100:
            raise PreconditionError(f"grid resolution must be at least 100, got {grid.m}")
        if params.n != n_firms:
            raise PreconditionError(f"dimension mismatch: {params.n} inefficiencies for {n_firms} firms")
        if n_firms == 2:
            rounds, converged_at, counterexamples = OracleService._eliminate_two(params, grid, max_rounds, workers)
        elif n_firms == 3:
            if not params.is_symmetric:
                raise PreconditionError("three-firm grid elimination needs equal inefficiencies")
            rounds, converged_at, counterexamples = OracleService._eliminate_three(params, grid, max_rounds, workers)
        else:
            raise PreconditionError(f"grid elimination supports two or three firms, got {n_firms}")

        gaps = tuple(
            max(p.hausdorff(c) for p, c in zip(prev.sets, cur.sets))
            for prev, cur in zip(rounds, rounds[1:])
        )
        if converged_at is None:
            logger.warning(f"Grid elimination for a={list(params.inefficiencies)} hit max_rounds={max_rounds}")
        else:
            logger.info(
                f"Grid elimination for a={list(params.inefficiencies)} at m={grid.m} settled at round {converged_at}"
            )
        return EliminationTrace(
            kind="grid",
            inefficiencies=params.inefficiencies,
            rounds=tuple(rounds),
            limit=rounds[-1].sets,
            converged=converged_at is not None,
            converged_at=converged_at,
            hausdorff_gaps=gaps,
            grid_m=grid.m,
            counterexamples=counterexamples,
        )

    @staticmethod
    def compare_traces(
        analytic: EliminationTrace,
        grid_trace: EliminationTrace,
        grid: Grid,
        steps: float = COMPARE_GRID_STEPS,
        limit_steps: float = COMPARE_GRID_STEPS
    ) -> TraceComparison:
        """
        逐回合與極限的 Hausdorff 距離。
        超過 steps 個網格步長 + eps_opt 的回合會被標記；極限則以 limit_steps 判定。
        網格誤差會隨回合累積，三廠商時呼叫端應放寬 steps。
        """
        if analytic.n_firms != grid_trace.n_firms or not np.allclose(
            analytic.inefficiencies, grid_trace.inefficiencies, rtol=0.0, atol=1e-12
        ):
            raise PreconditionError("traces were computed for different parameters")
        if grid_trace.grid_m is not None and grid_trace.grid_m != grid.m:
            raise PreconditionError(f"grid trace used m={grid_trace.grid_m}, comparison grid has m={grid.m}")

        threshold = steps * grid.step + grid.eps_opt
        count = min(len(analytic.rounds), len(grid_trace.rounds))
        round_gaps = tuple(
            max(a.hausdorff(g) for a, g in zip(analytic.rounds[k].sets, grid_trace.rounds[k].sets))
            for k in range(count)
        )
        limit_gap = max(a.hausdorff(g) for a, g in zip(analytic.limit, grid_trace.limit))
        limit_threshold = limit_steps * grid.step + grid.eps_opt
        flagged = tuple(k for k, gap in enumerate(round_gaps) if gap > threshold)
        if flagged or limit_gap > limit_threshold:
            logger.warning(
                f"Trace comparison: rounds above {threshold:.3e}: {list(flagged)}, "
                f"limit gap {limit_gap:.3e} (threshold {limit_threshold:.3e})"
            )
        return TraceComparison(
            round_gaps=round_gaps,
            limit_gap=limit_gap,
            threshold=threshold,
            limit_threshold=limit_threshold,
            flagged_rounds=flagged,
        )
