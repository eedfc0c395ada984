from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from core.choice_set import ChoiceSet
from core.exceptions import PreconditionError
from core.market import solve_shares_batch
from core.models import CommandReport, Grid, ModelParams, ResponseSet, RunConfig
from core.reaction import classify_belief_three, normalize_belief, reaction_three, reaction_two
from services.oracle_service import OracleService
from utils.config import ORACLE_BEST_RESPONSE_M
from utils.logger import logger

from .base_handler import BaseHandler


class ResponseHandler(BaseHandler):
    """best-response 與 reaction-table 指令"""

    def _response(self, config: RunConfig, params: ModelParams) -> Tuple[int, List[float], ResponseSet]:
        """回傳 (廠商索引, 依輸入順序的對手位置, 解析反應)"""
        if params.n == 2:
            if config.firm not in (1, 2):
                raise PreconditionError(f"--firm must be 1 or 2 for two firms, got {config.firm}")
            (c_other,) = self._require_locations(config, 1)
            return config.firm - 1, [c_other], reaction_two(config.firm - 1, c_other, params)
        if params.n == 3:
            if not params.is_symmetric:
                raise PreconditionError("three-firm responses need equal inefficiencies")
            c_l, c_r = self._require_locations(config, 2)
            return 0, [c_l, c_r], reaction_three(c_l, c_r, params.inefficiencies[0])
        raise PreconditionError(f"closed-form responses exist for two or three firms, got n={params.n}")

    @staticmethod
    def _shares_at(firm: int, positions: Sequence[float], opponents: Sequence[float], params: ModelParams) -> np.ndarray:
        rows = []
        for x in positions:
            others = iter(opponents)
            rows.append([x if j == firm else next(others) for j in range(params.n)])
        return solve_shares_batch(np.asarray(rows), np.asarray(params.inefficiencies))[1][:, firm]

    def _oracle_check(
        self,
        config: RunConfig,
        params: ModelParams,
        firm: int,
        opponents: List[float],
        response: ResponseSet
    ) -> Dict[str, Any]:
        grid = self._build_grid(config, ORACLE_BEST_RESPONSE_M)
        shares = OracleService.grid_shares(firm, opponents, params, grid, config.workers)
        points = OracleService.grid_best_response(firm, opponents, params, grid, workers=config.workers)
        grid_set = ChoiceSet.points(points.tolist(), merge_tol=1.5 * grid.step)

        analytic_share = float(self._shares_at(firm, response.values(), opponents, params).max())
        grid_best = float(shares.max())
        gap = response.as_choice_set().hausdorff(grid_set)
        logger.info(
            f"Oracle best response at m={grid.m}: grid set {grid_set}, Hausdorff gap {gap:.3e}, "
            f"share deficit {grid_best - analytic_share:.3e}"
        )
        return {
            "m": grid.m,
            "eps_opt": grid.eps_opt,
            "grid_response": grid_set.as_lists(),
            "hausdorff": gap,
            "grid_best_share": grid_best,
            "analytic_share": analytic_share,
            "share_deficit": grid_best - analytic_share,
        }

    def handle_best_response(self, config: RunConfig) -> CommandReport:
        params = self._build_params(config)
        firm, opponents, response = self._response(config, params)

        payload: Dict[str, Any] = {
            "firm": firm + 1,
            "opponents": opponents,
            "kind": response.kind,
            "response": response.as_choice_set().as_lists(),
        }
        if params.n == 3:
            belief, mirrored = normalize_belief(*opponents)
            payload["cases"] = list(classify_belief_three(belief, params.inefficiencies[0]))
            payload["mirrored"] = mirrored
        if config.oracle:
            payload["oracle"] = self._oracle_check(config, params, firm, opponents, response)

        rows = [{"firm": firm + 1, "lo": lo, "hi": hi} for lo, hi in response.as_choice_set().intervals]
        return self._create_report(config, payload=payload, rows=rows, columns=["firm", "lo", "hi"])

    # ---- reaction tables ----------------------------------------------

    def _two_firm_table(self, config: RunConfig, params: ModelParams) -> List[Dict[str, Any]]:
        if config.firm not in (1, 2):
            raise PreconditionError(f"--firm must be 1 or 2 for two firms, got {config.firm}")
        rows = []
        for c_other in np.linspace(config.range_from, config.range_to, config.samples):
            response = reaction_two(config.firm - 1, float(c_other), params)
            for branch, value in enumerate(response.values()):
                rows.append({"c_other": float(c_other), "branch": branch, "response": value})
        return rows

    def _three_firm_table(self, config: RunConfig, params: ModelParams) -> List[Dict[str, Any]]:
        """化簡後信念區域上的反應；c_r 範圍為 [max(1/2, from), min(1, to)]"""
        if not params.is_symmetric:
            raise PreconditionError("three-firm reaction tables need equal inefficiencies")
        a = params.inefficiencies[0]
        r_lo, r_hi = max(0.5, config.range_from), min(1.0, config.range_to)
        if r_lo > r_hi:
            raise PreconditionError(f"range [{config.range_from}, {config.range_to}] misses c_r in [1/2, 1]")
        rows = []
        for c_r in np.linspace(r_lo, r_hi, config.samples):
            c_r = float(c_r)
            for c_l in np.linspace(1.0 - c_r, c_r, config.samples):
                c_l = min(max(float(c_l), 1.0 - c_r), c_r)
                belief, _ = normalize_belief(c_l, c_r)
                response = reaction_three(c_l, c_r, a)
                rows.append({
                    "c_l": c_l,
                    "c_r": c_r,
                    "cases": "|".join(str(case) for case in classify_belief_three(belief, a)),
                    "lo": response.lo,
                    "hi": response.hi,
                })
        return rows

    def handle_reaction_table(self, config: RunConfig) -> CommandReport:
        params = self._build_params(config)
        if not 0.0 <= config.range_from <= config.range_to <= 1.0:
            raise PreconditionError(f"range [{config.range_from}, {config.range_to}] must satisfy 0 <= from <= to <= 1")
        if params.n == 2:
            rows = self._two_firm_table(config, params)
        elif params.n == 3:
            rows = self._three_firm_table(config, params)
        else:
            raise PreconditionError(f"reaction tables exist for two or three firms, got n={params.n}")

        logger.info(f"Reaction table for a={list(params.inefficiencies)}: {len(rows)} rows")
        columns = list(rows[0].keys()) if rows else []
        return self._create_report(config, payload={"table": rows}, rows=rows, columns=columns)
