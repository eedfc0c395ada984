from core.market import check_assignment_stability, solve_cuts
from core.models import CommandReport, RunConfig
from tools.param_tools import ParamsExtractor
from utils.logger import logger

from .base_handler import BaseHandler

STABILITY_CONSUMERS = 1001


class MarketHandler(BaseHandler):
    """shares 指令：求解分界點與市占"""

    def handle_shares(self, config: RunConfig) -> CommandReport:
        params = self._build_params(config)
        profile = ParamsExtractor.build_profile(self._require_locations(config, params.n), params.n)

        outcome = solve_cuts(profile, params, tol=config.solver_tol)
        advantage = check_assignment_stability(profile, outcome, params, STABILITY_CONSUMERS)
        logger.info(f"Shares for c={list(profile.locations)}, a={list(params.inefficiencies)}: {list(outcome.shares)}")

        rows = [
            {
                "firm": i + 1,
                "location": profile.locations[i],
                "inefficiency": params.inefficiencies[i],
                "share": outcome.shares[i],
                "waiting_cost": params.inefficiencies[i] * outcome.shares[i],
            }
            for i in range(params.n)
        ]
        payload = {
            "locations": list(profile.locations),
            "inefficiencies": list(params.inefficiencies),
            "cuts": list(outcome.cuts),
            "shares": list(outcome.shares),
            "residual": outcome.residual,
            "stability_advantage": advantage,
        }
        return self._create_report(config, payload=payload, rows=rows, columns=list(rows[0].keys()))
