from typing import List

from core.elimination import iterate
from core.exceptions import EXIT_NON_CONVERGENCE, EXIT_OK, PreconditionError
from core.models import CommandReport, ModelParams, RunConfig
from services.oracle_service import OracleService
from services.sweep_service import SWEEP_COLUMNS, SweepService
from services.verification_service import default_grid_m
from tools.param_tools import ParamsExtractor

from .base_handler import BaseHandler


class RationalizeHandler(BaseHandler):
    """rationalize 與 sweep 指令"""

    def handle_rationalize(self, config: RunConfig) -> CommandReport:
        params = self._build_params(config)
        if config.method == "grid":
            grid = self._build_grid(config, default_grid_m(params))
            trace = OracleService.grid_eliminate(params, params.n, grid, config.max_rounds, config.workers)
            extra = {"grid_m": grid.m, "eps_opt": grid.eps_opt}
        else:
            trace = iterate(params, config.tol, config.max_rounds)
            extra = {}

        status = EXIT_OK if trace.converged else EXIT_NON_CONVERGENCE
        return self._create_report(config, trace=trace, exit_status=status, **extra)

    def _sweep_params(self, config: RunConfig) -> List[ModelParams]:
        if config.pairs:
            if config.n != 2:
                raise PreconditionError("a_1:a_2 pairs describe two firms; use --n 2")
            return [ParamsExtractor.build_params(pair, 2) for pair in config.pairs]
        return [ParamsExtractor.build_params((a,), config.n) for a in config.a]

    def handle_sweep(self, config: RunConfig) -> CommandReport:
        param_list = self._sweep_params(config)
        rows = SweepService.sweep_limits(param_list, config.tol, config.max_rounds, config.workers)
        status = EXIT_OK if all(row["converged"] for row in rows) else EXIT_NON_CONVERGENCE
        return self._create_report(
            config,
            payload={"table": rows},
            rows=rows,
            columns=SWEEP_COLUMNS,
            exit_status=status,
        )
