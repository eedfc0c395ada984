from core.elimination import pure_nash_two
from core.exceptions import EXIT_OK, EXIT_VERIFICATION, PreconditionError
from core.models import CommandReport, RunConfig
from services.verification_service import VerificationService, default_grid_m

from .base_handler import BaseHandler


class VerificationHandler(BaseHandler):
    """nash 與 verify 指令"""

    def handle_nash(self, config: RunConfig) -> CommandReport:
        params = self._build_params(config)
        if params.n != 2:
            raise PreconditionError(f"nash checks two firms, got n={params.n}")
        result = pure_nash_two(params, config.scan_n)

        payload = {
            "equilibrium": list(result.equilibrium) if result.equilibrium is not None else None,
            "min_gap": result.min_gap,
            "argmin_profile": list(result.argmin_profile),
            "scan_n": result.scan_n,
        }
        row = {
            "has_equilibrium": result.equilibrium is not None,
            "c1": result.argmin_profile[0],
            "c2": result.argmin_profile[1],
            "min_gap": result.min_gap,
        }
        return self._create_report(config, payload=payload, rows=[row], columns=list(row.keys()))

    def handle_verify(self, config: RunConfig) -> CommandReport:
        """
        驗證套件；任何一項檢查未通過時結束狀態為 4。
        網格反例數量只作為資訊輸出。
        """
        params = self._build_params(config)
        grid = self._build_grid(config, default_grid_m(params))
        report, trace, grid_trace, comparison = VerificationService.run(
            params,
            tol=config.tol,
            max_rounds=config.max_rounds,
            grid=grid,
            steps=config.steps,
            samples=config.verify_samples,
            seed=config.seed,
            workers=config.workers,
        )

        checks = [check.model_dump() for check in report.checks]
        payload = {
            "passed": report.passed,
            "checks": checks,
            "comparison": {
                "round_gaps": list(comparison.round_gaps),
                "limit_gap": comparison.limit_gap,
                "threshold": comparison.threshold,
                "limit_threshold": comparison.limit_threshold,
                "flagged_rounds": list(comparison.flagged_rounds),
            },
            "analytic_limit": [s.as_lists() for s in trace.limit],
            "grid_limit": [s.as_lists() for s in grid_trace.limit],
            "counterexamples": grid_trace.counterexamples,
        }
        status = EXIT_OK if report.passed else EXIT_VERIFICATION
        return self._create_report(
            config,
            payload=payload,
            rows=checks,
            columns=["name", "value", "threshold", "passed", "detail"],
            exit_status=status,
            grid_m=grid.m,
            eps_opt=grid.eps_opt,
        )
