from typing import Optional

from core.exceptions import (
    EXIT_NON_CONVERGENCE,
    EXIT_VERIFICATION,
    HotellingError,
    NonConvergenceError,
    VerificationError,
)
from core.handlers import MarketHandler, RationalizeHandler, ResponseHandler, VerificationHandler
from core.models import CommandReport, RunConfig, RunOutcome
from services.report_service import ReportService
from utils.logger import logger


class Runner:
    """指令分派核心類：RunConfig -> 處理器 -> CommandReport -> 序列化文字"""

    def __init__(self):
        self.market_handler = MarketHandler(self)
        self.response_handler = ResponseHandler(self)
        self.rationalize_handler = RationalizeHandler(self)
        self.verification_handler = VerificationHandler(self)
        logger.debug("Runner initialized")

    def execute(self, config: RunConfig) -> CommandReport:
        command = config.command
        logger.info(f"Running command: {command}")
        if command == "shares":
            return self.market_handler.handle_shares(config)
        elif command == "best-response":
            return self.response_handler.handle_best_response(config)
        elif command == "reaction-table":
            return self.response_handler.handle_reaction_table(config)
        elif command == "rationalize":
            return self.rationalize_handler.handle_rationalize(config)
        elif command == "sweep":
            return self.rationalize_handler.handle_sweep(config)
        elif command == "nash":
            return self.verification_handler.handle_nash(config)
        elif command == "verify":
            return self.verification_handler.handle_verify(config)
        raise HotellingError(f"unknown command {command}")

    @staticmethod
    def _status_error(report: CommandReport) -> Optional[HotellingError]:
        if report.exit_status == EXIT_NON_CONVERGENCE:
            return NonConvergenceError(f"{report.command} did not converge within the round limit")
        if report.exit_status == EXIT_VERIFICATION:
            failed = [row["name"] for row in report.rows if not row.get("passed", True)]
            return VerificationError(f"verification failed: {', '.join(failed)}")
        return None

    def run(self, config: RunConfig) -> RunOutcome:
        """
        執行指令並序列化報表

        Returns:
            RunOutcome: 結束狀態碼、stdout 報表，以及（失敗時）stderr 的 JSON 錯誤物件
        """
        try:
            report = self.execute(config)
            output = ReportService.render_report(report, config.output_format, config.digits)
        except HotellingError as e:
            logger.error(f"Error in {config.command}: {str(e)}", exc_info=True)
            return RunOutcome(exit_status=e.exit_status, error=ReportService.render_error(e, e.exit_status))

        error = self._status_error(report)
        if error is None:
            return RunOutcome(exit_status=report.exit_status, output=output)
        logger.error(f"Error in {config.command}: {str(error)}")
        return RunOutcome(
            exit_status=report.exit_status,
            output=output,
            error=ReportService.render_error(error, report.exit_status),
        )
