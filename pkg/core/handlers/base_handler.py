from typing import Any, Dict, List, Optional

from core.exceptions import EXIT_OK, PreconditionError
from core.models import CommandReport, EliminationTrace, Grid, ModelParams, RunConfig
from tools.param_tools import ParamsExtractor
from utils.config import EPS_OPT_SCALE


class BaseHandler:
    """基礎處理器類，提供共同的工具方法和介面"""

    def __init__(self, runner_instance):
        """
        初始化處理器

        Args:
            runner_instance: Runner 實例，用於存取共用的設定
        """
        self.runner = runner_instance

    def _build_params(self, config: RunConfig) -> ModelParams:
        return ParamsExtractor.build_params(config.a, config.n)

    def _require_locations(self, config: RunConfig, count: int, flag: str = "--c") -> List[float]:
        if len(config.c) != count:
            raise PreconditionError(f"{config.command} needs {count} value(s) in {flag}, got {len(config.c)}")
        for value in config.c:
            if not 0.0 <= value <= 1.0:
                raise PreconditionError(f"location {value} is outside [0, 1]")
        return list(config.c)

    def _build_grid(self, config: RunConfig, default_m: int) -> Grid:
        m = config.grid_m or default_m
        if config.eps_opt is None:
            return Grid.with_default_eps(m, EPS_OPT_SCALE)
        return Grid(m=m, eps_opt=config.eps_opt)

    def _header(self, config: RunConfig, **extra: Any) -> Dict[str, Any]:
        """報表標頭：指令、全部有效設定，以及處理器補充的欄位"""
        header: Dict[str, Any] = {"command": config.command, "settings": config.settings()}
        header.update(extra)
        return header

    def _create_report(
        self,
        config: RunConfig,
        payload: Optional[Dict[str, Any]] = None,
        rows: Optional[List[Dict[str, Any]]] = None,
        columns: Optional[List[str]] = None,
        trace: Optional[EliminationTrace] = None,
        exit_status: int = EXIT_OK,
        **header_extra: Any
    ) -> CommandReport:
        return CommandReport(
            command=config.command,
            exit_status=exit_status,
            header=self._header(config, **header_extra),
            payload=payload or {},
            rows=rows or [],
            columns=columns or [],
            trace=trace,
        )
