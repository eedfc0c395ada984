import io
import json
import math
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from core.choice_set import ChoiceSet
from core.exceptions import HotellingError, PreconditionError
from core.models import CommandReport, EliminationTrace, RoundState
from utils.logger import logger

TRACE_COLUMNS = ["round", "firm", "interval", "lo", "hi"]


class ReportService:
    """
    報表序列化服務
    JSON 欄位順序固定；digits=None 時輸出最短可還原的 repr，parse_trace 可逐位元還原軌跡。
    """

    @staticmethod
    def format_number(value: float, digits: Optional[int]) -> float:
        if digits is None:
            return float(value)
        return float(f"{float(value):.{digits}g}")

    @staticmethod
    def _round_numbers(obj: Any, digits: Optional[int]) -> Any:
        """遞迴處理 dict / list / pydantic 模型中的浮點數"""
        if isinstance(obj, bool) or obj is None or isinstance(obj, str):
            return obj
        if isinstance(obj, (float, np.floating)):
            # JSON 無 NaN / Infinity
            if not math.isfinite(obj):
                return None
            return ReportService.format_number(obj, digits)
        if isinstance(obj, (int, np.integer)):
            return int(obj)
        if isinstance(obj, ChoiceSet):
            return ReportService._round_numbers(obj.as_lists(), digits)
        if hasattr(obj, "model_dump"):
            return ReportService._round_numbers(obj.model_dump(), digits)
        if isinstance(obj, dict):
            return {key: ReportService._round_numbers(value, digits) for key, value in obj.items()}
        if isinstance(obj, (list, tuple, np.ndarray)):
            return [ReportService._round_numbers(value, digits) for value in obj]
        return obj

    @staticmethod
    def _csv_header(header: Dict[str, Any], digits: Optional[int]) -> str:
        lines = []
        for key, value in header.items():
            rendered = json.dumps(ReportService._round_numbers(value, digits), ensure_ascii=False)
            lines.append(f"# {key}={rendered}")
        return "".join(line + "\n" for line in lines)

    @staticmethod
    def _to_csv(rows: List[Dict[str, Any]], columns: List[str], digits: Optional[int]) -> str:
        df = pd.DataFrame(rows, columns=columns)
        buffer = io.StringIO()
        float_format = f"%.{digits}g" if digits is not None else None
        df.to_csv(buffer, index=False, float_format=float_format, lineterminator="\n")
        return buffer.getvalue()

    # ---- traces -------------------------------------------------------

    @staticmethod
    def trace_to_dict(trace: EliminationTrace, digits: Optional[int], header: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        def sets(round_sets) -> List[List[List[float]]]:
            return [ReportService._round_numbers(s.as_lists(), digits) for s in round_sets]

        return {
            "header": ReportService._round_numbers(header or {}, digits),
            "kind": trace.kind,
            "inefficiencies": ReportService._round_numbers(trace.inefficiencies, digits),
            "converged": trace.converged,
            "converged_at": trace.converged_at,
            "rounds": [sets(r.sets) for r in trace.rounds],
            "round_rules": [list(r.rules) for r in trace.rounds],
            "limit": sets(trace.limit),
            "hausdorff_gaps": ReportService._round_numbers(trace.hausdorff_gaps, digits),
            "grid_m": trace.grid_m,
            "counterexamples": trace.counterexamples,
        }

    @staticmethod
    def serialize_trace(
        trace: EliminationTrace,
        fmt: str = "json",
        digits: Optional[int] = 15,
        header: Optional[Dict[str, Any]] = None
    ) -> str:
        """
        JSON：header、kind、inefficiencies、converged、converged_at、rounds（每家廠商的 [lo, hi] 陣列）、
        round_rules、limit、hausdorff_gaps、grid_m、counterexamples
        CSV：每個（回合, 廠商, 區間）一列，極限列的 round 欄為 "limit"
        """
        if fmt == "json":
            return json.dumps(ReportService.trace_to_dict(trace, digits, header), indent=2, ensure_ascii=False) + "\n"
        if fmt != "csv":
            raise PreconditionError(f"unsupported output format: {fmt}")

        rows: List[Dict[str, Any]] = []
        labelled = [(r.k, r.sets) for r in trace.rounds] + [("limit", trace.limit)]
        for label, round_sets in labelled:
            for firm, choice_set in enumerate(round_sets, start=1):
                for index, (lo, hi) in enumerate(choice_set.intervals):
                    rows.append({"round": label, "firm": firm, "interval": index, "lo": lo, "hi": hi})

        meta = dict(header or {})
        meta.update({
            "kind": trace.kind,
            "inefficiencies": list(trace.inefficiencies),
            "converged": trace.converged,
            "converged_at": trace.converged_at,
        })
        return ReportService._csv_header(meta, digits) + ReportService._to_csv(rows, TRACE_COLUMNS, digits)

    @staticmethod
    def parse_trace(text: str) -> EliminationTrace:
        """serialize_trace(JSON) 的反函數"""
        try:
            data = json.loads(text)
            rules = data.get("round_rules") or [["parsed"] * len(r) for r in data["rounds"]]
            rounds = tuple(
                RoundState(
                    k=k,
                    sets=tuple(ChoiceSet(intervals=tuple((lo, hi) for lo, hi in firm_set)) for firm_set in round_sets),
                    rules=tuple(rules[k]),
                )
                for k, round_sets in enumerate(data["rounds"])
            )
            return EliminationTrace(
                kind=data["kind"],
                inefficiencies=tuple(data["inefficiencies"]),
                rounds=rounds,
                limit=tuple(ChoiceSet(intervals=tuple((lo, hi) for lo, hi in s)) for s in data["limit"]),
                converged=data["converged"],
                converged_at=data.get("converged_at"),
                hausdorff_gaps=tuple(data.get("hausdorff_gaps", ())),
                grid_m=data.get("grid_m"),
                counterexamples=data.get("counterexamples", 0),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, ValidationError) as e:
            logger.error(f"Error parsing trace: {str(e)}")
            raise PreconditionError(f"not a serialized elimination trace: {e}") from e

    # ---- command reports ----------------------------------------------

    @staticmethod
    def render_report(report: CommandReport, fmt: str = "json", digits: Optional[int] = 15) -> str:
        if report.trace is not None and not report.payload:
            return ReportService.serialize_trace(report.trace, fmt, digits, report.header)
        if fmt == "json":
            body = {"header": report.header, **report.payload}
            return json.dumps(ReportService._round_numbers(body, digits), indent=2, ensure_ascii=False) + "\n"
        if fmt != "csv":
            raise PreconditionError(f"unsupported output format: {fmt}")
        columns = report.columns or (list(report.rows[0].keys()) if report.rows else [])
        return ReportService._csv_header(report.header, digits) + ReportService._to_csv(report.rows, columns, digits)

    @staticmethod
    def render_error(error: Exception, exit_status: int) -> str:
        """stderr 上的 JSON 錯誤物件"""
        payload = {
            "error": str(error),
            "type": type(error).__name__,
            "exit_status": exit_status,
        }
        return json.dumps(payload, ensure_ascii=False)

    @staticmethod
    def error_status(error: Exception) -> int:
        if isinstance(error, HotellingError):
            return error.exit_status
        return PreconditionError.exit_status
