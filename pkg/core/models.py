from typing import Any, Dict, List, Literal, Optional, Tuple
import math

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from core.choice_set import ChoiceSet
from core.exceptions import PreconditionError
from utils.config import (
    BOUNDARY_TOL,
    DEDUPE_TOL,
    ELIMINATION_TOL,
    EPS_OPT_SCALE,
    MAX_ROUNDS,
    NASH_SCAN_N,
    ORACLE_WORKERS,
    OUTPUT_SIGNIFICANT_DIGITS,
    SOLVER_TOL,
    VERIFY_SEED,
    VERIFY_SOLVER_SAMPLES,
)


class ModelParams(BaseModel):
    """模型參數：各廠商的等待成本係數 a_i（無效率程度）"""
    model_config = {"frozen": True}

    inefficiencies: Tuple[float, ...]

    @field_validator("inefficiencies")
    @classmethod
    def _check_inefficiencies(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 2:
            raise ValueError("at least two firms are required")
        for a in value:
            if not math.isfinite(a) or a <= 0:
                raise ValueError(f"inefficiency {a} must be a positive finite number")
        return value

    @classmethod
    def symmetric(cls, a: float, n: int) -> "ModelParams":
        return cls(inefficiencies=(float(a),) * n)

    @property
    def n(self) -> int:
        return len(self.inefficiencies)

    @property
    def gamma(self) -> float:
        """兩廠商時的常數 γ = 1 + a_1 + a_2"""
        if self.n != 2:
            raise PreconditionError(f"gamma is defined for two firms, got n={self.n}")
        return 1.0 + self.inefficiencies[0] + self.inefficiencies[1]

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.inefficiencies)) == 1

    def reversed(self) -> "ModelParams":
        return ModelParams(inefficiencies=tuple(reversed(self.inefficiencies)))


class LocationProfile(BaseModel):
    """策略組合：每家廠商在 [0,1] 上的位置，依輸入順序排列"""
    model_config = {"frozen": True}

    locations: Tuple[float, ...]

    @field_validator("locations")
    @classmethod
    def _check_locations(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("a profile needs at least one location")
        for c in value:
            if not (0.0 <= c <= 1.0):
                raise ValueError(f"location {c} is outside [0, 1]")
        return value

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def order(self) -> Tuple[int, ...]:
        """排序位置 -> 輸入索引（穩定排序，同位置保留輸入順序）"""
        return tuple(sorted(range(self.n), key=lambda i: self.locations[i]))

    @property
    def permutation(self) -> Tuple[int, ...]:
        """輸入索引 -> 排序位置"""
        ranks = [0] * self.n
        for position, firm in enumerate(self.order):
            ranks[firm] = position
        return tuple(ranks)


class MarketOutcome(BaseModel):
    """
    無異條件方程組的解
    cuts 依排序後的廠商順序列出 x_0=0, ..., x_n=1；shares 依輸入順序列出。
    """
    model_config = {"frozen": True}

    cuts: Tuple[float, ...]
    shares: Tuple[float, ...]
    residual: float
    order: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_outcome(self) -> "MarketOutcome":
        if len(self.cuts) != len(self.shares) + 1 or len(self.order) != len(self.shares):
            raise ValueError("cuts, shares and order have inconsistent lengths")
        if self.cuts[0] != 0.0 or self.cuts[-1] != 1.0:
            raise ValueError("cuts must start at 0 and end at 1")
        if any(b < a for a, b in zip(self.cuts, self.cuts[1:])):
            raise ValueError("cuts must be nondecreasing")
        if any(s < 0 for s in self.shares):
            raise ValueError("shares must be nonnegative")
        return self


class ResponseSet(BaseModel):
    """最佳回應集合：有限點集或閉區間"""
    model_config = {"frozen": True}

    kind: Literal["points", "interval"]
    points: Tuple[float, ...] = ()
    interval: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _check_response(self) -> "ResponseSet":
        if self.kind == "points":
            if not self.points or self.interval is not None:
                raise ValueError("a point-set response needs points and no interval")
            if list(self.points) != sorted(self.points):
                raise ValueError("response points must be sorted")
            values = self.points
        else:
            if self.interval is None or self.points:
                raise ValueError("an interval response needs an interval and no points")
            if self.interval[0] > self.interval[1]:
                raise ValueError("interval response must have lo <= hi")
            values = self.interval
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError("responses must lie in [0, 1]")
        return self

    @classmethod
    def of_points(cls, values, dedupe_tol: float = DEDUPE_TOL) -> "ResponseSet":
        unique: List[float] = []
        for v in sorted(float(v) for v in values):
            if not unique or v - unique[-1] > dedupe_tol:
                unique.append(v)
        return cls(kind="points", points=tuple(unique))

    @classmethod
    def of_interval(cls, lo: float, hi: float) -> "ResponseSet":
        return cls(kind="interval", interval=(float(lo), float(hi)))

    @property
    def lo(self) -> float:
        return self.points[0] if self.kind == "points" else self.interval[0]

    @property
    def hi(self) -> float:
        return self.points[-1] if self.kind == "points" else self.interval[1]

    def values(self) -> Tuple[float, ...]:
        return self.points if self.kind == "points" else self.interval

    def contains(self, x: float, tol: float = 0.0) -> bool:
        if self.kind == "points":
            return any(abs(x - p) <= tol for p in self.points)
        return self.interval[0] - tol <= x <= self.interval[1] + tol

    def as_choice_set(self) -> ChoiceSet:
        if self.kind == "points":
            return ChoiceSet.points(self.points)
        return ChoiceSet.interval(*self.interval)

    def mirror(self) -> "ResponseSet":
        if self.kind == "points":
            return ResponseSet(kind="points", points=tuple(1.0 - p for p in reversed(self.points)))
        lo, hi = self.interval
        return ResponseSet(kind="interval", interval=(1.0 - hi, 1.0 - lo))


class BeliefRegion(BaseModel):
    """三廠商對稱情形下化簡後的信念區域：c_l <= c_r 且 c_l >= 1 - c_r"""
    model_config = {"frozen": True}

    c_l: float
    c_r: float

    @model_validator(mode="after")
    def _check_region(self) -> "BeliefRegion":
        if not (0.0 <= self.c_l <= 1.0 and 0.0 <= self.c_r <= 1.0):
            raise ValueError("belief locations must lie in [0, 1]")
        if self.c_l > self.c_r + BOUNDARY_TOL or self.c_l < 1.0 - self.c_r - BOUNDARY_TOL:
            raise ValueError(f"belief ({self.c_l}, {self.c_r}) is outside the reduced domain")
        return self


class RegionBoundaries(BaseModel):
    """三廠商反應對應的分段邊界常數"""
    model_config = {"frozen": True}

    a: float
    r_high: float = Field(description="(1+2a)/(1+3a)，情形 1/4 與 3/6 的分界")
    r_plateau: float = Field(description="(3+2a)/(4+3a)，區域 4 開始出現的 c_r")
    r_mid: float = Field(description="(1+4a+2a^2)/(2+7a+3a^2)，情形 5 與 2/6 的分界")
    l_high_at_one: float = Field(description="c_r = 1 時情形 1 的 c_l 下界")
    l_plateau_at_one: float = Field(description="c_r = 1 時區域 4 的 c_l 上界")
    l_plateau_corner: float = Field(description="1 - r_plateau = (1+a)/(4+3a)")
    l_mid_corner: float = Field(description="1 - r_mid")

    def case1_lower(self, c_r: float) -> float:
        a = self.a
        return (2 * a * c_r + c_r + a + 2 * a * a) / (1 + 3 * a + 3 * a * a)

    def case2_upper(self, c_r: float) -> float:
        a = self.a
        return (4 * a * c_r + 3 * a * a * c_r + c_r - a - 2 * a * a) / (1 + 3 * a)

    def plateau_upper(self, c_r: float) -> float:
        a = self.a
        return (a + c_r) / (3 + 3 * a)


class RoundState(BaseModel):
    """消去程序某一回合各廠商的存活集合"""
    model_config = {"frozen": True}

    k: int
    sets: Tuple[ChoiceSet, ...]
    rules: Tuple[str, ...] = ()


class TwoFirmRoundState(BaseModel):
    """兩廠商（a_1 < a_2）回合狀態"""
    model_config = {"frozen": True}

    k: int = 0
    p1: ChoiceSet = Field(default_factory=ChoiceSet.unit)
    p2: ChoiceSet = Field(default_factory=ChoiceSet.unit)
    rule_p1: str = "initial"
    rule_p2: str = "initial"

    @property
    def l1(self) -> float:
        return self.p1.lo

    @property
    def l2(self) -> float:
        return self.p2.lo

    @property
    def split(self) -> bool:
        return len(self.p2.intervals) == 2

    @property
    def split_endpoints(self) -> Optional[Tuple[float, float, float, float]]:
        """分裂階段的 (d^l, d^r, u^l, u^r)"""
        if not self.split:
            return None
        (d_l, d_r), (u_l, u_r) = self.p2.intervals
        return d_l, d_r, u_l, u_r

    def to_round(self) -> RoundState:
        return RoundState(k=self.k, sets=(self.p1, self.p2), rules=(self.rule_p1, self.rule_p2))


class ThreeFirmRoundState(BaseModel):
    """三廠商對稱回合狀態，存活集合為 [1-U^k, U^k]"""
    model_config = {"frozen": True}

    k: int = 0
    u_k: float = 1.0

    @field_validator("u_k")
    @classmethod
    def _check_upper(cls, value: float) -> float:
        if not (0.5 < value <= 1.0):
            raise ValueError(f"U^k={value} must lie in (1/2, 1]")
        return value

    @property
    def choice_set(self) -> ChoiceSet:
        return ChoiceSet.interval(1.0 - self.u_k, self.u_k)

    def to_round(self) -> RoundState:
        rule = "initial" if self.k == 0 else "recurrence"
        cs = self.choice_set
        return RoundState(k=self.k, sets=(cs, cs, cs), rules=(rule,) * 3)


TraceKind = Literal["two-firm", "symmetric-two", "three-symmetric", "grid"]


class EliminationTrace(BaseModel):
    """
    消去程序的完整紀錄
    rounds[0] 為初始集合 [0,1]，rounds[k] 為第 k 回合；hausdorff_gaps[k] 為第 k 與 k+1 回合的距離
    """
    model_config = {"frozen": True}

    kind: TraceKind
    inefficiencies: Tuple[float, ...]
    rounds: Tuple[RoundState, ...]
    limit: Tuple[ChoiceSet, ...]
    converged: bool
    converged_at: Optional[int] = None
    hausdorff_gaps: Tuple[float, ...] = ()
    grid_m: Optional[int] = None
    counterexamples: int = 0

    @property
    def n_firms(self) -> int:
        return len(self.limit)

    def is_monotone(self, tol: float) -> bool:
        for prev, cur in zip(self.rounds, self.rounds[1:]):
            if not all(p.contains(c, tol) for p, c in zip(prev.sets, cur.sets)):
                return False
        return True

    def limit_within_rounds(self, tol: float) -> bool:
        return all(
            r.sets[i].contains(self.limit[i], tol)
            for r in self.rounds
            for i in range(self.n_firms)
        )


class Grid(BaseModel):
    """[0,1] 的均勻離散化：m+1 個點 i/m 與最適性容差 eps_opt（市占單位）"""
    model_config = {"frozen": True}

    m: int = Field(ge=2)
    eps_opt: float = Field(ge=0.0)

    @classmethod
    def with_default_eps(cls, m: int, eps_scale: float = EPS_OPT_SCALE) -> "Grid":
        return cls(m=m, eps_opt=eps_scale / m)

    @property
    def step(self) -> float:
        return 1.0 / self.m

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.m + 1, dtype=float) / self.m


class TraceComparison(BaseModel):
    """解析軌跡與網格軌跡的逐回合 Hausdorff 距離"""
    model_config = {"frozen": True}

    round_gaps: Tuple[float, ...]
    limit_gap: float
    threshold: float
    limit_threshold: float
    flagged_rounds: Tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.flagged_rounds and self.limit_gap <= self.limit_threshold


class NashResult(BaseModel):
    """純策略 Nash 均衡檢查結果"""
    model_config = {"frozen": True}

    equilibrium: Optional[Tuple[float, float]] = None
    min_gap: float
    argmin_profile: Tuple[float, float]
    scan_n: int


class CheckResult(BaseModel):
    model_config = {"frozen": True}

    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


class VerificationReport(BaseModel):
    model_config = {"frozen": True}

    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


Command = Literal["shares", "best-response", "reaction-table", "rationalize", "nash", "verify", "sweep"]


class RunConfig(BaseModel):
    """一次 CLI 執行的完整設定；所有預設值都會回寫到輸出標頭"""
    model_config = {"frozen": True}

    command: Command
    n: int = Field(default=2, ge=2)
    a: Tuple[float, ...] = (1.0,)
    pairs: Tuple[Tuple[float, float], ...] = ()
    c: Tuple[float, ...] = ()
    firm: int = Field(default=1, ge=1)
    oracle: bool = False
    method: Literal["analytic", "grid"] = "analytic"
    tol: float = Field(default=ELIMINATION_TOL, gt=0)
    solver_tol: float = Field(default=SOLVER_TOL, gt=0)
    max_rounds: int = Field(default=MAX_ROUNDS, ge=1)
    grid_m: Optional[int] = Field(default=None, ge=2)
    eps_opt: Optional[float] = Field(default=None, ge=0)
    steps: Optional[float] = Field(default=None, gt=0)
    range_from: float = 0.0
    range_to: float = 1.0
    samples: int = Field(default=101, ge=2)
    scan_n: int = Field(default=NASH_SCAN_N, ge=2)
    verify_samples: int = Field(default=VERIFY_SOLVER_SAMPLES, ge=1)
    seed: int = VERIFY_SEED
    workers: int = Field(default=ORACLE_WORKERS, ge=1)
    output_format: Literal["json", "csv"] = "json"
    output_path: Optional[str] = None
    digits: Optional[int] = Field(default=OUTPUT_SIGNIFICANT_DIGITS, ge=1, le=17)

    def settings(self) -> Dict[str, Any]:
        """回寫到報表標頭的有效設定"""
        return self.model_dump(exclude={"command", "output_path"})


class CommandReport(BaseModel):
    """處理器回傳的報表內容，由 ReportService 序列化"""

    command: str
    exit_status: int = 0
    header: Dict[str, Any] = Field(default_factory=dict)
    payload: Dict[str, Any] = Field(default_factory=dict)
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    columns: List[str] = Field(default_factory=list)
    trace: Optional[EliminationTrace] = None


class RunOutcome(BaseModel):
    """一次執行的結果：結束狀態碼、stdout 報表與 stderr 錯誤物件"""
    model_config = {"frozen": True}

    exit_status: int
    output: Optional[str] = None
    error: Optional[str] = None
