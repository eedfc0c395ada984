from typing import List, Optional, Tuple

import numpy as np

from core.elimination import closed_form_limit, iterate
from core.exceptions import PreconditionError
from core.market import check_assignment_stability, solve_shares_batch
from core.models import (
    CheckResult,
    EliminationTrace,
    Grid,
    LocationProfile,
    MarketOutcome,
    ModelParams,
    TraceComparison,
    VerificationReport,
)
from services.oracle_service import OracleService
from utils.config import (
    COMPARE_GRID_STEPS,
    ELIMINATION_TOL,
    INVARIANT_TOL,
    MAX_ROUNDS,
    ORACLE_ELIMINATION_M,
    ORACLE_ELIMINATION_M_THREE,
    ORACLE_WORKERS,
    SOLVER_RESIDUAL_TOL,
    VERIFY_CLOSED_FORM_TOL,
    VERIFY_SEED,
    VERIFY_SOLVER_SAMPLES,
)
from utils.logger import logger

SHARE_SUM_TOL = 1e-10
STABILITY_TOL = 1e-9
SYMMETRY_TOL = 1e-9
STABILITY_GRID_N = 201


def contraction_factor(params: ModelParams) -> float:
    """解析遞迴式的收縮率"""
    if params.n == 2:
        a1, a2 = params.inefficiencies
        if a1 == a2:
            return 1.0 / (1.0 + 2.0 * a1)
        return 1.0 / np.sqrt(params.gamma)
    if params.n == 3 and params.is_symmetric:
        a = params.inefficiencies[0]
        return (3 + 2 * a) / (3 * (1 + a) ** 2)
    raise PreconditionError(f"no contraction factor for a={list(params.inefficiencies)}")


def default_compare_steps(params: ModelParams) -> float:
    """三廠商的網格誤差沿遞迴式累積，放寬為 2 + 1/(1-rho) 個網格步長"""
    if params.n == 3:
        return COMPARE_GRID_STEPS + 1.0 / (1.0 - contraction_factor(params))
    return COMPARE_GRID_STEPS


def default_grid_m(params: ModelParams) -> int:
    return ORACLE_ELIMINATION_M_THREE if params.n == 3 else ORACLE_ELIMINATION_M


def _check(name: str, value: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, value=float(value), threshold=float(threshold), passed=bool(value <= threshold), detail=detail)


class VerificationService:
    """verify 指令背後的不變量檢查組合"""

    @staticmethod
    def check_trace(trace: EliminationTrace, params: ModelParams) -> List[CheckResult]:
        checks = [
            _check("trace_converged", 0.0 if trace.converged else 1.0, 0.0, f"converged_at={trace.converged_at}"),
            _check("monotone_shrinkage", 0.0 if trace.is_monotone(INVARIANT_TOL) else 1.0, 0.0),
            _check("limit_within_rounds", 0.0 if trace.limit_within_rounds(INVARIANT_TOL) else 1.0, 0.0),
        ]

        asymmetry = max(s.hausdorff(s.mirror()) for r in trace.rounds for s in r.sets)
        checks.append(_check("symmetry_about_half", asymmetry, INVARIANT_TOL))

        closed = closed_form_limit(params)
        gap = max(lim.hausdorff(c) for lim, c in zip(trace.limit, closed))
        checks.append(_check(
            "closed_form_limit", gap, VERIFY_CLOSED_FORM_TOL,
            " / ".join(str(c) for c in closed[:2]),
        ))

        if trace.kind == "two-firm":
            checks.append(VerificationService._check_copy_rule(trace, params))
        if trace.kind == "three-symmetric":
            checks.append(VerificationService._check_three_decay(trace, params))
        return checks

    @staticmethod
    def _check_copy_rule(trace: EliminationTrace, params: ModelParams) -> CheckResult:
        """copy 回合中較有效率廠商的集合與對手前一回合的集合完全相同"""
        efficient = 0 if params.inefficiencies[0] < params.inefficiencies[1] else 1
        other = 1 - efficient
        mismatches = sum(
            1
            for prev, cur in zip(trace.rounds, trace.rounds[1:])
            if cur.rules[efficient] == "copy" and cur.sets[efficient] != prev.sets[other]
        )
        copies = sum(1 for r in trace.rounds if r.rules[efficient] == "copy")
        return _check("copy_rule", float(mismatches), 0.0, f"{copies} copy rounds")

    @staticmethod
    def _check_three_decay(trace: EliminationTrace, params: ModelParams) -> CheckResult:
        """U^k - p = rho (U^{k-1} - p)"""
        a = params.inefficiencies[0]
        rho = contraction_factor(params)
        fixed = (3 + 2 * a) / (4 + 3 * a)
        uppers = [r.sets[0].hi for r in trace.rounds]
        worst = max(
            (abs((u - fixed) - rho * (prev - fixed)) for prev, u in zip(uppers, uppers[1:])),
            default=0.0,
        )
        return _check("geometric_decay", worst, 1e-12)

    @staticmethod
    def check_solver(
        params: ModelParams,
        samples: int = VERIFY_SOLVER_SAMPLES,
        seed: int = VERIFY_SEED
    ) -> List[CheckResult]:
        """隨機策略組合上的市占加總、無異條件殘差、分配穩定性與鏡射/置換對稱"""
        rng = np.random.default_rng(seed)
        n = params.n
        a = np.asarray(params.inefficiencies)
        locations = rng.uniform(0.0, 1.0, size=(samples, n))

        cuts, shares, residual = solve_shares_batch(locations, a)
        sum_error = float(np.max(np.abs(shares.sum(axis=1) - 1.0)))

        _, mirrored, _ = solve_shares_batch(1.0 - locations, a)
        mirror_error = float(np.max(np.abs(mirrored - shares)))

        perm = rng.permutation(n)
        _, permuted, _ = solve_shares_batch(locations[:, perm], a[perm])
        permutation_error = float(np.max(np.abs(permuted - shares[:, perm])))

        stability = 0.0
        for row in range(samples):
            profile = LocationProfile(locations=tuple(float(x) for x in locations[row]))
            outcome = MarketOutcome(
                cuts=tuple(float(x) for x in cuts[row]),
                shares=tuple(float(s) for s in shares[row]),
                residual=float(residual[row]),
                order=profile.order,
            )
            stability = max(stability, check_assignment_stability(profile, outcome, params, STABILITY_GRID_N))

        limit = SOLVER_RESIDUAL_TOL * (1.0 + float(a.max()))
        return [
            _check("shares_sum_to_one", sum_error, SHARE_SUM_TOL, f"{samples} profiles, seed {seed}"),
            _check("equation_residual", float(residual.max()), limit),
            _check("assignment_stability", stability, STABILITY_TOL),
            _check("mirror_symmetry", mirror_error, SYMMETRY_TOL),
            _check("permutation_symmetry", permutation_error, SYMMETRY_TOL),
        ]

    @staticmethod
    def check_oracle(
        trace: EliminationTrace,
        params: ModelParams,
        grid: Grid,
        steps: float,
        max_rounds: int,
        workers: int
    ) -> Tuple[List[CheckResult], EliminationTrace, TraceComparison]:
        grid_trace = OracleService.grid_eliminate(params, params.n, grid, max_rounds, workers)
        comparison = OracleService.compare_traces(trace, grid_trace, grid, steps=steps)
        worst_round = max(comparison.round_gaps, default=0.0)
        checks = [
            _check("grid_trace_converged", 0.0 if grid_trace.converged else 1.0, 0.0, f"m={grid.m}"),
            _check(
                "grid_round_gaps", worst_round, comparison.threshold,
                f"flagged rounds {list(comparison.flagged_rounds)}",
            ),
            _check("grid_limit_gap", comparison.limit_gap, comparison.limit_threshold),
        ]
        return checks, grid_trace, comparison

    @staticmethod
    def run(
        params: ModelParams,
        tol: float = ELIMINATION_TOL,
        max_rounds: int = MAX_ROUNDS,
        grid: Optional[Grid] = None,
        steps: Optional[float] = None,
        samples: int = VERIFY_SOLVER_SAMPLES,
        seed: int = VERIFY_SEED,
        workers: int = ORACLE_WORKERS
    ) -> Tuple[VerificationReport, EliminationTrace, EliminationTrace, TraceComparison]:
        """
        完整驗證：解析消去軌跡的不變量、與封閉解的一致性、網格 oracle 比對以及求解器抽樣檢查。
        網格回合中的反例只記錄在報表中，不影響通過與否。
        """
        grid = grid or Grid.with_default_eps(default_grid_m(params))
        steps = steps if steps is not None else default_compare_steps(params)

        logger.info(f"Verifying a={list(params.inefficiencies)}: grid m={grid.m}, steps={steps:.4g}, samples={samples}")
        trace = iterate(params, tol, max_rounds)
        checks = VerificationService.check_trace(trace, params)
        oracle_checks, grid_trace, comparison = VerificationService.check_oracle(
            trace, params, grid, steps, max_rounds, workers
        )
        checks.extend(oracle_checks)
        checks.extend(VerificationService.check_solver(params, samples, seed))

        report = VerificationReport(checks=tuple(checks))
        if report.passed:
            logger.info(f"Verification passed: {len(checks)} checks")
        else:
            logger.warning(f"Verification failed: {[c.name for c in report.failures]}")
        return report, trace, grid_trace, comparison
