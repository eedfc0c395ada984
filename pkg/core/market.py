"""
市場核心：求解消費者無異條件方程組

給定排序後的位置 c_1 <= ... <= c_n 與係數 a_i，分界點 x_1..x_{n-1} 滿足
    |c_i - x_i| + a_i (x_i - x_{i-1}) = |c_{i+1} - x_i| + a_{i+1} (x_{i+1} - x_i)
每一列對 x_{i+1} 為線性，因此固定 x_1 後可一路推進到 x_n，再對 x_1 做二分搜尋
使 x_n = 1。二分結束後依分界點的符號型態解一次三對角線性系統以消除射擊法的誤差放大。
"""
from typing import Tuple

import numpy as np

from core.exceptions import PreconditionError, SolverConvergenceError
from core.models import LocationProfile, MarketOutcome, ModelParams
from utils.config import SOLVER_MAX_ITER, SOLVER_RESIDUAL_TOL, SOLVER_TOL
from utils.logger import logger


def _propagate(x1: np.ndarray, c: np.ndarray, a: np.ndarray) -> np.ndarray:
    """由 x_1 推進整列分界點（不裁切），回傳 (B, n+1)"""
    B, n = c.shape
    cuts = np.empty((B, n + 1))
    cuts[:, 0] = 0.0
    cuts[:, 1] = x1
    for i in range(1, n):
        x = cuts[:, i]
        gap = np.abs(c[:, i - 1] - x) - np.abs(c[:, i] - x) + a[:, i - 1] * (x - cuts[:, i - 1])
        cuts[:, i + 1] = x + gap / a[:, i]
    return cuts


def _residuals(cuts: np.ndarray, c: np.ndarray, a: np.ndarray) -> np.ndarray:
    """每列無異條件的最大絕對誤差"""
    x = cuts[:, 1:-1]
    left = np.abs(c[:, :-1] - x) + a[:, :-1] * (x - cuts[:, :-2])
    right = np.abs(c[:, 1:] - x) + a[:, 1:] * (cuts[:, 2:] - x)
    return np.max(np.abs(left - right), axis=1)


def _clamp(cuts: np.ndarray) -> np.ndarray:
    out = np.clip(cuts, 0.0, 1.0)
    out[:, 0] = 0.0
    out[:, -1] = 1.0
    return np.maximum.accumulate(out, axis=1)


def _polish(cuts: np.ndarray, c: np.ndarray, a: np.ndarray) -> np.ndarray:
    """
    以目前分界點的符號型態建立三對角系統並用 Thomas 演算法求解。
    對角線 s - t + a_i + a_{i+1} >= a_i + a_{i+1}，系統為對角佔優。
    """
    B, n = c.shape
    x = cuts[:, 1:n]
    c_left, c_right = c[:, :-1], c[:, 1:]
    a_left, a_right = a[:, :-1], a[:, 1:]
    s = np.where(x >= c_left, 1.0, -1.0)
    t = np.where(x >= c_right, 1.0, -1.0)

    diag = s - t + a_left + a_right
    rhs = s * c_left - t * c_right
    rhs[:, -1] += a_right[:, -1]

    size = n - 1
    cp = np.zeros((B, size))
    dp = np.zeros((B, size))
    cp[:, 0] = -a_right[:, 0] / diag[:, 0]
    dp[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, size):
        denom = diag[:, i] + a_left[:, i] * cp[:, i - 1]
        cp[:, i] = -a_right[:, i] / denom
        dp[:, i] = (rhs[:, i] + a_left[:, i] * dp[:, i - 1]) / denom

    solution = np.empty((B, size))
    solution[:, -1] = dp[:, -1]
    for i in range(size - 2, -1, -1):
        solution[:, i] = dp[:, i] - cp[:, i] * solution[:, i + 1]

    polished = np.empty_like(cuts)
    polished[:, 0] = 0.0
    polished[:, 1:n] = solution
    polished[:, n] = 1.0
    return polished


def _solve_sorted(
    c: np.ndarray,
    a: np.ndarray,
    tol: float,
    max_iter: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    B = c.shape[0]
    lo = np.zeros(B)
    hi = np.ones(B)
    x1 = np.full(B, 0.5)
    active = np.ones(B, dtype=bool)

    iterations = 0
    while iterations < max_iter and active.any():
        iterations += 1
        mid = 0.5 * (lo + hi)
        shoot = _propagate(mid, c, a)[:, -1] - 1.0
        x1 = np.where(active, mid, x1)
        # x_n is increasing in x_1
        lo = np.where(active & (shoot < 0.0), mid, lo)
        hi = np.where(active & (shoot > 0.0), mid, hi)
        following = 0.5 * (lo + hi)
        stalled = (following <= lo) | (following >= hi)
        active &= ~((np.abs(shoot) <= tol) | stalled)

    bisected = _clamp(_propagate(x1, c, a))
    polished = _clamp(_polish(bisected, c, a))
    res_bisected = _residuals(bisected, c, a)
    res_polished = _residuals(polished, c, a)
    use_polished = res_polished <= res_bisected
    cuts = np.where(use_polished[:, None], polished, bisected)
    residual = np.where(use_polished, res_polished, res_bisected)
    return cuts, residual, active


def solve_shares_batch(
    locations,
    inefficiencies,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER,
    check: bool = True
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    向量化的無異條件求解

    Args:
        locations: (B, n) 位置，每列依輸入順序
        inefficiencies: (n,) 或 (B, n) 係數，依輸入順序
        tol: 射擊殘差容差
        max_iter: 二分搜尋上限
        check: 是否檢查最終殘差

    Returns:
        (cuts (B, n+1) 依排序順序, shares (B, n) 依輸入順序, residuals (B,))
    """
    loc = np.atleast_2d(np.asarray(locations, dtype=float))
    B, n = loc.shape
    if n < 2:
        raise PreconditionError("at least two firms are required")
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if loc.size and (loc.min() < 0.0 or loc.max() > 1.0):
        raise PreconditionError("locations must lie in [0, 1]")

    a = np.asarray(inefficiencies, dtype=float)
    if a.ndim == 1:
        if a.shape[0] != n:
            raise PreconditionError(f"dimension mismatch: {n} locations, {a.shape[0]} inefficiencies")
        a = np.broadcast_to(a, (B, n))
    elif a.shape != (B, n):
        raise PreconditionError(f"dimension mismatch: locations {loc.shape}, inefficiencies {a.shape}")
    if np.any(a <= 0):
        raise PreconditionError("inefficiencies must be positive")

    order = np.argsort(loc, axis=1, kind="stable")
    c_sorted = np.take_along_axis(loc, order, axis=1)
    a_sorted = np.take_along_axis(a, order, axis=1)

    cuts, residual, unfinished = _solve_sorted(c_sorted, a_sorted, tol, max_iter)

    if check:
        limit = max(SOLVER_RESIDUAL_TOL, tol) * (1.0 + a_sorted.max(axis=1))
        bad = residual > limit
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            logger.error(
                f"Share solver failed on {int(bad.sum())} of {B} profiles; "
                f"first: c={loc[row].tolist()}, residual={residual[row]:.3e}, "
                f"bisection unfinished={bool(unfinished[row])}"
            )
            raise SolverConvergenceError(
                f"indifference residual {residual[row]:.3e} exceeds {limit[row]:.3e} after {max_iter} iterations"
            )

    shares_sorted = np.diff(cuts, axis=1)
    shares = np.empty_like(shares_sorted)
    np.put_along_axis(shares, order, shares_sorted, axis=1)
    return cuts, shares, residual


def solve_cuts(
    profile: LocationProfile,
    params: ModelParams,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER
) -> MarketOutcome:
    """求解單一策略組合的分界點與市占"""
    if profile.n != params.n:
        raise PreconditionError(
            f"dimension mismatch: {profile.n} locations for {params.n} firms"
        )
    cuts, shares, residual = solve_shares_batch(
        np.asarray([profile.locations]), np.asarray(params.inefficiencies), tol, max_iter
    )
    return MarketOutcome(
        cuts=tuple(float(x) for x in cuts[0]),
        shares=tuple(float(s) for s in shares[0]),
        residual=float(residual[0]),
        order=profile.order,
    )


def equation_residual(profile: LocationProfile, outcome: MarketOutcome, params: ModelParams) -> float:
    """在 outcome 的分界點上重新計算無異條件的最大絕對誤差"""
    order = list(outcome.order)
    c = np.asarray([[profile.locations[i] for i in order]])
    a = np.asarray([[params.inefficiencies[i] for i in order]])
    return float(_residuals(np.asarray([outcome.cuts]), c, a)[0])


def consumer_cost(
    x: float,
    firm: int,
    profile: LocationProfile,
    outcome: MarketOutcome,
    params: ModelParams
) -> float:
    """位於 x 的消費者前往 firm 的總成本 |c_firm - x| + a_firm * s_firm"""
    if not 0 <= firm < params.n:
        raise PreconditionError(f"firm index {firm} out of range for {params.n} firms")
    if not 0.0 <= x <= 1.0:
        raise PreconditionError(f"consumer position {x} is outside [0, 1]")
    return abs(profile.locations[firm] - x) + params.inefficiencies[firm] * outcome.shares[firm]


def check_assignment_stability(
    profile: LocationProfile,
    outcome: MarketOutcome,
    params: ModelParams,
    grid_n: int
) -> float:
    """
    在 grid_n 個均勻分布的消費者上，回傳（被分配廠商的成本 - 所有廠商中最低成本）的最大值
    """
    if grid_n < 2:
        raise PreconditionError(f"grid_n must be at least 2, got {grid_n}")
    consumers = np.linspace(0.0, 1.0, grid_n)
    locations = np.asarray(profile.locations)
    waiting = np.asarray(params.inefficiencies) * np.asarray(outcome.shares)
    costs = np.abs(locations[None, :] - consumers[:, None]) + waiting[None, :]

    position = np.searchsorted(np.asarray(outcome.cuts[1:-1]), consumers, side="left")
    assigned = np.asarray(outcome.order)[position]
    advantage = costs[np.arange(grid_n), assigned] - costs.min(axis=1)
    return float(advantage.max())
