"""
最佳回應函數與對應

兩廠商非對稱情形固定 a_1 < a_2；三廠商對稱情形只在化簡後的信念區域
(c_l <= c_r, c_l >= 1 - c_r) 上計算，其餘信念由 normalize_belief 鏡射後處理。
"""
from typing import List, Tuple

from core.exceptions import PreconditionError, ReactionError
from core.models import BeliefRegion, ModelParams, RegionBoundaries, ResponseSet
from utils.config import BOUNDARY_TOL, DEDUPE_TOL, HALF_SNAP_TOL
from utils.logger import logger


def _ordered_two(params: ModelParams) -> Tuple[float, float, float]:
    if params.n != 2:
        raise PreconditionError(f"two-firm responses need n=2, got n={params.n}")
    a1, a2 = params.inefficiencies
    if not a1 < a2:
        raise PreconditionError(
            "asymmetric two-firm responses require a_1 < a_2; "
            "relabel the firms or use reaction_symmetric_two"
        )
    return a1, a2, params.gamma


def _check_location(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise PreconditionError(f"{name}={value} is outside [0, 1]")


def _check_positive(a: float) -> None:
    if not a > 0:
        raise PreconditionError(f"inefficiency a={a} must be positive")


# ---- two firms ----------------------------------------------------------

def reaction_firm1_two(c2: float, params: ModelParams) -> ResponseSet:
    """較有效率的廠商 1 的反應函數：三段連續、嚴格遞增"""
    a1, a2, gamma = _ordered_two(params)
    _check_location(c2, "c2")
    if c2 < a1 / (a1 + a2):
        value = (c2 + a1) / gamma
    elif c2 <= a2 / (a1 + a2):
        value = c2
    else:
        value = (c2 + a2) / gamma
    return ResponseSet.of_points([value])


def reaction_firm2_two(c1: float, params: ModelParams) -> ResponseSet:
    """
    廠商 2 的反應對應
    c_1 < 1/2 時位於其右側，c_1 > 1/2 時位於其左側，c_1 = 1/2 時兩者皆為最適。
    """
    a1, a2, gamma = _ordered_two(params)
    _check_location(c1, "c1")
    if abs(c1 - 0.5) <= HALF_SNAP_TOL:
        return ResponseSet.of_points([(0.5 + a1) / gamma, (0.5 + a2) / gamma])
    if c1 < 0.5:
        return ResponseSet.of_points([(c1 + a2) / gamma])
    return ResponseSet.of_points([(c1 + a1) / gamma])


def reaction_symmetric_two(cj: float, a: float) -> ResponseSet:
    _check_positive(a)
    _check_location(cj, "cj")
    return ResponseSet.of_points([(cj + a) / (1 + 2 * a)])


def reaction_two(firm: int, c_other: float, params: ModelParams) -> ResponseSet:
    """
    依輸入順序（firm 為 0 或 1）選擇對應的兩廠商反應；
    a_1 > a_2 時先交換標籤再呼叫非對稱版本。
    """
    if params.n != 2:
        raise PreconditionError(f"two-firm responses need n=2, got n={params.n}")
    if firm not in (0, 1):
        raise PreconditionError(f"firm index {firm} out of range for two firms")
    a1, a2 = params.inefficiencies
    if a1 == a2:
        return reaction_symmetric_two(c_other, a1)
    ordered = params if a1 < a2 else params.reversed()
    efficient = 0 if a1 < a2 else 1
    if firm == efficient:
        return reaction_firm1_two(c_other, ordered)
    return reaction_firm2_two(c_other, ordered)


# ---- three symmetric firms ----------------------------------------------

def normalize_belief(c_l: float, c_r: float) -> Tuple[BeliefRegion, bool]:
    """排序信念；若落在 c_l < 1 - c_r 的一側則以 x -> 1-x 鏡射"""
    _check_location(c_l, "c_l")
    _check_location(c_r, "c_r")
    lo, hi = sorted((c_l, c_r))
    if lo < 1.0 - hi - BOUNDARY_TOL:
        return BeliefRegion(c_l=1.0 - hi, c_r=1.0 - lo), True
    return BeliefRegion(c_l=lo, c_r=hi), False


def region_boundaries_three(a: float) -> RegionBoundaries:
    _check_positive(a)
    return RegionBoundaries(
        a=a,
        r_high=(1 + 2 * a) / (1 + 3 * a),
        r_plateau=(3 + 2 * a) / (4 + 3 * a),
        r_mid=(1 + 4 * a + 2 * a * a) / (2 + 7 * a + 3 * a * a),
        l_high_at_one=(1 + 3 * a + 2 * a * a) / (1 + 3 * a + 3 * a * a),
        l_plateau_at_one=(1 + a) / (3 + 3 * a),
        l_plateau_corner=(1 + a) / (4 + 3 * a),
        l_mid_corner=(1 + 3 * a + a * a) / (2 + 7 * a + 3 * a * a),
    )


def classify_belief_three(belief: BeliefRegion, a: float, tol: float = BOUNDARY_TOL) -> Tuple[int, ...]:
    """回傳接受此信念的情形編號 (1..7)；邊界上可能同時有多個"""
    bounds = region_boundaries_three(a)
    c_l, c_r = belief.c_l, belief.c_r
    case1_lower = bounds.case1_lower(c_r)
    case2_upper = bounds.case2_upper(c_r)
    plateau_upper = bounds.plateau_upper(c_r)
    mirror_l = 1.0 - c_r

    def within(value: float, lo: float, hi: float) -> bool:
        return lo - tol <= value <= hi + tol

    rules = (
        (1, within(c_r, bounds.r_high, 1.0) and within(c_l, case1_lower, c_r)),
        (2, within(c_r, bounds.r_mid, bounds.r_plateau) and within(c_l, mirror_l, case2_upper)),
        (3, within(c_r, bounds.r_plateau, bounds.r_high) and within(c_l, plateau_upper, case2_upper)),
        (4, within(c_r, bounds.r_high, 1.0) and within(c_l, plateau_upper, case1_lower)),
        (5, within(c_r, 0.5, bounds.r_mid) and within(c_l, mirror_l, c_r)),
        (6, within(c_r, bounds.r_mid, bounds.r_high) and within(c_l, case2_upper, c_r)),
        (7, within(c_r, bounds.r_plateau, 1.0) and within(c_l, mirror_l, plateau_upper)),
    )
    return tuple(case for case, accepted in rules if accepted)


def _case_value(case: int, c_l: float, c_r: float, a: float) -> float:
    if case == 1:
        return (a + c_l + c_r) / (2 + 3 * a)
    if case in (2, 3, 4):
        return (3 * a * c_l + 2 * c_l + a * c_r + a * a) / (2 + 6 * a + 3 * a * a)
    return (a + 3 * c_l - c_r) / (2 + 3 * a)


def _plateau(c_l: float, c_r: float, a: float) -> Tuple[float, float]:
    denom = 2 + 5 * a + 3 * a * a
    lower = (2 * c_l + 2 * a * c_l + a * c_r + a * a) / denom
    upper = (a * c_l + 2 * a * c_r + 2 * c_r + 2 * a + 2 * a * a) / denom
    return lower, upper


def reaction_three_symmetric(belief: BeliefRegion, a: float) -> ResponseSet:
    """
    三家對稱廠商中廠商 i 對信念 (c_l, c_r) 的反應對應。
    區域 4（情形 7）回傳整段區間 [c_i*, c_i**]，其餘為單點；
    位於邊界時取所有相鄰情形的聯集。
    """
    _check_positive(a)
    cases = classify_belief_three(belief, a)
    if not cases:
        raise ReactionError(f"no case accepts belief ({belief.c_l}, {belief.c_r}) for a={a}")

    points: List[float] = [
        _case_value(case, belief.c_l, belief.c_r, a) for case in cases if case != 7
    ]
    if 7 not in cases:
        return ResponseSet.of_points(points)

    lower, upper = _plateau(belief.c_l, belief.c_r, a)
    stray = [p for p in points if not lower - DEDUPE_TOL <= p <= upper + DEDUPE_TOL]
    if stray:
        logger.error(
            f"Branch union not representable at belief ({belief.c_l}, {belief.c_r}), a={a}: "
            f"cases={cases}, stray points={stray}"
        )
        raise ReactionError("boundary branches disagree with the plateau interval")
    return ResponseSet.of_interval(lower, upper)


def reaction_three(c_l: float, c_r: float, a: float) -> ResponseSet:
    """
    任意信念的反應：先化簡到 reduced domain，必要時把結果鏡射回來。
    信念落在 c_l = 1 - c_r 上時鏡射後仍是同一個信念，因此兩側的單點回應都是最適。
    """
    belief, mirrored = normalize_belief(c_l, c_r)
    response = reaction_three_symmetric(belief, a)
    if mirrored:
        return response.mirror()
    if response.kind == "points" and abs(belief.c_l + belief.c_r - 1.0) <= BOUNDARY_TOL:
        return ResponseSet.of_points(response.points + response.mirror().points)
    return response


def greatest_optimal_choice_three(u: float, a: float) -> float:
    """
    當對手的存活集合為 [1-u, u] 時可達到的最大最適選擇，
    即信念 ((a+u)/(3+3a), u) 下區域 4 的右端點。
    """
    bounds = region_boundaries_three(a)
    if u < bounds.r_plateau - BOUNDARY_TOL or u > 1.0:
        raise PreconditionError(f"u={u} must lie in [{bounds.r_plateau}, 1]")
    _, upper = _plateau(bounds.plateau_upper(u), u, a)
    return upper


def smallest_optimal_choice_three(a: float) -> float:
    """
    信念 (c_l, c_r) 取自極限區間 [(1+a)/(4+3a), (3+2a)/(4+3a)] 時最小的最適選擇 (1+a)/(4+3a)，
    在角落信念 (1-p, p) 取得。整個化簡區域上區域 4 的左端點可以更小（a=1、信念 (0,1) 時為 1/5）。
    """
    return region_boundaries_three(a).l_plateau_corner
