"""
點可合理化消去程序（解析版本）

兩廠商非對稱情形依區間遞迴式逐回合更新，三廠商對稱情形只需追蹤上端點 U^k。
rounds[0] 一律是初始集合 [0,1]。
"""
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.choice_set import ChoiceSet
from core.exceptions import InvariantViolation, PreconditionError
from core.models import (
    EliminationTrace,
    ModelParams,
    NashResult,
    RoundState,
    ThreeFirmRoundState,
    TwoFirmRoundState,
)
from core.reaction import reaction_firm2_two, reaction_symmetric_two
from utils.config import (
    ELIMINATION_TOL,
    INVARIANT_TOL,
    LIMIT_COLLAPSE_FACTOR,
    MAX_ROUNDS,
    NASH_GAP_TOL,
    NASH_SCAN_N,
)
from utils.logger import logger


def _ordered_two(params: ModelParams) -> Tuple[float, float, float]:
    if params.n != 2:
        raise PreconditionError(f"two-firm elimination needs n=2, got n={params.n}")
    a1, a2 = params.inefficiencies
    if not a1 < a2:
        raise PreconditionError("two-firm elimination requires a_1 < a_2; use iterate_symmetric_two for a_1 = a_2")
    return a1, a2, params.gamma


def _check_iteration_args(tol: float, max_rounds: int) -> None:
    if not tol > 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if max_rounds < 1:
        raise PreconditionError(f"max_rounds must be at least 1, got {max_rounds}")


def _settled(gap: float, rho: float, tol: float) -> bool:
    """後驗誤差界：收縮率 rho 的迭代與極限的距離不超過 rho/(1-rho) * gap"""
    return gap <= tol and gap * rho / (1.0 - rho) <= tol


# ---- two asymmetric firms -----------------------------------------------

def _check_two_firm_state(previous: TwoFirmRoundState, state: TwoFirmRoundState) -> None:
    for name, prev_set, new_set in (("P1", previous.p1, state.p1), ("P2", previous.p2, state.p2)):
        if not new_set.is_symmetric(INVARIANT_TOL):
            raise InvariantViolation(f"{name} at round {state.k} is not symmetric about 1/2: {new_set}")
        if not prev_set.contains(new_set, INVARIANT_TOL):
            raise InvariantViolation(
                f"{name} at round {state.k} is not contained in round {previous.k}: {new_set} vs {prev_set}"
            )


def _firm2_update(state: TwoFirmRoundState, a1: float, a2: float, gamma: float) -> Tuple[ChoiceSet, str]:
    p1 = state.p1
    if p1.is_interval:
        l1 = state.l1
        if l1 < 0.5 - (a2 - a1):
            return ChoiceSet.interval((l1 + a2) / gamma, (1 - l1 + a1) / gamma), "wide"
        if l1 <= 0.5 - (a2 - a1) / 2:
            return ChoiceSet.interval((0.5 + a1) / gamma, (0.5 + a2) / gamma), "centre"
        return ChoiceSet.from_intervals([
            ((0.5 + a1) / gamma, (1 - l1 + a1) / gamma),
            ((l1 + a2) / gamma, (0.5 + a2) / gamma),
        ]), "two-sided"

    # split regime: the part left of 1/2 is answered from the right and vice versa
    images = []
    for lo, hi in p1.intervals:
        if hi < 0.5:
            images.append(((lo + a2) / gamma, (hi + a2) / gamma))
        elif lo > 0.5:
            images.append(((lo + a1) / gamma, (hi + a1) / gamma))
        else:
            raise InvariantViolation(f"split-regime interval [{lo}, {hi}] straddles 1/2")
    return ChoiceSet.from_intervals(images), "split"


def round_two_firm(state: TwoFirmRoundState, params: ModelParams) -> TwoFirmRoundState:
    """
    一回合更新（a_1 < a_2）
    廠商 1：min P_2 >= a_1/(a_1+a_2) 時複製 P_2，否則取 [(l_2+a_1)/γ, (1-l_2+a_2)/γ]
    廠商 2：依 l_1 與 1/2-(a_2-a_1)、1/2-(a_2-a_1)/2 的關係選擇單段、中央段或兩段的像，
            P_1 分裂為兩段後改用兩段的像
    """
    a1, a2, gamma = _ordered_two(params)
    if not (state.p1.is_symmetric(INVARIANT_TOL) and state.p2.is_symmetric(INVARIANT_TOL)):
        raise InvariantViolation(f"round {state.k} state is not symmetric about 1/2")

    l2 = state.l2
    if l2 >= a1 / (a1 + a2):
        p1, rule_p1 = state.p2, "copy"
    else:
        p1, rule_p1 = ChoiceSet.interval((l2 + a1) / gamma, (1 - l2 + a2) / gamma), "image"

    p2, rule_p2 = _firm2_update(state, a1, a2, gamma)

    following = TwoFirmRoundState(k=state.k + 1, p1=p1, p2=p2, rule_p1=rule_p1, rule_p2=rule_p2)
    _check_two_firm_state(state, following)
    return following


def iterate_two_firm(
    params: ModelParams,
    tol: float = ELIMINATION_TOL,
    max_rounds: int = MAX_ROUNDS
) -> EliminationTrace:
    """迭代兩廠商非對稱消去程序；a_1 > a_2 時內部交換標籤，輸出依呼叫者的順序"""
    _check_iteration_args(tol, max_rounds)
    if params.n != 2:
        raise PreconditionError(f"two-firm elimination needs n=2, got n={params.n}")
    a1, a2 = params.inefficiencies
    if a1 == a2:
        raise PreconditionError("a_1 = a_2: use iterate_symmetric_two")
    swapped = a1 > a2
    work = params.reversed() if swapped else params
    rho = 1.0 / math.sqrt(work.gamma)

    state = TwoFirmRoundState()
    states = [state]
    gaps: List[float] = []
    converged_at: Optional[int] = None
    for _ in range(max_rounds):
        following = round_two_firm(state, work)
        gap = max(state.p1.hausdorff(following.p1), state.p2.hausdorff(following.p2))
        gaps.append(gap)
        states.append(following)
        state = following
        logger.debug(f"Two-firm round {state.k}: P1={state.p1} ({state.rule_p1}), P2={state.p2} ({state.rule_p2})")
        if state.split:
            d_l, d_r, u_l, u_r = state.split_endpoints
            logger.debug(f"Two-firm round {state.k} P2 pieces: d=[{d_l}, {d_r}], u=[{u_l}, {u_r}]")
        width = max(state.p1.max_width, state.p2.max_width)
        if _settled(gap, rho, tol) and width <= tol:
            converged_at = state.k
            break

    def relabel(pair: Tuple):
        return tuple(reversed(pair)) if swapped else tuple(pair)

    rounds = tuple(
        RoundState(k=s.k, sets=relabel((s.p1, s.p2)), rules=relabel((s.rule_p1, s.rule_p2)))
        for s in states
    )
    collapse = LIMIT_COLLAPSE_FACTOR * tol
    limit = relabel((state.p1.collapse(collapse), state.p2.collapse(collapse)))
    return _finish_trace("two-firm", params.inefficiencies, rounds, limit, converged_at, gaps)


# ---- two symmetric firms ------------------------------------------------

def iterate_symmetric_two(
    a: float,
    tol: float = ELIMINATION_TOL,
    max_rounds: int = MAX_ROUNDS
) -> EliminationTrace:
    """對稱兩廠商：[l, u] -> [(l+a)/(1+2a), (u+a)/(1+2a)]"""
    if not a > 0:
        raise PreconditionError(f"inefficiency a={a} must be positive")
    _check_iteration_args(tol, max_rounds)
    rho = 1.0 / (1.0 + 2.0 * a)

    current = ChoiceSet.unit()
    rounds = [RoundState(k=0, sets=(current, current), rules=("initial", "initial"))]
    gaps: List[float] = []
    converged_at: Optional[int] = None
    for k in range(1, max_rounds + 1):
        following = ChoiceSet.interval(
            reaction_symmetric_two(current.lo, a).lo,
            reaction_symmetric_two(current.hi, a).lo,
        )
        gap = current.hausdorff(following)
        gaps.append(gap)
        rounds.append(RoundState(k=k, sets=(following, following), rules=("contraction", "contraction")))
        current = following
        if _settled(gap, rho, tol) and current.max_width <= tol:
            converged_at = k
            break

    limit_set = current.collapse(LIMIT_COLLAPSE_FACTOR * tol)
    return _finish_trace("symmetric-two", (a, a), tuple(rounds), (limit_set, limit_set), converged_at, gaps)


# ---- three symmetric firms ----------------------------------------------

def _three_fixed_point(a: float) -> float:
    return (3 + 2 * a) / (4 + 3 * a)


def round_three_symmetric(state: ThreeFirmRoundState, a: float) -> ThreeFirmRoundState:
    """U^k = (3+2a)(a+U^{k-1}) / (3(1+a)^2)"""
    if not a > 0:
        raise PreconditionError(f"inefficiency a={a} must be positive")
    fixed = _three_fixed_point(a)
    if state.u_k < fixed - INVARIANT_TOL:
        raise PreconditionError(f"U^{state.k}={state.u_k} is below the fixed point {fixed}")

    u = (3 + 2 * a) * (a + state.u_k) / (3 * (1 + a) ** 2)
    if u > state.u_k + INVARIANT_TOL or u < fixed - INVARIANT_TOL:
        raise InvariantViolation(f"U^{state.k + 1}={u} breaks monotone convergence to {fixed}")
    return ThreeFirmRoundState(k=state.k + 1, u_k=u)


def iterate_three_symmetric(
    a: float,
    tol: float = ELIMINATION_TOL,
    max_rounds: int = MAX_ROUNDS
) -> EliminationTrace:
    if not a > 0:
        raise PreconditionError(f"inefficiency a={a} must be positive")
    _check_iteration_args(tol, max_rounds)
    rho = (3 + 2 * a) / (3 * (1 + a) ** 2)

    state = ThreeFirmRoundState()
    rounds = [state.to_round()]
    gaps: List[float] = []
    converged_at: Optional[int] = None
    for _ in range(max_rounds):
        following = round_three_symmetric(state, a)
        gap = state.choice_set.hausdorff(following.choice_set)
        gaps.append(gap)
        rounds.append(following.to_round())
        state = following
        if _settled(gap, rho, tol):
            converged_at = state.k
            break

    limit_set = state.choice_set.collapse(LIMIT_COLLAPSE_FACTOR * tol)
    return _finish_trace("three-symmetric", (a, a, a), tuple(rounds), (limit_set,) * 3, converged_at, gaps)


# ---- shared -------------------------------------------------------------

def _finish_trace(
    kind: str,
    inefficiencies: Tuple[float, ...],
    rounds: Tuple[RoundState, ...],
    limit: Tuple[ChoiceSet, ...],
    converged_at: Optional[int],
    gaps: List[float]
) -> EliminationTrace:
    converged = converged_at is not None
    if converged:
        logger.info(f"{kind} elimination for a={list(inefficiencies)} converged at round {converged_at}")
    else:
        logger.warning(
            f"{kind} elimination for a={list(inefficiencies)} did not converge in {len(rounds) - 1} rounds; "
            f"last gap {gaps[-1] if gaps else float('nan'):.3e}"
        )
    return EliminationTrace(
        kind=kind,
        inefficiencies=tuple(inefficiencies),
        rounds=rounds,
        limit=tuple(limit),
        converged=converged,
        converged_at=converged_at,
        hausdorff_gaps=tuple(gaps),
    )


def iterate(
    params: ModelParams,
    tol: float = ELIMINATION_TOL,
    max_rounds: int = MAX_ROUNDS
) -> EliminationTrace:
    """依廠商數與對稱性選擇消去程序"""
    if params.n == 2:
        a1, a2 = params.inefficiencies
        if a1 == a2:
            return iterate_symmetric_two(a1, tol, max_rounds)
        return iterate_two_firm(params, tol, max_rounds)
    if params.n == 3:
        if not params.is_symmetric:
            raise PreconditionError("three-firm elimination is only available for equal inefficiencies")
        return iterate_three_symmetric(params.inefficiencies[0], tol, max_rounds)
    raise PreconditionError(f"elimination is implemented for two or three firms, got n={params.n}")


def closed_form_limit_two(params: ModelParams) -> ChoiceSet:
    if params.n != 2:
        raise PreconditionError(f"two-firm limit needs n=2, got n={params.n}")
    a1, a2 = params.inefficiencies
    if a1 == a2:
        return ChoiceSet.points([0.5])
    total = a1 + a2 + 2
    return ChoiceSet.points([(a1 + 1) / total, (a2 + 1) / total])


def closed_form_limit_three(a: float) -> ChoiceSet:
    if not a > 0:
        raise PreconditionError(f"inefficiency a={a} must be positive")
    return ChoiceSet.interval((1 + a) / (4 + 3 * a), (3 + 2 * a) / (4 + 3 * a))


def closed_form_limit(params: ModelParams) -> Tuple[ChoiceSet, ...]:
    """每家廠商的解析極限集合"""
    if params.n == 2:
        limit = closed_form_limit_two(params)
        return (limit, limit)
    if params.n == 3 and params.is_symmetric:
        limit = closed_form_limit_three(params.inefficiencies[0])
        return (limit,) * 3
    raise PreconditionError(f"no closed-form limit for a={list(params.inefficiencies)}")


# ---- pure Nash ----------------------------------------------------------

def _firm1_preimage(c1: float, a1: float, a2: float, gamma: float) -> float:
    """
    廠商 1 的反應函數嚴格遞增；回傳使其反應等於 c1 的 c2。
    c1 超出反應函數值域時沿端點線段外插，結果落在 [0,1] 之外。
    """
    if c1 < a1 / (a1 + a2):
        return gamma * c1 - a1
    if c1 <= a2 / (a1 + a2):
        return c1
    return gamma * c1 - a2


def _preimage_gap(response: float, pre: float) -> float:
    """到截斷後反像的距離，加上反像超出 [0,1] 的距離；僅在均衡處為零"""
    clamped = min(max(pre, 0.0), 1.0)
    return abs(response - clamped) + abs(pre - clamped)


def _nash_gap_two(params: ModelParams) -> Callable[[float], Tuple[float, float]]:
    a1, a2 = params.inefficiencies
    gamma = params.gamma

    def gap(c1: float) -> Tuple[float, float]:
        pre = _firm1_preimage(c1, a1, a2, gamma)
        response = reaction_firm2_two(c1, params)
        best = min(response.points, key=lambda r: _preimage_gap(r, pre))
        return _preimage_gap(best, pre), best
    return gap


def _nash_gap_symmetric(a: float) -> Callable[[float], Tuple[float, float]]:
    def gap(c1: float) -> Tuple[float, float]:
        pre = (1 + 2 * a) * c1 - a
        response = reaction_symmetric_two(c1, a).lo
        return _preimage_gap(response, pre), response
    return gap


def pure_nash_two(params: ModelParams, scan_n: int = NASH_SCAN_N) -> NashResult:
    """
    掃描 c_1，量測廠商 2 對 c_1 的反應與「會使廠商 1 回應 c_1 的 c_2」之間的距離；
    距離為零處即純策略 Nash 均衡。最佳掃描點附近再以三分搜尋細化。
    """
    if params.n != 2:
        raise PreconditionError(f"pure_nash_two needs n=2, got n={params.n}")
    if scan_n < 2:
        raise PreconditionError(f"scan_n must be at least 2, got {scan_n}")
    a1, a2 = params.inefficiencies
    swapped = a1 > a2
    if a1 == a2:
        gap = _nash_gap_symmetric(a1)
    else:
        gap = _nash_gap_two(params.reversed() if swapped else params)

    scan = np.linspace(0.0, 1.0, scan_n)
    values = [gap(float(c))[0] for c in scan]
    best_idx = int(np.argmin(values))
    best_c, best_gap = float(scan[best_idx]), values[best_idx]

    if best_gap > 0:
        lo = float(scan[max(best_idx - 1, 0)])
        hi = float(scan[min(best_idx + 1, scan_n - 1)])
        for _ in range(100):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if gap(m1)[0] <= gap(m2)[0]:
                hi = m2
            else:
                lo = m1
        refined = 0.5 * (lo + hi)
        if gap(refined)[0] < best_gap:
            best_c, best_gap = refined, gap(refined)[0]

    _, response = gap(best_c)
    profile = (best_c, response)
    if swapped:
        profile = (response, best_c)

    equilibrium = profile if best_gap <= NASH_GAP_TOL else None
    if equilibrium is None:
        logger.info(f"No pure Nash equilibrium for a={list(params.inefficiencies)}; minimum reaction gap {best_gap:.6e}")
    else:
        logger.info(f"Pure Nash equilibrium for a={list(params.inefficiencies)} at {equilibrium}")
    return NashResult(equilibrium=equilibrium, min_gap=best_gap, argmin_profile=profile, scan_n=scan_n)
