#!/usr/bin/env python3
"""
重現兩個範例的腳本
兩廠商 a=(1,3) 的前三回合與極限 {1/3, 2/3}，以及三家對稱廠商 a=1 的 [1/6,5/6]、[17/72,55/72] 與極限 [2/7,5/7]
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fractions import Fraction

from core.choice_set import ChoiceSet
from core.elimination import iterate, pure_nash_two
from core.models import ModelParams
from utils.logger import logger

EXACT_TOL = 1e-12


def _matches(actual: ChoiceSet, expected, tol: float) -> bool:
    target = ChoiceSet.from_intervals([(float(lo), float(hi)) for lo, hi in expected])
    gap = actual.hausdorff(target)
    if gap > tol:
        logger.error(f"Expected {target}, got {actual} (gap {gap:.3e})")
        return False
    return True


def reproduce_two_firm_example() -> bool:
    """a=(1,3)：逐回合集合與極限"""
    try:
        trace = iterate(ModelParams(inefficiencies=(1.0, 3.0)))
        f = Fraction
        expected_p2 = {
            1: [(f(3, 10), f(4, 10)), (f(6, 10), f(7, 10))],
            2: [(f(30, 100), f(36, 100)), (f(64, 100), f(70, 100))],
            3: [(f(32, 100), f(34, 100)), (f(66, 100), f(68, 100))],
        }
        ok = _matches(trace.rounds[1].sets[0], [(f(1, 5), f(4, 5))], EXACT_TOL)
        for k, intervals in expected_p2.items():
            ok = _matches(trace.rounds[k].sets[1], intervals, EXACT_TOL) and ok
        ok = _matches(trace.rounds[3].sets[0], expected_p2[2], EXACT_TOL) and ok
        ok = ok and trace.converged and trace.converged_at <= 200
        for limit in trace.limit:
            ok = _matches(limit, [(f(1, 3), f(1, 3)), (f(2, 3), f(2, 3))], 1e-6) and ok
        logger.info(f"Two-firm example: converged at round {trace.converged_at}, limit {trace.limit[0]}")
        return ok

    except Exception as e:
        logger.error(f"Error reproducing the two-firm example: {str(e)}", exc_info=True)
        return False


def reproduce_three_firm_example() -> bool:
    """a=1：P(1)=[1/6,5/6]、P(2)=[17/72,55/72]、極限 [2/7,5/7]"""
    try:
        trace = iterate(ModelParams.symmetric(1.0, 3))
        f = Fraction
        ok = _matches(trace.rounds[1].sets[0], [(f(1, 6), f(5, 6))], EXACT_TOL)
        ok = _matches(trace.rounds[2].sets[0], [(f(17, 72), f(55, 72))], EXACT_TOL) and ok
        ok = _matches(trace.limit[0], [(f(2, 7), f(5, 7))], 1e-9) and ok
        logger.info(f"Three-firm example: converged at round {trace.converged_at}, limit {trace.limit[0]}")
        return ok and trace.converged

    except Exception as e:
        logger.error(f"Error reproducing the three-firm example: {str(e)}", exc_info=True)
        return False


def check_no_pure_nash() -> bool:
    """a=(1,3) 沒有純策略 Nash 均衡，a=(1,1) 的均衡為 (1/2, 1/2)"""
    try:
        asymmetric = pure_nash_two(ModelParams(inefficiencies=(1.0, 3.0)))
        symmetric = pure_nash_two(ModelParams(inefficiencies=(1.0, 1.0)))
        logger.info(f"a=(1,3): min gap {asymmetric.min_gap:.6e}; a=(1,1): {symmetric.equilibrium}")
        if asymmetric.equilibrium is not None or not asymmetric.min_gap > 0:
            return False
        if symmetric.equilibrium is None:
            return False
        return all(abs(c - 0.5) <= 1e-9 for c in symmetric.equilibrium)

    except Exception as e:
        logger.error(f"Error checking pure Nash equilibria: {str(e)}", exc_info=True)
        return False


def main():
    """依序重現兩個範例"""
    logger.info("Reproducing worked examples...")

    logger.info("Step 1: two firms, a=(1,3)...")
    if not reproduce_two_firm_example():
        logger.error("Two-firm example does not reproduce")
        return False

    logger.info("Step 2: three symmetric firms, a=1...")
    if not reproduce_three_firm_example():
        logger.error("Three-firm example does not reproduce")
        return False

    logger.info("Step 3: pure Nash equilibria...")
    if not check_no_pure_nash():
        logger.error("Pure Nash check failed")
        return False

    logger.info("All worked examples reproduced!")
    return True

if __name__ == "__main__":
    success = main()
    if success:
        print("✅ Examples reproduced!")
        sys.exit(0)
    else:
        print("❌ Reproduction failed!")
        sys.exit(1)
