"""
例外類別
每個例外都帶有 CLI 的結束狀態碼
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_NON_CONVERGENCE = 3
EXIT_VERIFICATION = 4


class HotellingError(Exception):
    """所有領域錯誤的基礎類別"""
    exit_status = EXIT_PRECONDITION


class UsageError(HotellingError):
    """命令列參數無法解析"""
    exit_status = EXIT_USAGE


class PreconditionError(HotellingError):
    """輸入不符合運算的前置條件（維度、廠商數、參數範圍）"""
    exit_status = EXIT_PRECONDITION


class InvariantViolation(HotellingError):
    """回合狀態違反對稱性或包含關係"""
    exit_status = EXIT_PRECONDITION


class ReactionError(HotellingError):
    """三廠商反應對應中沒有任何情形接受該信念"""
    exit_status = EXIT_PRECONDITION


class SolverConvergenceError(HotellingError):
    """方程組求解未收斂；無異條件恆有唯一解，因此代表程式錯誤"""
    exit_status = EXIT_NON_CONVERGENCE


class NonConvergenceError(HotellingError):
    """消去程序在最大回合數內未收斂"""
    exit_status = EXIT_NON_CONVERGENCE


class VerificationError(HotellingError):
    """驗證套件中至少一項檢查未通過"""
    exit_status = EXIT_VERIFICATION
