"""
指令處理器模組
每一類 CLI 指令對應一個處理器，共用 BaseHandler 的參數與報表工具
"""

from .base_handler import BaseHandler
from .market_handler import MarketHandler
from .response_handler import ResponseHandler
from .rationalize_handler import RationalizeHandler
from .verification_handler import VerificationHandler

__all__ = [
    'BaseHandler',
    'MarketHandler',
    'ResponseHandler',
    'RationalizeHandler',
    'VerificationHandler'
]
