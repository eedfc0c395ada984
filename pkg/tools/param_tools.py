from fractions import Fraction
from typing import Sequence, Tuple

from pydantic import ValidationError

from core.exceptions import PreconditionError, UsageError
from core.models import LocationProfile, ModelParams
from utils.logger import logger


class ParamsExtractor:
    """命令列參數提取器：逗號分隔清單、分數字面值（如 1/3）與 a_1:a_2 配對"""

    @staticmethod
    def parse_number(text: str) -> float:
        """小數與分數字面值都先轉成精確的有理數，再四捨五入成最接近的浮點數"""
        token = text.strip()
        try:
            value = Fraction(token)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"cannot parse number {token!r}") from e
        return float(value)

    @staticmethod
    def parse_number_list(text: str) -> Tuple[float, ...]:
        tokens = [t for t in text.split(",") if t.strip()]
        if not tokens:
            raise UsageError(f"empty number list {text!r}")
        return tuple(ParamsExtractor.parse_number(t) for t in tokens)

    @staticmethod
    def parse_pair_list(text: str) -> Tuple[Tuple[float, float], ...]:
        """'1:3,1:2' -> ((1.0, 3.0), (1.0, 2.0))"""
        pairs = []
        for token in (t for t in text.split(",") if t.strip()):
            parts = token.split(":")
            if len(parts) != 2:
                raise UsageError(f"expected a_1:a_2, got {token!r}")
            pairs.append((ParamsExtractor.parse_number(parts[0]), ParamsExtractor.parse_number(parts[1])))
        if not pairs:
            raise UsageError(f"empty pair list {text!r}")
        return tuple(pairs)

    @staticmethod
    def expand_inefficiencies(values: Sequence[float], n: int) -> Tuple[float, ...]:
        """單一數值視為對稱情形並複製 n 份"""
        if len(values) == 1:
            return tuple(values) * n
        if len(values) != n:
            raise PreconditionError(f"dimension mismatch: {len(values)} inefficiencies for n={n}")
        return tuple(values)

    @staticmethod
    def build_params(values: Sequence[float], n: int) -> ModelParams:
        try:
            return ModelParams(inefficiencies=ParamsExtractor.expand_inefficiencies(values, n))
        except ValidationError as e:
            logger.error(f"Invalid model parameters {list(values)}: {e}")
            raise PreconditionError(f"invalid inefficiencies {list(values)}") from e

    @staticmethod
    def build_profile(values: Sequence[float], n: int) -> LocationProfile:
        if len(values) != n:
            raise PreconditionError(f"dimension mismatch: {len(values)} locations for n={n}")
        try:
            return LocationProfile(locations=tuple(values))
        except ValidationError as e:
            raise PreconditionError(f"invalid locations {list(values)}: locations must lie in [0, 1]") from e
