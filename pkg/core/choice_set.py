from typing import Iterable, List, Sequence, Tuple
import math

import numpy as np
from pydantic import BaseModel, field_validator

from utils.config import CHOICE_SET_MERGE_TOL

Interval = Tuple[float, float]


class ChoiceSet(BaseModel):
    """
    [0,1] 中互不相交閉區間的有限聯集，用來表示每回合存活的選擇集合。
    單點以長度為零的區間表示。請透過 from_intervals / points 建立，
    這兩個建構函式會排序、裁切並合併距離在容差內的區間。
    """
    model_config = {"frozen": True}

    intervals: Tuple[Interval, ...] = ()

    @field_validator("intervals")
    @classmethod
    def _check_intervals(cls, value: Tuple[Interval, ...]) -> Tuple[Interval, ...]:
        prev_hi = None
        for lo, hi in value:
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"interval [{lo}, {hi}] is not a closed interval inside [0, 1]")
            if prev_hi is not None and lo <= prev_hi:
                raise ValueError("intervals must be sorted and pairwise disjoint")
            prev_hi = hi
        return value

    # ---- construction -------------------------------------------------

    @classmethod
    def from_intervals(
        cls,
        intervals: Iterable[Sequence[float]],
        merge_tol: float = CHOICE_SET_MERGE_TOL
    ) -> "ChoiceSet":
        cleaned: List[Tuple[float, float]] = []
        for lo, hi in intervals:
            lo, hi = float(lo), float(hi)
            if lo > hi:
                if lo - hi > merge_tol:
                    raise ValueError(f"reversed interval [{lo}, {hi}]")
                lo, hi = hi, lo
            if lo < -merge_tol or hi > 1.0 + merge_tol:
                raise ValueError(f"interval [{lo}, {hi}] leaves [0, 1]")
            cleaned.append((min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)))

        cleaned.sort()
        merged: List[List[float]] = []
        for lo, hi in cleaned:
            if merged and lo - merged[-1][1] <= merge_tol:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(intervals=tuple((lo, hi) for lo, hi in merged))

    @classmethod
    def points(cls, values: Iterable[float], merge_tol: float = CHOICE_SET_MERGE_TOL) -> "ChoiceSet":
        return cls.from_intervals(((v, v) for v in values), merge_tol=merge_tol)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "ChoiceSet":
        return cls.from_intervals([(lo, hi)])

    @classmethod
    def unit(cls) -> "ChoiceSet":
        return cls(intervals=((0.0, 1.0),))

    @classmethod
    def from_grid_mask(cls, mask: np.ndarray, m: int) -> "ChoiceSet":
        """把網格上的布林遮罩轉成由連續索引段組成的區間"""
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        if idx.size == 0:
            return cls()
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate(([idx[0]], idx[breaks + 1]))
        ends = np.concatenate((idx[breaks], [idx[-1]]))
        return cls(intervals=tuple((int(s) / m, int(e) / m) for s, e in zip(starts, ends)))

    # ---- queries ------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    @property
    def max_width(self) -> float:
        return max((hi - lo for lo, hi in self.intervals), default=0.0)

    @property
    def is_interval(self) -> bool:
        return len(self.intervals) == 1

    def contains_point(self, x: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals)

    def distance_to_point(self, x: float) -> float:
        if self.is_empty:
            return math.inf
        best = math.inf
        for lo, hi in self.intervals:
            if lo <= x <= hi:
                return 0.0
            best = min(best, lo - x if x < lo else x - hi)
        return best

    def contains(self, other: "ChoiceSet", tol: float = 0.0) -> bool:
        """other 的每個區間都落在 self 的某個區間內（允許 tol 誤差）"""
        for lo, hi in other.intervals:
            if not any(s_lo - tol <= lo and hi <= s_hi + tol for s_lo, s_hi in self.intervals):
                return False
        return True

    def _directed_distance(self, other: "ChoiceSet") -> float:
        # sup over self of dist(., other) is attained at an endpoint of self
        # or at the midpoint of a gap of other lying inside self
        candidates = [v for interval in self.intervals for v in interval]
        for (_, gap_lo), (gap_hi, _) in zip(other.intervals[:-1], other.intervals[1:]):
            mid = 0.5 * (gap_lo + gap_hi)
            if self.contains_point(mid):
                candidates.append(mid)
        return max(other.distance_to_point(x) for x in candidates)

    def hausdorff(self, other: "ChoiceSet") -> float:
        if self.is_empty and other.is_empty:
            return 0.0
        if self.is_empty or other.is_empty:
            return math.inf
        return max(self._directed_distance(other), other._directed_distance(self))

    def is_symmetric(self, tol: float) -> bool:
        """關於 1/2 對稱"""
        return self.hausdorff(self.mirror()) <= tol

    # ---- algebra ------------------------------------------------------

    def union(self, other: "ChoiceSet") -> "ChoiceSet":
        return ChoiceSet.from_intervals(self.intervals + other.intervals)

    def intersect(self, other: "ChoiceSet") -> "ChoiceSet":
        out: List[Interval] = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ChoiceSet.from_intervals(out)

    def mirror(self) -> "ChoiceSet":
        return ChoiceSet.from_intervals((1.0 - hi, 1.0 - lo) for lo, hi in reversed(self.intervals))

    def collapse(self, width_tol: float) -> "ChoiceSet":
        """寬度不超過 width_tol 的區間縮成其中點"""
        out = []
        for lo, hi in self.intervals:
            if hi - lo <= width_tol:
                mid = 0.5 * (lo + hi)
                out.append((mid, mid))
            else:
                out.append((lo, hi))
        return ChoiceSet.from_intervals(out)

    def as_lists(self) -> List[List[float]]:
        return [[lo, hi] for lo, hi in self.intervals]

    def __str__(self) -> str:
        if self.is_empty:
            return "∅"
        return " ∪ ".join(
            f"{{{lo:.12g}}}" if lo == hi else f"[{lo:.12g}, {hi:.12g}]"
            for lo, hi in self.intervals
        )
