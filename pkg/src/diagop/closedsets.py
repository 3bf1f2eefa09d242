"""Finite unions of closed intervals and points inside a window."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class WindowMismatch(ValueError):
    pass


def _merge_intervals(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


@dataclass(frozen=True)
class ClosedSetApprox:
    """Closed subset of a window stored as sorted points plus disjoint intervals.

    Use :meth:`build` to normalise raw data; the constructor only validates.
    """

    window: tuple[float, float]
    points: tuple[float, ...] = ()
    intervals: tuple[tuple[float, float], ...] = ()
    unbounded_above: bool = False
    unbounded_below: bool = False

    def __post_init__(self):
        lo, hi = self.window
        if not lo <= hi:
            raise ValueError(f"empty window {self.window}")
        if list(self.points) != sorted(set(self.points)):
            raise ValueError("points must be sorted and distinct")
        prev = None
        for a, b in self.intervals:
            if not (lo <= a < b <= hi):
                raise ValueError(f"interval {(a, b)} not a proper interval inside {self.window}")
            if prev is not None and a <= prev:
                raise ValueError("intervals must be sorted and disjoint")
            prev = b
        for p in self.points:
            if not lo <= p <= hi:
                raise ValueError(f"point {p} outside window")
            if self._in_interval(p):
                raise ValueError(f"point {p} lies inside an interval")

    @classmethod
    def build(
        cls,
        window: Sequence[float],
        points: Iterable[float] = (),
        intervals: Iterable[Sequence[float]] = (),
        unbounded_above: bool = False,
        unbounded_below: bool = False,
    ) -> "ClosedSetApprox":
        lo, hi = float(window[0]), float(window[1])
        clipped = []
        pts = set()
        for a, b in intervals:
            a, b = max(float(a), lo), min(float(b), hi)
            if a < b:
                clipped.append((a, b))
            elif a == b:
                pts.add(a)
        merged = _merge_intervals(clipped)
        pts.update(float(p) for p in points if lo <= p <= hi)
        starts = [a for a, _ in merged]
        kept = []
        for p in sorted(pts):
            i = bisect.bisect_right(starts, p) - 1
            if i >= 0 and p <= merged[i][1]:
                continue
            kept.append(p)
        return cls((lo, hi), tuple(kept), tuple(merged), bool(unbounded_above), bool(unbounded_below))

    @classmethod
    def from_samples(
        cls,
        values: Iterable[float],
        window: Sequence[float],
        resolution: float,
        extra_points: Iterable[float] = (),
        extra_intervals: Iterable[Sequence[float]] = (),
        unbounded_above: bool = False,
        unbounded_below: bool = False,
    ) -> "ClosedSetApprox":
        """Resolution-merged closure: neighbours closer than ``resolution`` join."""
        lo, hi = float(window[0]), float(window[1])
        vals = np.unique(np.asarray(list(values), dtype=np.float64))
        vals = vals[(vals >= lo) & (vals <= hi)]
        pts: list[float] = []
        ivs: list[tuple[float, float]] = []
        if vals.size:
            breaks = np.nonzero(np.diff(vals) >= resolution)[0]
            starts = np.concatenate(([0], breaks + 1))
            ends = np.concatenate((breaks, [vals.size - 1]))
            for s, e in zip(starts, ends):
                if s == e:
                    pts.append(float(vals[s]))
                else:
                    ivs.append((float(vals[s]), float(vals[e])))
        return cls.build(
            (lo, hi),
            list(pts) + list(extra_points),
            ivs + [tuple(iv) for iv in extra_intervals],
            unbounded_above,
            unbounded_below,
        )

    @classmethod
    def full(cls, window: Sequence[float], unbounded_above=True, unbounded_below=True) -> "ClosedSetApprox":
        return cls.build(window, (), [tuple(window)], unbounded_above, unbounded_below)

    def _in_interval(self, x: float) -> bool:
        i = bisect.bisect_right([a for a, _ in self.intervals], x) - 1
        return i >= 0 and x <= self.intervals[i][1]

    def contains(self, x: float) -> bool:
        if self._in_interval(x):
            return True
        i = bisect.bisect_left(self.points, x)
        return i < len(self.points) and self.points[i] == x

    def is_empty(self) -> bool:
        return not self.points and not self.intervals

    def issubset(self, other: "ClosedSetApprox") -> bool:
        if any(not other.contains(p) for p in self.points):
            return False
        for a, b in self.intervals:
            if not any(c <= a and b <= d for c, d in other.intervals):
                return False
        return True

    def same_set(self, other: "ClosedSetApprox") -> bool:
        """Set equality ignoring the unboundedness flags."""
        return self.points == other.points and self.intervals == other.intervals

    def restrict(self, window: Sequence[float]) -> "ClosedSetApprox":
        return ClosedSetApprox.build(window, self.points, self.intervals, self.unbounded_above, self.unbounded_below)

    def distance_to(self, x: float) -> float:
        best = np.inf
        for p in self.points:
            best = min(best, abs(p - x))
        for a, b in self.intervals:
            best = min(best, 0.0 if a <= x <= b else min(abs(a - x), abs(b - x)))
        return float(best)

    def to_json(self) -> dict:
        return {
            "window": [self.window[0], self.window[1]],
            "points": list(self.points),
            "intervals": [[a, b] for a, b in self.intervals],
            "unbounded_above": self.unbounded_above,
            "unbounded_below": self.unbounded_below,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClosedSetApprox":
        return cls.build(
            data["window"],
            data.get("points", []),
            data.get("intervals", []),
            data.get("unbounded_above", False),
            data.get("unbounded_below", False),
        )


def _intersect_pair(x: ClosedSetApprox, y: ClosedSetApprox) -> ClosedSetApprox:
    pts = [p for p in x.points if y.contains(p)]
    pts += [p for p in y.points if x._in_interval(p)]
    ivs = []
    for a, b in x.intervals:
        for c, d in y.intervals:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                ivs.append((lo, hi))
            elif lo == hi:
                pts.append(lo)
    return ClosedSetApprox.build(
        x.window, pts, ivs, x.unbounded_above and y.unbounded_above, x.unbounded_below and y.unbounded_below
    )


def intersect_closed(sets: Sequence[ClosedSetApprox]) -> ClosedSetApprox:
    """Exact intersection of closed sets sharing one window."""
    if not sets:
        raise ValueError("need at least one set")
    window = sets[0].window
    for s in sets[1:]:
        if s.window != window:
            raise WindowMismatch(f"window {s.window} differs from {window}")
    out = sets[0]
    for s in sets[1:]:
        out = _intersect_pair(out, s)
    return out
