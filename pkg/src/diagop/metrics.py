"""Distances between co-diagonal operators in the strong and norm resolvent topologies."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .operator_model import DEFAULT_HORIZON, OperatorSpec, require_same_basis

TailMode = Literal["ignore", "metadata-bound"]


@dataclass(frozen=True)
class MetricParams:
    n_max: int = 20
    m_max: int = 20
    tail_bound_mode: TailMode = "ignore"

    def __post_init__(self):
        if self.n_max < 1 or self.m_max < 1:
            raise ValueError("n_max and m_max must be at least 1")
        if self.tail_bound_mode not in ("ignore", "metadata-bound"):
            raise ValueError(f"unknown tail_bound_mode {self.tail_bound_mode!r}")


def orbit_sup(delta, m):
    """sup over |t| <= m of |exp(i t delta) - 1|, in closed form."""
    x = np.abs(np.asarray(delta, dtype=np.float64)) * m
    return np.where(x >= math.pi, 2.0, 2.0 * np.sin(x / 2.0))


@dataclass(frozen=True)
class SRTDistance:
    value: float
    error_bound: float

    def to_json(self) -> dict:
        return {"value": self.value, "error_bound": self.error_bound}


def _same_tail(a: OperatorSpec, b: OperatorSpec, n_max: int) -> bool:
    if a.seq.generator != b.seq.generator:
        return False
    top = max(len(a.seq.prefix), len(b.seq.prefix), n_max)
    return bool(np.array_equal(a.values(top)[n_max:], b.values(top)[n_max:]))


def srt_distance(a: OperatorSpec, b: OperatorSpec, params: MetricParams = MetricParams()) -> SRTDistance:
    """Truncated double sum of weighted orbit sups, with a rigorous tail bound."""
    require_same_basis(a, b)
    n_max, m_max = params.n_max, params.m_max
    diff = a.values(n_max) - b.values(n_max)
    ms = np.arange(1, m_max + 1)
    weights = np.power(2.0, -(np.arange(1, n_max + 1)[:, None] + ms[None, :]))
    value = float(np.sum(weights * orbit_sup(diff[:, None], ms[None, :])))
    # every sup is at most 2; the bound is 2 times the weight outside the box
    outside_n = 2.0 ** -n_max
    outside_m = 2.0 ** -m_max
    bound = 2.0 * (1.0 - (1.0 - outside_n) * (1.0 - outside_m))
    if params.tail_bound_mode == "metadata-bound" and _same_tail(a, b, n_max):
        bound = 2.0 * (1.0 - outside_n) * outside_m
    return SRTDistance(value, bound)


def resolvent_gap(a, b):
    """Entrywise |1/(a - i) - 1/(b - i)|."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(1.0 / (a - 1j) - 1.0 / (b - 1j))


@dataclass(frozen=True)
class NRTDistance:
    value: float
    argmax: int  # index attaining the head sup (0 when the sup is 0)
    tail_certified: bool
    tail_bound: float | None
    head_dominates: bool | None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "argmax": self.argmax,
            "tail_certified": self.tail_certified,
            "tail_bound": self.tail_bound,
            "head_dominates": self.head_dominates,
        }


def eventually_monotone_divergent(spec: OperatorSpec, horizon: int) -> bool:
    """Divergent metadata plus |a_n| non-decreasing over the last half of the horizon."""
    if not spec.meta.abs_divergent:
        return False
    mags = np.abs(spec.values(horizon)[horizon // 2:])
    return bool(np.all(np.diff(mags) >= 0))


def tail_gap_bound(magnitude: float) -> float:
    """Bound on |1/(x-i) - 1/(y-i)| once |x|, |y| >= magnitude."""
    return 2.0 / math.sqrt(magnitude * magnitude + 1.0)


def nrt_distance(a: OperatorSpec, b: OperatorSpec, horizon: int = DEFAULT_HORIZON) -> NRTDistance:
    require_same_basis(a, b)
    gaps = resolvent_gap(a.values(horizon), b.values(horizon))
    i = int(np.argmax(gaps))
    value = float(gaps[i])
    certified = eventually_monotone_divergent(a, horizon) and eventually_monotone_divergent(b, horizon)
    bound = dominates = None
    if certified:
        low = min(abs(a.value(horizon)), abs(b.value(horizon)))
        bound = tail_gap_bound(low)
        dominates = value >= bound
    return NRTDistance(value, i + 1 if value > 0 else 0, certified, bound, dominates)


def resolvent_interp(a: float, b: float, s: float) -> float:
    """|1/((1-s)a + sb - i) - 1/(a - i)|."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    mid = (1.0 - s) * a + s * b
    return abs(1.0 / complex(mid, -1.0) - 1.0 / complex(a, -1.0))


def resolvent_interp_many(a, b, s) -> np.ndarray:
    """Broadcasting version of :func:`resolvent_interp`."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("s must lie in [0, 1]")
    return resolvent_gap((1.0 - s) * a + s * b, a)


def interp_peak(a: float, b: float) -> float | None:
    """Interpolation parameter where the resolvent gap reaches 1, when ab < -1."""
    if a * b >= -1:
        return None
    return (1.0 + a * a) / (a * a - a * b)
