"""Explicit local-orbit walks: sign-matched permutations and small-step paths."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matching import PermutationPlan
from .metrics import eventually_monotone_divergent, resolvent_gap
from .operator_model import DEFAULT_HORIZON, OperatorSpec, constant, require_same_basis


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class SignPartition:
    nonnegative: tuple[int, ...]  # 1-based indices with a_n >= 0
    negative: tuple[int, ...]
    both_infinite: bool  # metadata: unbounded above and below


def sign_partition(spec: OperatorSpec, horizon: int = DEFAULT_HORIZON) -> SignPartition:
    vals = spec.values(horizon)
    idx = np.arange(1, horizon + 1)
    meta = spec.meta
    return SignPartition(
        tuple(int(i) for i in idx[vals >= 0]),
        tuple(int(i) for i in idx[vals < 0]),
        not meta.bounded_above and not meta.bounded_below,
    )


def _balanced_size(a: np.ndarray, b: np.ndarray) -> int:
    equal = np.nonzero(np.cumsum(a >= 0) == np.cumsum(b >= 0))[0]
    return int(equal[-1]) + 1 if equal.size else 0


def sign_matched_permutation(a_spec: OperatorSpec, b_spec: OperatorSpec, horizon: int = DEFAULT_HORIZON) -> PermutationPlan:
    """Pair the k-th non-negative (negative) index of A with the k-th of B.

    Works on the longest prefix 1..P where both operators have the same number
    of non-negative entries, so the pairing is a bijection of 1..P. As with
    :func:`bottleneck_match`, b_m is paired with a_{mapping[m-1]}.
    """
    require_same_basis(a_spec, b_spec)
    a = a_spec.values(horizon)
    b = b_spec.values(horizon)
    size = _balanced_size(a, b)
    if size == 0:
        raise WalkError("sign counts never balance within the horizon")
    a, b = a[:size], b[:size]
    mapping = np.zeros(size, dtype=np.int64)
    for sign_a, sign_b in ((a >= 0, b >= 0), (a < 0, b < 0)):
        mapping[np.nonzero(sign_b)[0]] = np.nonzero(sign_a)[0] + 1
    return PermutationPlan(size, tuple(int(m) for m in mapping), float("nan"), "sign-block")


def align_target(plan: PermutationPlan, b: Sequence[float]) -> np.ndarray:
    """Entries of uBu* on 1..size: position mapping[m-1] receives b_m."""
    b = np.asarray(b, dtype=np.float64)[: plan.size]
    out = np.empty(plan.size)
    out[np.asarray(plan.mapping) - 1] = b
    return out


Step = tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class OrbitWalk:
    """A chain base = x_0, x_1, ..., x_L with x_j = x_{j-1} + steps[j-1].

    ``per_step_distance[j-1]`` is the resolvent distance from the base after
    step j; ``details`` carries the construction parameters.
    """

    base: OperatorSpec
    target_label: str
    steps: tuple[Step, ...]
    per_step_distance: tuple[float, ...]
    delta: float
    r: float
    details: dict = field(default_factory=dict, compare=False)

    @property
    def length(self) -> int:
        return len(self.steps)

    def step_norms(self) -> list[float]:
        return [max((abs(s) for _, s in step), default=0.0) for step in self.steps]

    def to_json(self) -> dict:
        return {
            "base": self.base.label,
            "target": self.target_label,
            "steps": [[{"idx": i, "shift": s} for i, s in step] for step in self.steps],
            "distances": list(self.per_step_distance),
            "delta": self.delta,
            "r": self.r,
            "details": self.details,
        }


def least_steps(size: float, r: float) -> int:
    """Smallest L >= 1 with size < r * L."""
    steps = max(1, math.floor(size / r) + 1)
    while size >= r * steps:
        steps += 1
    while steps > 1 and size < r * (steps - 1):
        steps -= 1
    return steps


def orbit_walk_unbounded(
    a_spec: OperatorSpec, b_spec: OperatorSpec, delta: float, r: float, horizon: int = DEFAULT_HORIZON
) -> OrbitWalk:
    """Walk from A towards a copy of B using L equal steps K supported on N+1..p.

    b~ is B permuted so that a_n b~_n >= 0; N is the least index after which
    the resolvent gap to b~ stays below delta up to p, the balanced horizon.
    Every step moves each entry along the segment from a_n to b~_n, so the
    gap after any step is bounded by the gap of the full target.
    """
    if not (delta > 0 and r > 0):
        raise WalkError("delta and r must be positive")
    for spec in (a_spec, b_spec):
        if not sign_partition(spec, 1).both_infinite:
            raise WalkError(f"{spec.label} is not unbounded in both directions")
    plan = sign_matched_permutation(a_spec, b_spec, horizon)
    p = plan.size
    a = np.array(a_spec.values(p))
    target = align_target(plan, b_spec.values(p))
    gaps = resolvent_gap(target, a)
    # suffix_max[N] = max of gaps over indices N+1..p (1-based)
    suffix_max = np.maximum.accumulate(gaps[::-1])[::-1]
    ok = np.nonzero(suffix_max < delta)[0]
    if ok.size == 0:
        raise WalkError("target not within δ-reachable tail at this horizon")
    first = int(ok[0])  # N: entries 1..N stay at A
    diff = target[first:] - a[first:]
    m_p = float(np.max(np.abs(diff)))
    details = {
        "N": first,
        "p": p,
        "m_p": m_p,
        "target_distance": float(suffix_max[first]),
        "tail_certified": eventually_monotone_divergent(a_spec, horizon)
        and eventually_monotone_divergent(b_spec, horizon),
    }
    if m_p == 0.0:
        details["L"] = 0
        return OrbitWalk(a_spec, b_spec.label, (), (), float(delta), float(r), details)
    count = least_steps(m_p, r)
    details["L"] = count
    shift = diff / count
    support = np.nonzero(shift)[0]
    step = tuple((int(first + i + 1), float(shift[i])) for i in support)
    distances = []
    current = a[first:].copy()
    for _ in range(count):
        current = current + shift
        distances.append(float(np.max(resolvent_gap(current, a[first:]))))
    if max(distances) >= delta:  # pragma: no cover - excluded by the interpolation bound
        raise WalkError("walk leaves the delta-neighbourhood")
    return OrbitWalk(a_spec, b_spec.label, (step,) * count, tuple(distances), float(delta), float(r), details)


def orbit_walk_compact_at_zero(pairs: Sequence[tuple[int, float]], probes: int, eps: float, r: float) -> OrbitWalk:
    """Walk from 0 to the finite-rank diagonal B in N equal steps B/N.

    Distances are measured on the basis vectors 1..probes, where
    |((l/N)B - i)^{-1} e_j - (0 - i)^{-1} e_j|^2 = x^2 / (x^2 + 1) with x = l b_j / N.
    """
    if not (eps > 0 and r > 0):
        raise WalkError("eps and r must be positive")
    entries = {}
    for idx, val in pairs:
        if idx < 1:
            raise WalkError("indices start at 1")
        entries[int(idx)] = entries.get(int(idx), 0.0) + float(val)
    entries = {i: v for i, v in entries.items() if v != 0.0}
    if any(i > probes for i in entries):
        raise WalkError(f"B has entries beyond the {probes} probe vectors")
    base = constant(0.0)
    norm = max((abs(v) for v in entries.values()), default=0.0)
    if norm == 0.0:
        return OrbitWalk(base, "B", (), (), float(eps), float(r), {"N": 0, "norm": 0.0, "probe_distances": []})
    count = math.ceil(norm / r) + 1
    step = tuple((i, entries[i] / count) for i in sorted(entries))
    lam = np.zeros(probes)
    for i, v in entries.items():
        lam[i - 1] = v
    by_probe = []
    for l in range(1, count + 1):
        x2 = (lam * l / count) ** 2
        by_probe.append(np.sqrt(x2 / (x2 + 1.0)))
    by_probe = np.array(by_probe)
    distances = tuple(float(d) for d in by_probe.max(axis=1))
    if max(distances) >= eps:
        raise WalkError(f"step distance {max(distances):.6g} is not below eps={eps}")
    details = {"N": count, "norm": norm, "probe_distances": by_probe.tolist()}
    return OrbitWalk(base, "B", (step,) * count, distances, float(eps), float(r), details)


@dataclass(frozen=True)
class WalkCheck:
    ok: bool
    max_step_norm: float
    max_distance: float
    max_mismatch: float  # largest |recomputed - stored| distance
    problems: tuple[str, ...]


def verify_walk(walk: OrbitWalk, tolerance: float = 1e-12) -> WalkCheck:
    """Replay the walk with plain complex arithmetic and check its invariants."""
    current: dict[int, float] = {}
    base_vals: dict[int, float] = {}
    problems = []
    norms, recomputed, mismatch = [], [], 0.0
    for j, step in enumerate(walk.steps):
        norm = 0.0
        for idx, shift in step:
            if idx not in base_vals:
                base_vals[idx] = walk.base.value(idx)
                current[idx] = base_vals[idx]
            current[idx] += shift
            norm = max(norm, abs(shift))
        norms.append(norm)
        dist = 0.0
        for idx, x in current.items():
            y = base_vals[idx]
            dist = max(dist, abs(1 / complex(x, -1.0) - 1 / complex(y, -1.0)))
        recomputed.append(dist)
        if j < len(walk.per_step_distance):
            mismatch = max(mismatch, abs(dist - walk.per_step_distance[j]))
        if norm >= walk.r:
            problems.append(f"step {j + 1} has norm {norm} >= r")
        if dist >= walk.delta:
            problems.append(f"step {j + 1} is at distance {dist} >= delta")
    if len(walk.per_step_distance) != len(walk.steps):
        problems.append("distance list does not match the number of steps")
    if mismatch > tolerance:
        problems.append(f"stored distances differ from replay by {mismatch}")
    return WalkCheck(
        not problems,
        max(norms, default=0.0),
        max(recomputed, default=0.0),
        mismatch,
        tuple(problems),
    )
