"""Equivalence checks between diagonal operators: matching, resolvent classes, obstructions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .closedsets import ClosedSetApprox
from .matching import PermutationPlan, bottleneck_match
from .operator_model import (
    DEFAULT_HORIZON,
    DEFAULT_RESOLUTION,
    DEFAULT_WINDOW,
    CHECK_CLUSTER,
    CHECK_DELTA,
    OperatorSpec,
    require_same_basis,
)
from .spectra import sigma_bar

SETTLE_BLOCK = 3


def dyadic_blocks(size: int) -> list[tuple[int, int]]:
    """1-based inclusive ranges [2^j, min(2^(j+1)-1, size)]."""
    blocks = []
    j = 0
    while (1 << j) <= size:
        blocks.append((1 << j, min((1 << (j + 1)) - 1, size)))
        j += 1
    return blocks


def block_sups(values: Sequence[float]) -> list[float]:
    vals = np.abs(np.asarray(values, dtype=np.float64))
    return [float(np.max(vals[lo - 1: hi])) for lo, hi in dyadic_blocks(vals.size)]


def prefix_costs(a: Sequence[float], b: Sequence[float]) -> list[float]:
    """Optimal minimax matching cost of the first 2^j terms, j = 0, 1, ..., then of all terms."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.size
    cuts = [1 << j for j in range(n.bit_length()) if (1 << j) <= n]
    if cuts[-1] != n:
        cuts.append(n)
    return [float(np.max(np.abs(np.sort(a[:m]) - np.sort(b[:m])))) for m in cuts]


@dataclass(frozen=True)
class CompactCertificate:
    """Evidence that K = B - uAu* has entries tending to zero along the horizon.

    ``tail_sup_by_block`` holds the sup of |c_n| over each dyadic block of the
    plan; ``prefix_costs`` the optimal matching cost of each dyadic prefix,
    which drives the verdict.
    """

    diag_entries: tuple[float, ...]
    tail_sup_by_block: tuple[float, ...]
    prefix_costs: tuple[float, ...]
    verdict: str

    def to_json(self, with_entries: bool = False) -> dict:
        out = {
            "tail_sup_by_block": list(self.tail_sup_by_block),
            "prefix_costs": list(self.prefix_costs),
            "verdict": self.verdict,
        }
        if with_entries:
            out["diag_entries"] = list(self.diag_entries)
        return out


def decay_verdict(costs: Sequence[float], settle: int = SETTLE_BLOCK) -> str:
    tail = list(costs[settle:]) or list(costs[-1:])
    monotone = all(x >= y for x, y in zip(tail, tail[1:]))
    if monotone and (tail[-1] == 0.0 or tail[-1] <= 0.5 * tail[0]):
        return "decreasing-to-zero-on-horizon"
    return "not-decreasing"


def wvn_construct(
    a_spec: OperatorSpec, b_spec: OperatorSpec, horizon: int = 2048
) -> tuple[PermutationPlan, CompactCertificate]:
    require_same_basis(a_spec, b_spec)
    a = a_spec.values(horizon)
    b = b_spec.values(horizon)
    plan = bottleneck_match(a, b)
    entries = b - a[np.asarray(plan.mapping) - 1]
    costs = prefix_costs(a, b)
    cert = CompactCertificate(
        tuple(float(x) for x in entries),
        tuple(block_sups(entries)),
        tuple(costs),
        decay_verdict(costs),
    )
    return plan, cert


def accumulation_match_feasible(a_spec: OperatorSpec, b_spec: OperatorSpec) -> bool:
    """Same declared limit set and only finitely many isolated eigenvalues on both sides."""
    line = (-math.inf, math.inf)
    acc_a = a_spec.meta.accumulation(line)
    acc_b = b_spec.meta.accumulation(line)
    if not acc_a.same_set(acc_b):
        return False
    return a_spec.meta.finitely_many_isolated and b_spec.meta.finitely_many_isolated


def ucres_equivalent(
    a_spec: OperatorSpec,
    b_spec: OperatorSpec,
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> bool:
    return sigma_bar(a_spec, window, horizon, resolution) == sigma_bar(b_spec, window, horizon, resolution)


@dataclass(frozen=True)
class RelCompactReport:
    verdict: bool
    route: str  # which tail argument supports decay, or "none"
    gamma_set: ClosedSetApprox
    max_gamma: float
    argmax: int
    far_clusters: tuple[tuple[float, int], ...]
    block_sups: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "route": self.route,
            "gamma_set": self.gamma_set.to_json(),
            "max_gamma": self.max_gamma,
            "argmax": self.argmax,
            "far_clusters": [list(c) for c in self.far_clusters],
            "block_sups": list(self.block_sups),
        }


def _clusters(vals: np.ndarray, resolution: float, min_size: int) -> list[tuple[float, int]]:
    vals = np.sort(vals)
    breaks = np.nonzero(np.diff(vals) >= resolution)[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [vals.size - 1]))
    return [(float(vals[s]), int(e - s + 1)) for s, e in zip(starts, ends) if e - s + 1 >= min_size]


def relatively_compact_check(
    k_spec: OperatorSpec,
    a_spec: OperatorSpec,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> RelCompactReport:
    """Is K(A - i)^{-1} compact, judged from gamma_n = kappa_n / (a_n - i)?

    Decay of |gamma_n| is accepted from metadata when kappa tends to 0 or when
    kappa is bounded against a divergent A; otherwise the dyadic block sups of
    |gamma_n| must strictly decrease past the settling block. Large clusters of
    |gamma_n| away from 0 always refute.
    """
    require_same_basis(k_spec, a_spec)
    kappa = k_spec.values(horizon)
    a = a_spec.values(horizon)
    gamma = np.abs(kappa / (a - 1j))
    top = float(np.max(gamma))
    gamma_set = ClosedSetApprox.from_samples(gamma, (0.0, max(top, 1.0)), resolution)
    far = tuple(
        (c, n) for c, n in _clusters(gamma, resolution, CHECK_CLUSTER) if c > CHECK_DELTA
    )
    sups = block_sups(gamma)
    km, am = k_spec.meta, a_spec.meta
    k_null = (
        km.bounded_above and km.bounded_below
        and set(km.acc_points) <= {0.0} and not km.acc_intervals
        and set(k_spec.seq.infinite_multiplicity_values()) <= {0.0}
    )
    k_bounded = km.bounded_above and km.bounded_below
    tail = sups[SETTLE_BLOCK:]
    decaying = len(tail) >= 2 and all(x > y for x, y in zip(tail, tail[1:]))
    if k_null:
        route = "kappa-to-zero"
    elif k_bounded and am.abs_divergent:
        route = "divergent-A"
    elif k_bounded and decaying:
        route = "block-decay"
    else:
        route = "none"
    verdict = route != "none" and not far
    i = int(np.argmax(gamma))
    return RelCompactReport(verdict, route, gamma_set, top, i + 1, far, tuple(sups))


@dataclass(frozen=True)
class ObstructionResult:
    minimum: float
    argmin: tuple[int, int, int]  # (k, l, m)
    bound: float  # (t - s) / 3

    def to_json(self) -> dict:
        return {"minimum": self.minimum, "argmin": list(self.argmin), "bound": self.bound}


def b_t_obstruction(s: float, t: float, k_max: int = 100, l_max: int = 100, m_max: int = 100) -> ObstructionResult:
    """Grid minimum of |k - l + t/3 - s/(m+2)| over 1 <= k, l, m <= the limits."""
    if not 0 <= s < t <= 1:
        raise ValueError("need 0 <= s < t <= 1")
    if min(k_max, l_max, m_max) < 1:
        raise ValueError("grid limits must be positive")
    # the expression depends on k and l only through d = k - l
    d = np.arange(1 - l_max, k_max, dtype=np.float64)
    m = np.arange(1, m_max + 1, dtype=np.float64)
    vals = np.abs(d[:, None] + t / 3.0 - s / (m[None, :] + 2.0))
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    diff = int(d[i])
    k = max(1, 1 + diff)
    return ObstructionResult(float(vals[i, j]), (k, k - diff, int(m[j])), (t - s) / 3.0)


@dataclass(frozen=True)
class EpsNetResult:
    K: np.ndarray
    D: np.ndarray  # rounded eigenvalues of A + K
    U: np.ndarray  # orthonormal eigenvectors (columns)
    eps: float
    offset: float

    def net_distance(self, values) -> float:
        """Largest distance from the given values to the net."""
        v = np.asarray(values, dtype=np.float64) / self.eps - self.offset
        return float(np.max(np.abs(v - np.round(v)))) * self.eps


MAX_NET_SIZE = 512


def eps_net_diagonalize(A, eps: float, offset: float = 0.0) -> EpsNetResult:
    """Round each eigenvalue of a Hermitian matrix to the net (j + offset) * eps.

    Every eigenvalue moves to the net point of its cell of width eps, so the
    perturbation K = U diag(mu - lambda) U* has norm at most eps / 2.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.shape[0] > MAX_NET_SIZE:
        raise ValueError(f"matrix larger than {MAX_NET_SIZE}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    lam, U = np.linalg.eigh(A)
    mu = (np.floor(lam / eps - offset + 0.5) + offset) * eps
    K = (U * (mu - lam)) @ U.conj().T
    if np.isrealobj(A):
        K = K.real
    return EpsNetResult(K, mu, U, float(eps), float(offset))


def read_matrix(path: str) -> np.ndarray:
    """CSV (real, row-major) or JSON {"re": [[...]], "im": [[...]]}."""
    if path.endswith(".json"):
        import json

        with open(path) as fh:
            data = json.load(fh)
        extra = set(data) - {"re", "im"}
        if extra:
            raise ValueError(f"unknown keys: {sorted(extra)}")
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=np.float64)
        return re + 1j * im if np.any(im) else re
    return np.loadtxt(path, delimiter=",", ndmin=2)
