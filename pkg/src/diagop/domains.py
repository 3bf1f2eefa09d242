"""Operator domains through dyadic band profiles and the k-shift inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .genexpr import GeneratorError, _eval, parse_generator
from .operator_model import DEFAULT_HORIZON, OperatorSpec, require_same_basis

CAP = "cap"


def band_index(values) -> np.ndarray:
    """Band n holds |lambda| in [2^n - 1, 2^(n+1) - 1)."""
    mags = np.abs(np.asarray(values, dtype=np.float64)) + 1.0
    return np.floor(np.log2(mags)).astype(np.int64)


def _exact_band_index(values) -> np.ndarray:
    # log2 can land on the wrong side of a power of two; fix with exact comparisons
    mags = np.abs(np.asarray(values, dtype=np.float64)) + 1.0
    idx = band_index(values)
    low = np.ldexp(1.0, idx)
    idx = np.where(mags < low, idx - 1, idx)
    high = np.ldexp(1.0, idx + 1)
    return np.where(mags >= high, idx + 1, idx)


@dataclass(frozen=True)
class BandProfile:
    """Band dimensions d_0..d_{n_max}; capped bands hold infinitely many eigenvalues.

    ``dims`` keeps the count seen up to the horizon for every band; ``capped``
    marks the bands whose true dimension is infinite.
    """

    dims: tuple[int, ...]
    capped: frozenset[int] = field(default_factory=frozenset)
    growth: str | None = None
    label: str = ""
    horizon: int = 0

    def __post_init__(self):
        if any(d < 0 for d in self.dims):
            raise ValueError("band dimensions are non-negative")
        if any(not 0 <= i < len(self.dims) for i in self.capped):
            raise ValueError("capped band outside the profile")
        if self.growth is not None:
            expected = growth_dims(self.growth, len(self.dims))
            for i, (d, g) in enumerate(zip(self.dims, expected)):
                if i not in self.capped and d != g:
                    raise ValueError(f"growth formula gives {g} at band {i}, profile has {d}")

    @property
    def n_max(self) -> int:
        return len(self.dims) - 1

    def to_json(self) -> dict:
        out = {
            "dims": [CAP if i in self.capped else d for i, d in enumerate(self.dims)],
            "growth": self.growth,
            "label": self.label,
        }
        if self.capped:
            out["cap_values"] = {str(i): self.dims[i] for i in sorted(self.capped)}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "BandProfile":
        extra = set(data) - {"dims", "growth", "label", "cap_values"}
        if extra:
            raise ValueError(f"unknown keys: {sorted(extra)}")
        caps = {int(k): int(v) for k, v in data.get("cap_values", {}).items()}
        dims, capped = [], set()
        for i, d in enumerate(data["dims"]):
            if d == CAP:
                capped.add(i)
                dims.append(caps.get(i, 0))
            else:
                dims.append(int(d))
        return cls(tuple(dims), frozenset(capped), data.get("growth"), data.get("label", ""))


def growth_dims(growth: str, length: int) -> list[int]:
    """Evaluate a band-growth formula (generator syntax, n = band index) on 0..length-1."""
    expr = parse_generator(growth)
    ns = np.arange(length, dtype=np.int64)
    with np.errstate(all="ignore"):
        vals = _eval(expr, ns)
    if not np.all(np.isfinite(vals)) or np.any(vals < 0) or np.any(vals != np.round(vals)):
        raise GeneratorError("growth formula must give non-negative integers")
    return [int(v) for v in vals]


def _capped_bands(spec: OperatorSpec, n_max: int) -> set[int]:
    meta = spec.meta
    caps = set()
    limits = list(meta.acc_points) + spec.seq.infinite_multiplicity_values()
    for p in limits:
        caps.add(int(_exact_band_index([p])[0]))
    for a, b in meta.acc_intervals:
        lo = 0.0 if a <= 0 <= b else min(abs(a), abs(b))
        hi = max(abs(a), abs(b))
        first, last = _exact_band_index([lo, hi])
        caps.update(range(int(first), int(last) + 1))
    return {c for c in caps if c <= n_max}


def band_profile(spec: OperatorSpec, n_max: int, horizon: int = DEFAULT_HORIZON, growth: str | None = None) -> BandProfile:
    """Count eigenvalues a_1..a_horizon per band 0..n_max; limit-set bands are capped."""
    idx = _exact_band_index(spec.values(horizon))
    counts = np.bincount(idx[idx <= n_max], minlength=n_max + 1)
    return BandProfile(
        tuple(int(c) for c in counts),
        frozenset(_capped_bands(spec, n_max)),
        growth,
        spec.label,
        int(horizon),
    )


def horizon_for_bands(spec: OperatorSpec, n_max: int, start: int = DEFAULT_HORIZON, limit: int = 1 << 24) -> int:
    """Smallest doubling of ``start`` whose last eigenvalue lies beyond band n_max.

    Only meaningful for divergent tails with eventually non-decreasing |a_n|,
    where every band up to n_max is then complete.
    """
    if not spec.meta.abs_divergent:
        raise ValueError("band completeness needs a divergent tail")
    edge = 2.0 ** (n_max + 1) - 1.0
    h = start
    while h <= limit:
        if abs(spec.value(h)) >= edge:
            mags = np.abs(spec.values(h)[h // 2:])
            if np.all(np.diff(mags) >= 0):
                return h
        h *= 2
    raise ValueError(f"band {n_max} not complete below index {limit}")


@dataclass(frozen=True)
class Witness:
    k: int
    n: int
    l: int
    side: str  # "P<=Q" or "Q<=P": the inequality that fails
    lhs: int
    rhs: int

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "l": self.l, "side": self.side, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class FWVerdict:
    outcome: str  # "Equivalent" | "Violation" | "Inconclusive"
    k: int | None
    witnesses: tuple[Witness, ...]
    horizon_used: tuple[int, int, int]
    per_k: tuple[str, ...]  # "pass" | "violation" | "open" for k = 0..k_max

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "k": self.k,
            "witnesses": [w.to_json() for w in self.witnesses],
            "horizon_used": list(self.horizon_used),
            "per_k": list(self.per_k),
        }


def _prefix(profile: BandProfile, length: int):
    dims = np.zeros(length, dtype=np.int64)
    cap = np.zeros(length, dtype=np.int64)
    used = min(len(profile.dims), length)
    dims[:used] = profile.dims[:used]
    for i in profile.capped:
        if i < length:
            cap[i] = 1
    zero = np.zeros(1, dtype=np.int64)
    return np.concatenate((zero, np.cumsum(dims))), np.concatenate((zero, np.cumsum(cap)))


def band_sum(profile: BandProfile, first: int, last: int) -> int:
    """Sum of listed dims over bands first..last; negative bands contribute 0."""
    first = max(first, 0)
    return int(sum(profile.dims[first: last + 1]))


def _side(lhs_p, lhs_cap, rhs_p, rhs_cap, n, l, k):
    # lhs over [n, n+l], rhs over [n-k, n+l+k] (clipped at 0)
    lo = np.maximum(n - k, 0)
    lhs = lhs_p[n + l + 1] - lhs_p[n]
    lcap = (lhs_cap[n + l + 1] - lhs_cap[n]) > 0
    rhs = rhs_p[n + l + k + 1] - rhs_p[lo]
    rcap = (rhs_cap[n + l + k + 1] - rhs_cap[lo]) > 0
    fail = ~rcap & (lhs > rhs)
    shaky = ~rcap & lcap & ~fail  # passes only because the cap stands in for infinity
    return fail, shaky, lhs, rhs


def fw_decide(p: BandProfile, q: BandProfile, k_max: int = 5, n_max: int = 256, l_max: int = 64) -> FWVerdict:
    """Search for the least k with both k-shift inequalities holding on the grid.

    For each k and each failing direction, the first failing (n, l) in
    lexicographic order is reported, so swapping P and Q swaps the sides.
    """
    need = n_max + l_max + k_max + 1
    for prof in (p, q):
        if len(prof.dims) < need:
            raise ValueError(f"profile {prof.label!r} has {len(prof.dims)} bands, need {need}")
    p_sum, p_cap = _prefix(p, need)
    q_sum, q_cap = _prefix(q, need)
    n = np.arange(n_max + 1)[:, None]
    l = np.arange(l_max + 1)[None, :]
    per_k, witnesses = [], []
    for k in range(k_max + 1):
        f1, s1, lhs1, rhs1 = _side(p_sum, p_cap, q_sum, q_cap, n, l, k)
        f2, s2, lhs2, rhs2 = _side(q_sum, q_cap, p_sum, p_cap, n, l, k)
        fail = f1 | f2
        if fail.any():
            for side, f, lhs, rhs in (("P<=Q", f1, lhs1, rhs1), ("Q<=P", f2, lhs2, rhs2)):
                if f.any():
                    i, j = divmod(int(np.argmax(f.ravel())), l_max + 1)
                    witnesses.append(Witness(k, i, j, side, int(lhs[i, j]), int(rhs[i, j])))
            per_k.append("violation")
        elif (s1 | s2).any():
            per_k.append("open")
        else:
            per_k.append("pass")
    used = (k_max, n_max, l_max)
    if "pass" in per_k:
        return FWVerdict("Equivalent", per_k.index("pass"), tuple(witnesses), used, tuple(per_k))
    if all(v == "violation" for v in per_k):
        return FWVerdict("Violation", None, tuple(witnesses), used, tuple(per_k))
    return FWVerdict("Inconclusive", None, tuple(witnesses), used, tuple(per_k))


def check_witness(p: BandProfile, q: BandProfile, w: Witness) -> bool:
    """Recompute the failing inequality from the profiles directly."""
    lhs_prof, rhs_prof = (p, q) if w.side == "P<=Q" else (q, p)
    lhs = band_sum(lhs_prof, w.n, w.n + w.l)
    rhs_bands = range(max(w.n - w.k, 0), w.n + w.l + w.k + 1)
    if any(b in rhs_prof.capped for b in rhs_bands):
        return False
    rhs = band_sum(rhs_prof, w.n - w.k, w.n + w.l + w.k)
    return lhs > rhs


@dataclass(frozen=True)
class DomainReport:
    equal: bool
    ratio_sup: float
    ratio_inf: float
    ratio_at_horizon: float
    comparable: bool

    @property
    def spread(self) -> float:
        return self.ratio_sup / self.ratio_inf

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "ratio_sup": self.ratio_sup,
            "ratio_inf": self.ratio_inf,
            "spread": self.spread,
            "ratio_at_horizon": self.ratio_at_horizon,
            "comparable": self.comparable,
        }


SPREAD_LIMIT = 1e6


def weight_ratios(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (1.0 + a * a) / (1.0 + b * b)


def domains_equal_codiag(a_spec: OperatorSpec, b_spec: OperatorSpec, horizon: int = DEFAULT_HORIZON) -> DomainReport:
    """Co-diagonal domains agree iff the weights (1+a_n^2)/(1+b_n^2) stay within fixed bounds.

    Besides the sampled spread, the metadata must agree on which sides are
    unbounded and whether the tails diverge, and the log-ratio range over the
    last dyadic block may not exceed the range seen before it by more than a
    factor of two.
    """
    require_same_basis(a_spec, b_spec)
    r = weight_ratios(a_spec.values(horizon), b_spec.values(horizon))
    sup, inf = float(np.max(r)), float(np.min(r))
    ma, mb = a_spec.meta, b_spec.meta
    flags = (
        ma.bounded_above == mb.bounded_above
        and ma.bounded_below == mb.bounded_below
        and ma.abs_divergent == mb.abs_divergent
    )
    logs = np.abs(np.log(r))
    half = horizon // 2
    drift = half == 0 or float(np.max(logs[half:])) <= 2.0 * float(np.max(logs[:half])) + math.log(2.0)
    comparable = (ma.bounded_above and ma.bounded_below and mb.bounded_above and mb.bounded_below) or (
        flags and drift
    )
    equal = sup / inf <= SPREAD_LIMIT and comparable
    return DomainReport(bool(equal), sup, inf, float(r[-1]), bool(comparable))
