"""Diagonal self-adjoint operators as eigenvalue sequences with tail metadata."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .closedsets import ClosedSetApprox
from .genexpr import (
    Expr,
    GeneratorError,
    Num,
    evaluate_many,
    parse_generator,
    tail_constants,
    to_text,
)

DEFAULT_HORIZON = 4096
DEFAULT_WINDOW = (-64.0, 64.0)
DEFAULT_RESOLUTION = 1e-6
CHECK_DELTA = 1e-2
CHECK_CLUSTER = 50

FAMILIES = ("example41_A", "example41_B", "A_t", "B_t", "A_F", "rationals", "constant", "K0")


class SpecError(ValueError):
    """Malformed operator description or family parameters."""


class BasisMismatch(ValueError):
    """Two operators compared entrywise live in different labelled bases."""


class MetadataInconsistent(ValueError):
    """Sampled eigenvalues contradict the declared tail metadata."""


# --- pairing -----------------------------------------------------------------

def pair_encode(k: int, m: int) -> int:
    """Index of the pair (k, m) under n = 2^(k-1)(2m-1)."""
    k, m = int(k), int(m)
    if k < 1 or m < 1:
        raise ValueError("pair components start at 1")
    n = (1 << (k - 1)) * (2 * m - 1)
    if n > np.iinfo(np.int64).max:
        raise OverflowError(f"pair ({k}, {m}) exceeds the 64-bit index range")
    return n


def pair_decode(n: int) -> tuple[int, int]:
    n = int(n)
    if n < 1:
        raise ValueError("indices start at 1")
    low = n & -n
    return low.bit_length(), (n // low + 1) // 2


# --- data types --------------------------------------------------------------

@dataclass(frozen=True)
class TailMeta:
    """Declared analytic facts about the tail of a sequence.

    ``acc_points``/``acc_intervals`` describe the limit set of the tail,
    including values taken infinitely often.
    """

    bounded_above: bool
    bounded_below: bool
    acc_points: tuple[float, ...] = ()
    acc_intervals: tuple[tuple[float, float], ...] = ()
    abs_divergent: bool = False
    finitely_many_isolated: bool = False

    def __post_init__(self):
        if self.abs_divergent and self.bounded_above and self.bounded_below:
            raise SpecError("a divergent tail cannot be bounded on both sides")
        if self.abs_divergent and (self.acc_points or self.acc_intervals):
            raise SpecError("a divergent tail has no accumulation points")
        for a, b in self.acc_intervals:
            if not a < b:
                raise SpecError(f"bad accumulation interval {(a, b)}")

    def accumulation(self, window: Sequence[float]) -> ClosedSetApprox:
        return ClosedSetApprox.build(
            window,
            self.acc_points,
            self.acc_intervals,
            not self.bounded_above,
            not self.bounded_below,
        )

    @property
    def accumulation_empty(self) -> bool:
        return not self.acc_points and not self.acc_intervals

    def to_json(self) -> dict:
        return {
            "bounded_above": self.bounded_above,
            "bounded_below": self.bounded_below,
            "accumulation": {
                "points": list(self.acc_points),
                "intervals": [list(iv) for iv in self.acc_intervals],
                "abs_divergent": self.abs_divergent,
            },
            "finitely_many_isolated": self.finitely_many_isolated,
        }


@dataclass(frozen=True)
class EigenvalueSequence:
    prefix: tuple[float, ...]
    generator: Expr
    meta: TailMeta
    label: str

    @property
    def generator_text(self) -> str:
        return to_text(self.generator)

    def values(self, horizon: int) -> np.ndarray:
        """Eigenvalues a_1..a_horizon (read-only array)."""
        return _values(self, int(horizon))

    def value(self, n: int) -> float:
        if n <= len(self.prefix):
            return float(self.prefix[n - 1])
        return float(evaluate_many(self.generator, [n])[0])

    def infinite_multiplicity_values(self) -> list[float]:
        return tail_constants(self.generator)


@lru_cache(maxsize=256)
def _values(seq: EigenvalueSequence, horizon: int) -> np.ndarray:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    head = np.asarray(seq.prefix[:horizon], dtype=np.float64)
    if horizon > len(seq.prefix):
        tail = evaluate_many(seq.generator, np.arange(len(seq.prefix) + 1, horizon + 1))
        head = np.concatenate((head, tail))
    head.setflags(write=False)
    return head


@dataclass(frozen=True)
class OperatorSpec:
    seq: EigenvalueSequence
    basis_label: str = "std"

    @property
    def label(self) -> str:
        return self.seq.label

    @property
    def meta(self) -> TailMeta:
        return self.seq.meta

    def values(self, horizon: int) -> np.ndarray:
        return self.seq.values(horizon)

    def value(self, n: int) -> float:
        return self.seq.value(n)

    def to_json(self) -> dict:
        return {
            "label": self.seq.label,
            "basis": self.basis_label,
            "prefix": list(self.seq.prefix),
            "generator": self.seq.generator_text,
            "meta": self.seq.meta.to_json(),
        }


def require_same_basis(a: OperatorSpec, b: OperatorSpec) -> None:
    if a.basis_label != b.basis_label:
        raise BasisMismatch(f"basis {a.basis_label!r} differs from {b.basis_label!r}")


def make_spec(
    label: str,
    generator: str | Expr,
    meta: TailMeta,
    prefix: Iterable[float] = (),
    basis: str = "std",
) -> OperatorSpec:
    gen = parse_generator(generator) if isinstance(generator, str) else generator
    pre = tuple(float(v) for v in prefix)
    if not all(math.isfinite(v) for v in pre):
        raise SpecError("prefix values must be finite reals")
    return OperatorSpec(EigenvalueSequence(pre, gen, meta, label), basis)


def perturb(spec: OperatorSpec, shifts: Iterable[tuple[int, float]], label: str | None = None) -> OperatorSpec:
    """spec + K for the finite-rank diagonal K given by (index, shift) pairs."""
    shifts = [(int(i), float(s)) for i, s in shifts]
    if any(i < 1 for i, _ in shifts):
        raise ValueError("perturbation indices start at 1")
    if not shifts:
        return spec
    top = max([len(spec.seq.prefix)] + [i for i, _ in shifts])
    vals = np.array(spec.values(top), dtype=np.float64)
    for i, s in shifts:
        vals[i - 1] += s
    seq = replace(spec.seq, prefix=tuple(float(v) for v in vals), label=label or f"{spec.label}+K")
    return OperatorSpec(seq, spec.basis_label)


# --- metadata consistency ----------------------------------------------------

@dataclass(frozen=True)
class MetaReport:
    """Outcome of the sampled metadata check.

    ``unsupported`` lists declared limit points with fewer than two samples
    nearby; ``spurious`` lists (centre, size) of large sample clusters far
    from the declared limit set.
    """

    horizon: int
    unsupported: tuple[float, ...]
    spurious: tuple[tuple[float, int], ...]

    @property
    def ok(self) -> bool:
        return not self.unsupported and not self.spurious


def _declared_probe_points(meta: TailMeta, window: Sequence[float], delta: float) -> list[float]:
    lo, hi = window
    probes = [p for p in meta.acc_points if lo <= p <= hi]
    for a, b in meta.acc_intervals:
        a, b = max(a, lo), min(b, hi)
        if a <= b:
            count = int(math.floor((b - a) / delta)) + 1
            probes.extend(a + delta * np.arange(count))
            probes.append(b)
    return sorted(set(float(p) for p in probes))


@lru_cache(maxsize=256)
def meta_report(
    spec: OperatorSpec,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
    delta: float = CHECK_DELTA,
    window: tuple[float, float] = DEFAULT_WINDOW,
    min_cluster: int = CHECK_CLUSTER,
) -> MetaReport:
    vals = np.sort(spec.values(horizon))
    meta = spec.meta
    unsupported = []
    for p in _declared_probe_points(meta, window, delta):
        lo_i = np.searchsorted(vals, p - delta, side="right")
        hi_i = np.searchsorted(vals, p + delta, side="left")
        if hi_i - lo_i < 2:
            unsupported.append(p)
    declared = meta.accumulation((-np.inf, np.inf))
    spurious = []
    if vals.size:
        breaks = np.nonzero(np.diff(vals) >= resolution)[0]
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [vals.size - 1]))
        for s, e in zip(starts, ends):
            size = int(e - s + 1)
            if size < min_cluster:
                continue
            centre = float(vals[(s + e) // 2])
            if not window[0] <= centre <= window[1]:
                continue
            gap = min(declared.distance_to(float(vals[s])), declared.distance_to(float(vals[e])))
            if gap > delta:
                spurious.append((centre, size))
    return MetaReport(int(horizon), tuple(unsupported), tuple(spurious))


def check_metadata(spec: OperatorSpec, horizon: int = DEFAULT_HORIZON, resolution: float = DEFAULT_RESOLUTION) -> MetaReport:
    """Raise when samples pile up where the metadata declares nothing.

    Declared points lacking nearby samples are tolerated and only reported:
    slowly converging tails need not reach every limit by the horizon.
    """
    report = meta_report(spec, int(horizon), float(resolution))
    if report.spurious:
        where = ", ".join(f"{c:g} ({n} samples)" for c, n in report.spurious)
        raise MetadataInconsistent(f"{spec.label}: undeclared sample clusters at {where}")
    return report


# --- built-in families -------------------------------------------------------

def _literal(x: float) -> str:
    return to_text(Num(float(x)))


def rational_enumeration(bound: float, length: int, negative_first: bool = False) -> list[float]:
    """Zig-zag listing of the rationals in [-bound, bound] by increasing denominator."""
    out: list[float] = []
    q = 1
    while len(out) < length:
        if q == 1:
            out.append(0.0)
        limit = int(math.floor(bound * q))
        for p in range(1, limit + 1):
            if math.gcd(p, q) != 1:
                continue
            pair = (-p / q, p / q) if negative_first else (p / q, -p / q)
            out.extend(pair)
        q += 1
    return out[:length]


def make_family(name: str, *, t: float | None = None, s: float | None = None, F: str | None = None,
                M: float = 1.0, window: float = DEFAULT_WINDOW[1], length: int = 2 * DEFAULT_HORIZON,
                negative_first: bool = False, c: float = 0.0, basis: str = "std") -> OperatorSpec:
    """Build one of the named operator families.

    ``A_t`` needs 0 < t < 1, ``B_t`` needs 0 <= t <= 1, ``A_F`` takes a
    predicate in generator syntax (``"even(n)"``, ``"n in {1,4}"``),
    ``rationals`` takes the bound ``M``. ``K0`` is the diagonal shift
    (t - s)/(m + 2) carrying B_s to B_t; its limit set is listed up to
    ``window`` terms, like the integer lattice of ``B_t``.
    """
    if name == "example41_A":
        meta = TailMeta(False, True, (0.0,), (), False, False)
        return make_spec("example41_A", "if odd(n) then (n + 1) / 2 else 0", meta, basis=basis)
    if name == "example41_B":
        return constant(0.0, label="example41_B", basis=basis)
    if name == "constant":
        return constant(c, basis=basis)
    if name == "A_t":
        if t is None or not 0 < t < 1:
            raise SpecError("A_t needs 0 < t < 1")
        meta = TailMeta(False, True, (), (), True, False)
        return make_spec(f"A_{t:g}", f"2^(n^{_literal(t)})", meta, basis=basis)
    if name == "B_t":
        if t is None or not 0 <= t <= 1:
            raise SpecError("B_t needs 0 <= t <= 1")
        lattice = tuple(float(k) for k in range(1, int(math.floor(window)) + 1))
        meta = TailMeta(False, True, lattice, (), False, t == 0)
        gen = "k(n)" if t == 0 else f"k(n) + {_literal(t)}/(m(n) + 2)"
        return make_spec(f"B_{t:g}", gen, meta, basis=basis)
    if name == "K0":
        if s is None or t is None or not 0 <= s < t <= 1:
            raise SpecError("K0 needs 0 <= s < t <= 1")
        gap = t - s
        limits = [gap / (m + 2) for m in range(1, int(math.floor(window)) + 1)] + [0.0]
        meta = TailMeta(True, True, tuple(sorted(limits)), (), False, False)
        return make_spec(f"K0_{s:g}_{t:g}", f"{_literal(gap)}/(m(n) + 2)", meta, basis=basis)
    if name == "A_F":
        if not F:
            raise SpecError("A_F needs a predicate F")
        try:
            gen = parse_generator(f"if {F} then 1 else 0")
        except GeneratorError as exc:
            raise SpecError(f"bad predicate {F!r}: {exc}") from exc
        meta = TailMeta(True, True, tuple(tail_constants(gen)), (), False, True)
        return make_spec(f"A_F[{F}]", gen, meta, basis=basis)
    if name == "rationals":
        if not M > 0:
            raise SpecError("rationals needs M > 0")
        vals = rational_enumeration(M, length, negative_first)
        meta = TailMeta(True, True, (), ((-float(M), float(M)),), False, True)
        tag = "neg" if negative_first else "pos"
        return make_spec(f"rationals_{M:g}_{tag}", "0", meta, prefix=vals, basis=basis)
    raise SpecError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")


def constant(c: float, label: str | None = None, basis: str = "std") -> OperatorSpec:
    meta = TailMeta(True, True, (float(c),), (), False, True)
    return make_spec(label or f"const_{c:g}", _literal(c), meta, basis=basis)


def from_values(values: Sequence[float], tail: float | None = None, label: str = "seq",
                basis: str = "std", meta: TailMeta | None = None) -> OperatorSpec:
    """Finite list of eigenvalues followed by a constant tail (default: last value)."""
    values = [float(v) for v in values]
    if tail is None:
        tail = values[-1] if values else 0.0
    if meta is None:
        meta = TailMeta(True, True, (float(tail),), (), False, True)
    return make_spec(label, _literal(tail), meta, prefix=values, basis=basis)


# --- JSON --------------------------------------------------------------------

_SPEC_KEYS = {"label", "basis", "prefix", "generator", "meta"}
_META_KEYS = {"bounded_above", "bounded_below", "accumulation", "finitely_many_isolated"}
_ACC_KEYS = {"points", "intervals", "abs_divergent"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SpecError(f"{where} must be an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SpecError(f"unknown keys in {where}: {', '.join(extra)}")


def spec_from_json(data: dict) -> OperatorSpec:
    _reject_unknown(data, _SPEC_KEYS, "operator spec")
    meta_raw = data.get("meta")
    _reject_unknown(meta_raw, _META_KEYS, "meta")
    acc = meta_raw.get("accumulation", {})
    _reject_unknown(acc, _ACC_KEYS, "accumulation")
    try:
        meta = TailMeta(
            bool(meta_raw["bounded_above"]),
            bool(meta_raw["bounded_below"]),
            tuple(float(p) for p in acc.get("points", [])),
            tuple((float(a), float(b)) for a, b in acc.get("intervals", [])),
            bool(acc.get("abs_divergent", False)),
            bool(meta_raw.get("finitely_many_isolated", False)),
        )
        return make_spec(
            str(data["label"]),
            str(data["generator"]),
            meta,
            prefix=data.get("prefix", []),
            basis=str(data.get("basis", "std")),
        )
    except KeyError as exc:
        raise SpecError(f"missing key {exc.args[0]!r}") from exc


def load_spec(path: str) -> OperatorSpec:
    with open(path) as fh:
        return spec_from_json(json.load(fh))
