"""Spectrum, essential spectrum and related set-valued invariants of diagonal operators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .closedsets import ClosedSetApprox, intersect_closed
from .operator_model import (
    DEFAULT_HORIZON,
    DEFAULT_RESOLUTION,
    DEFAULT_WINDOW,
    OperatorSpec,
    check_metadata,
    perturb,
)

__all__ = [
    "SigmaBar",
    "DiscreteEigenvalue",
    "SpectrumReport",
    "PerturbationOutcome",
    "spectrum",
    "essential_spectrum",
    "spectrum_report",
    "sigma_bar",
    "is_compact_resolvent",
    "weyl_witnesses",
    "intersect_closed",
    "ess_via_perturbations",
    "perturbation_outcome",
]


def _window(window) -> tuple[float, float]:
    lo, hi = window
    return float(lo), float(hi)


def _limit_data(spec: OperatorSpec) -> tuple[list[float], list[tuple[float, float]]]:
    meta = spec.meta
    points = list(meta.acc_points) + spec.seq.infinite_multiplicity_values()
    return points, list(meta.acc_intervals)


def spectrum(
    spec: OperatorSpec,
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> ClosedSetApprox:
    """Closure of the sampled eigenvalues together with the declared limit set."""
    points, intervals = _limit_data(spec)
    meta = spec.meta
    return ClosedSetApprox.from_samples(
        spec.values(horizon),
        _window(window),
        resolution,
        extra_points=points,
        extra_intervals=intervals,
        unbounded_above=not meta.bounded_above,
        unbounded_below=not meta.bounded_below,
    )


def essential_spectrum(
    spec: OperatorSpec,
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> ClosedSetApprox:
    """Declared limit set plus values of infinite multiplicity, clipped to the window.

    Sample clusters never add to this set; they only feed the metadata check,
    which raises :class:`MetadataInconsistent` on undeclared mass.
    """
    check_metadata(spec, horizon, resolution)
    points, intervals = _limit_data(spec)
    meta = spec.meta
    return ClosedSetApprox.build(
        _window(window), points, intervals, not meta.bounded_above, not meta.bounded_below
    )


@dataclass(frozen=True)
class DiscreteEigenvalue:
    value: float
    multiplicity: int
    at_least: bool  # count includes generator indices, so it is a horizon lower bound


@dataclass(frozen=True)
class SpectrumReport:
    spectrum: ClosedSetApprox
    essential: ClosedSetApprox
    discrete: tuple[DiscreteEigenvalue, ...]

    def to_json(self) -> dict:
        return {
            "spectrum": self.spectrum.to_json(),
            "essential": self.essential.to_json(),
            "discrete": [
                {"value": d.value, "multiplicity": d.multiplicity, "at_least": d.at_least}
                for d in self.discrete
            ],
        }


def spectrum_report(
    spec: OperatorSpec,
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> SpectrumReport:
    window = _window(window)
    full = spectrum(spec, window, horizon, resolution)
    ess = essential_spectrum(spec, window, horizon, resolution)
    vals = spec.values(horizon)
    n_prefix = min(len(spec.seq.prefix), horizon)
    inside = (vals >= window[0]) & (vals <= window[1])
    uniq, inverse, counts = np.unique(vals[inside], return_inverse=True, return_counts=True)
    idx = np.nonzero(inside)[0]
    from_gen = np.zeros(uniq.size, dtype=bool)
    np.logical_or.at(from_gen, inverse, idx >= n_prefix)
    discrete = tuple(
        DiscreteEigenvalue(float(v), int(c), bool(g))
        for v, c, g in zip(uniq, counts, from_gen)
        if not ess.contains(float(v))
    )
    return SpectrumReport(full, ess, discrete)


@dataclass(frozen=True)
class SigmaBar:
    ess: ClosedSetApprox
    unbounded_bit: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, SigmaBar):
            return NotImplemented
        return self.unbounded_bit == other.unbounded_bit and self.ess.same_set(other.ess)

    def __hash__(self) -> int:
        return hash((self.unbounded_bit, self.ess.points, self.ess.intervals))

    def to_json(self) -> dict:
        return {"ess": self.ess.to_json(), "unbounded_bit": self.unbounded_bit}


def sigma_bar(
    spec: OperatorSpec,
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> SigmaBar:
    ess = essential_spectrum(spec, window, horizon, resolution)
    bounded = spec.meta.bounded_above and spec.meta.bounded_below
    return SigmaBar(ess, 0 if bounded else 1)


def is_compact_resolvent(spec: OperatorSpec) -> bool:
    meta = spec.meta
    return meta.accumulation_empty and meta.abs_divergent and not spec.seq.infinite_multiplicity_values()


def weyl_witnesses(
    spec: OperatorSpec, lam: float, eps: float, count: int, horizon: int = DEFAULT_HORIZON
) -> list[int]:
    """First ``count`` indices n <= horizon with |a_n - lam| < eps."""
    if eps <= 0 or count < 1:
        raise ValueError("need eps > 0 and count >= 1")
    hits = np.nonzero(np.abs(spec.values(horizon) - lam) < eps)[0][:count]
    return [int(i) + 1 for i in hits]


Perturbation = Sequence[tuple[int, float]]


@dataclass(frozen=True)
class PerturbationOutcome:
    result: ClosedSetApprox
    essential: ClosedSetApprox
    eliminated: tuple[float, ...]  # sampled spectral values of A absent from the result
    retained: tuple[float, ...]  # sampled values surviving every perturbation

    def to_json(self) -> dict:
        return {
            "result": self.result.to_json(),
            "essential": self.essential.to_json(),
            "eliminated": list(self.eliminated),
            "retained": list(self.retained),
        }


def ess_via_perturbations(
    spec: OperatorSpec,
    perturbations: Iterable[Perturbation],
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> ClosedSetApprox:
    """Intersection of the spectra of spec + K over the given finite-rank K."""
    window = _window(window)
    sets = [spectrum(perturb(spec, k), window, horizon, resolution) for k in perturbations]
    if not sets:
        return spectrum(spec, window, horizon, resolution)
    return intersect_closed(sets)


def perturbation_outcome(
    spec: OperatorSpec,
    perturbations: Iterable[Perturbation],
    window: Sequence[float] = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    resolution: float = DEFAULT_RESOLUTION,
) -> PerturbationOutcome:
    window = _window(window)
    result = ess_via_perturbations(spec, list(perturbations), window, horizon, resolution)
    ess = essential_spectrum(spec, window, horizon, resolution)
    vals = np.unique(spec.values(horizon))
    vals = vals[(vals >= window[0]) & (vals <= window[1])]
    gone = tuple(float(v) for v in vals if not result.contains(float(v)))
    kept = tuple(float(v) for v in vals if result.contains(float(v)))
    return PerturbationOutcome(result, ess, gone, kept)
