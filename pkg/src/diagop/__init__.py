"""Diagonal self-adjoint operators: spectra, resolvent metrics, equivalences and orbit walks."""

__version__ = "0.1.0"

from .closedsets import ClosedSetApprox, intersect_closed
from .domains import BandProfile, band_profile, domains_equal_codiag, fw_decide
from .equivalence import (
    b_t_obstruction,
    eps_net_diagonalize,
    relatively_compact_check,
    ucres_equivalent,
    wvn_construct,
)
from .genexpr import parse_generator, to_text
from .matching import PermutationPlan, bottleneck_match
from .metrics import MetricParams, nrt_distance, resolvent_interp, srt_distance
from .operator_model import (
    OperatorSpec,
    TailMeta,
    constant,
    from_values,
    load_spec,
    make_family,
    make_spec,
    pair_decode,
    pair_encode,
    perturb,
)
from .spectra import ess_via_perturbations, essential_spectrum, sigma_bar, spectrum
from .turbulence import orbit_walk_compact_at_zero, orbit_walk_unbounded, sign_matched_permutation, verify_walk

__all__ = [
    "BandProfile",
    "ClosedSetApprox",
    "MetricParams",
    "OperatorSpec",
    "PermutationPlan",
    "TailMeta",
    "b_t_obstruction",
    "band_profile",
    "bottleneck_match",
    "constant",
    "domains_equal_codiag",
    "eps_net_diagonalize",
    "ess_via_perturbations",
    "essential_spectrum",
    "from_values",
    "fw_decide",
    "intersect_closed",
    "load_spec",
    "make_family",
    "make_spec",
    "nrt_distance",
    "orbit_walk_compact_at_zero",
    "orbit_walk_unbounded",
    "pair_decode",
    "pair_encode",
    "parse_generator",
    "perturb",
    "relatively_compact_check",
    "resolvent_interp",
    "sigma_bar",
    "sign_matched_permutation",
    "spectrum",
    "srt_distance",
    "to_text",
    "ucres_equivalent",
    "verify_walk",
    "wvn_construct",
]
