"""Print band profiles of A_t for a few exponents and the k-shift verdict between neighbours."""
import argparse

from diagop.domains import band_profile, fw_decide, horizon_for_bands
from diagop.operator_model import make_family


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t", type=float, nargs="+", default=[0.3, 0.4, 0.5, 0.6, 0.7])
    parser.add_argument("--bands", type=int, default=34)
    args = parser.parse_args()
    k_max, l_max = 2, 8
    n_max = args.bands - k_max - l_max
    profiles = []
    for t in args.t:
        spec = make_family("A_t", t=t)
        horizon = horizon_for_bands(spec, args.bands)
        prof = band_profile(spec, args.bands, horizon)
        profiles.append(prof)
        print(f"A_{t:g}  horizon {horizon:>8d}  dims {list(prof.dims[:12])} ...")
    for (t1, p), (t2, q) in zip(zip(args.t, profiles), zip(args.t[1:], profiles[1:])):
        verdict = fw_decide(p, q, k_max=k_max, n_max=n_max, l_max=l_max)
        print(f"A_{t1:g} vs A_{t2:g}: {verdict.outcome}  per k {list(verdict.per_k)}")


if __name__ == "__main__":
    main()
