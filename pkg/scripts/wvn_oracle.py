"""Freeze the dyadic prefix matching costs of the two rational enumerations.

Costs are computed with the general bottleneck assignment (threshold search
plus Hopcroft-Karp), independently of the sorted-order shortcut used by the
library, and written to scripts/wvn_oracle.json.
"""
import json
import pathlib
import time

import numpy as np

from diagop.matching import has_perfect_matching
from diagop.operator_model import make_family

HORIZON = 2048
OUT = pathlib.Path(__file__).with_name("wvn_oracle.json")


def assignment_cost(a: np.ndarray, b: np.ndarray) -> float:
    cost = np.abs(a[:, None] - b[None, :])
    candidates = np.unique(cost)
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if has_perfect_matching(cost, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def main() -> None:
    pos = make_family("rationals", M=1.0).values(HORIZON)
    neg = make_family("rationals", M=1.0, negative_first=True).values(HORIZON)
    costs = []
    start = time.perf_counter()
    size = 1
    while size <= HORIZON:
        costs.append(assignment_cost(pos[:size], neg[:size]))
        print(f"prefix {size:5d}: cost {costs[-1]:.6f}")
        size *= 2
    # the acceptance threshold: final cost must not exceed a tenth of the unit scale
    limit = 0.1
    assert costs[-1] <= limit
    OUT.write_text(json.dumps({"horizon": HORIZON, "prefix_costs": costs, "final_cost_limit": limit}, indent=2) + "\n")
    print(f"wrote {OUT} in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
