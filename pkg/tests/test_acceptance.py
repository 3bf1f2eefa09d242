"""The twelve end-to-end reproduction criteria, one test each.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per criterion.
"""
import time

import pytest

from diagop.equivalence import b_t_obstruction
from diagop.operator_model import make_family
from diagop.reproduce import CHECKS, run_check
from diagop.spectra import essential_spectrum

# wall-clock budgets in seconds, for the whole check
BUDGETS = {1: 9 * 1.0, 3: 20 * 2.0, 4: 5.0, 10: 10.0}


@pytest.mark.parametrize("number", range(1, len(CHECKS) + 1))
def test_criterion(number):
    start = time.perf_counter()
    result = run_check(number)
    elapsed = time.perf_counter() - start
    print(f"\n{result.line()}  ({elapsed:.2f}s)")
    assert result.passed, result.measured
    if number in BUDGETS:
        assert elapsed < BUDGETS[number]


@pytest.mark.parametrize(
    "name,kw",
    [("A_t", {"t": 0.3}), ("A_t", {"t": 0.5}), ("A_t", {"t": 0.7}),
     ("B_t", {"t": 0.0}), ("B_t", {"t": 0.5}), ("B_t", {"t": 1.0}),
     ("example41_A", {}), ("example41_B", {})],
)
def test_essential_spectrum_under_one_second(name, kw):
    spec = make_family(name, **kw)
    start = time.perf_counter()
    essential_spectrum(spec, (-64.0, 64.0), 4096, 1e-6)
    assert time.perf_counter() - start < 1.0


def test_obstruction_under_two_seconds_per_pair():
    start = time.perf_counter()
    b_t_obstruction(0.123, 0.789)
    assert time.perf_counter() - start < 2.0
