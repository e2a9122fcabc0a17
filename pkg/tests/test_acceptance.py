"""Full-size runs of every guaranteed property, one test per criterion.

Each test prints a PASS/FAIL line with the measured extreme and the pinned
tolerance; run with ``pytest -s tests/test_acceptance.py`` to see them.
"""

import pytest

from cavity_branching import selftest

CRITERIA = [
    (1, "symmetric_case"),
    (2, "markov_limit"),
    (3, "unitarity"),
    (4, "route_equivalence"),
    (5, "residue_oracle"),
    (6, "degenerate_detuning"),
    (7, "pole_consistency"),
    (8, "drive_effect"),
    (9, "figure4_symmetry"),
    (10, "dynamics_closed_forms"),
    (11, "determinism"),
]


@pytest.mark.parametrize(
    "number,name", CRITERIA,
    ids=[f"criterion_{n:02d}_{name}" for n, name in CRITERIA])
def test_acceptance_criterion(number, name):
    result = selftest.run_suite(name, fast=False)
    status = "PASS" if result.passed else "FAIL"
    print(f"{status}  criterion {number:2d} [{name}] "
          f"({result.n_checks} checks, {result.seconds:.2f} s): {result.detail}")
    assert result.passed, f"criterion {number} ({name}): {result.detail}"
