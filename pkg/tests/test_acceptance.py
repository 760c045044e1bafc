"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run with ``pytest tests/test_acceptance.py -v`` or via ``kscrit verify``.
"""

import pytest

from kscrit.acceptance import REGISTRY


@pytest.mark.parametrize("criterion", list(REGISTRY), ids=list(REGISTRY))
def test_acceptance_criterion(criterion):
    items = REGISTRY[criterion]()
    assert items, f"{criterion} produced no checks"
    for item in items:
        status = "PASS" if item.passed else "FAIL"
        print(
            f"{status} {item.criterion} {item.name}: expected {item.expected}, "
            f"actual {item.actual}, tolerance {item.tolerance}"
        )
    failures = [i for i in items if not i.passed]
    assert not failures, "; ".join(
        f"{i.name}: expected {i.expected}, actual {i.actual} (tol {i.tolerance})"
        for i in failures
    )
