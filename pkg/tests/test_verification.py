"""The extra module invariants behind `lowdeg verify` (the 12 acceptance
criteria live in test_acceptance.py)."""

import pytest

from lowdeg.verification import INVARIANT_CHECKS, _check


@pytest.mark.parametrize("name,fn", INVARIANT_CHECKS,
                         ids=[name.split(":")[1].strip().replace(" ", "-")
                              for name, _ in INVARIANT_CHECKS])
def test_module_invariant(name, fn):
    result = _check(name, fn)
    print(f"{'PASS' if result.passed else 'FAIL'}  {name}  "
          f"[{result.seconds:.1f}s]  {result.detail}")
    assert result.passed, f"{name}: {result.detail}"
