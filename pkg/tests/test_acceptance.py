"""Acceptance suite: runs every criterion at its stated tolerance and prints
one pass/fail line per criterion.

The same checks back the CLI `verify` subcommand; see lowdeg.verification for
the pinned tolerances.  Run with `pytest tests/test_acceptance.py -v -s` to
see the per-criterion lines, or `lowdeg verify` for the full table.
"""

import pytest

from lowdeg.verification import ACCEPTANCE_CHECKS, _check


@pytest.mark.parametrize("name,fn", ACCEPTANCE_CHECKS,
                         ids=[name.split(":")[0].replace(" ", "-")
                              for name, _ in ACCEPTANCE_CHECKS])
def test_acceptance_criterion(name, fn):
    result = _check(name, fn)
    status = "PASS" if result.passed else "FAIL"
    print(f"{status}  {name}  [{result.seconds:.1f}s]  {result.detail}")
    assert result.passed, f"{name}: {result.detail}"
