"""Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance."""

import os

import pytest

from permix import acceptance

WORKERS = int(os.environ.get("PERMIX_THREADS", os.cpu_count() or 1))


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    result = acceptance.run_criterion(number, workers=WORKERS, seed=acceptance.DEFAULT_SEED)
    with capsys.disabled():
        print("\n" + acceptance.format_line(result))
    failed = [f"{c.name}: {c.detail}" for c in result.checks if not c.passed]
    assert result.passed, "; ".join(failed)
