"""One test per acceptance criterion; each prints a PASS/FAIL line.

Run standalone with `python3 tests/test_acceptance.py` for just the matrix.
"""
import sys

import pytest

from triakis.checks import CHECKS, run_check

CRITERIA = list(enumerate(CHECKS, start=1))


@pytest.mark.parametrize("number,key", CRITERIA, ids=[f"{n}-{k}" for n, k in CRITERIA])
def test_criterion(number, key, capsys):
    result = run_check(key)
    with capsys.disabled():
        print(f"\n[{number}] {result.line()}")
        for item in result.failures:
            print(f"      failed: {item.label}: observed {item.observed}, expected {item.expected}")
    assert result.passed, [f"{i.label}: {i.observed} vs {i.expected}" for i in result.failures]


def main() -> int:
    failed = 0
    for number, key in CRITERIA:
        result = run_check(key)
        print(f"[{number}] {result.line()}", flush=True)
        for item in result.failures:
            print(f"      failed: {item.label}: observed {item.observed}, expected {item.expected}")
        failed += not result.passed
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
