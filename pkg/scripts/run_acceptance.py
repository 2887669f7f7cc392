"""Run the acceptance criteria and print one PASS/FAIL line per criterion."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    tests = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.exit(pytest.main([str(tests), "-q", "--no-header", "-p", "no:cacheprovider", "--tb=no"]))
