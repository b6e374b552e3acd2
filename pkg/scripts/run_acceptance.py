"""Run only the acceptance tests and print the per-criterion summary.

    python3 scripts/run_acceptance.py
"""

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent
    sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", "-m", "acceptance"]))
