import sys
from pathlib import Path

import pytest

# Make sibling test helpers (synthetic.py) importable regardless of rootdir.
sys.path.insert(0, str(Path(__file__).resolve().parent))

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
