import os
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]

# ctest injects PYTHONPATH/WIOM_BIN; fall back to the default build tree so
# `pytest tests/python` works from a shell too.
for cand in (REPO / "build", REPO / "python"):
    if cand.is_dir() and str(cand) not in sys.path:
        sys.path.insert(0, str(cand))


@pytest.fixture(scope="session")
def wiom_bin():
    path = os.environ.get("WIOM_BIN", str(REPO / "build" / "wiom"))
    if not Path(path).is_file():
        pytest.skip("wiom binary not built")
    return path
