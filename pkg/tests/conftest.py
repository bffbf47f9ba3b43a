import shutil
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def minicorpus(tmp_path) -> Path:
    """A writable copy of the bundled mini-corpus with its configs."""
    dest = tmp_path / "mini"
    shutil.copytree(FIXTURES / "minicorpus", dest)
    return dest
