import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `reference`

SAMPLE_DIR = Path(__file__).parent.parent / "sample"


@pytest.fixture(scope="session")
def sample_dir() -> Path:
    return SAMPLE_DIR


@pytest.fixture(scope="session")
def sports_config():
    from lidscore.config import load_config

    return load_config(SAMPLE_DIR / "sports_center.yaml")


@pytest.fixture(scope="session")
def published_config():
    from lidscore.config import load_config

    return load_config(SAMPLE_DIR / "published_tables.yaml")
