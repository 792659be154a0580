import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def specfun_oracle():
    return json.loads((DATA / "specfun_oracle.json").read_text())["rows"]
