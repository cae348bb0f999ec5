import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcmce.codes import DegreeProfile, generate_h  # noqa: E402


@pytest.fixture(scope="session")
def toy_h():
    """Regular column-weight-3 code, n0=4, p=64 (n=256)."""
    return generate_h(DegreeProfile((3, 3, 3, 3), 64), np.random.default_rng(11))


@pytest.fixture(scope="session")
def desk_profiles():
    return (9, 9, 9, 9), (5, 8, 10, 13)
