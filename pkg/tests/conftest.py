import os
import sys

import pytest

# Add the project root directory to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.grassmann import GeneratorSignature, Multivector  # noqa: E402
from core.scalars import ScalarMode  # noqa: E402


@pytest.fixture
def exact():
    return ScalarMode.EXACT


@pytest.fixture
def fiber_signature():
    """One base direction, two psi and two psi-hat generators."""
    return GeneratorSignature.standard(1, 2)


@pytest.fixture
def generator(fiber_signature):
    def build(index, coefficient=1):
        return Multivector.generator(fiber_signature, index, ScalarMode.EXACT, coefficient)

    return build


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs a whole suite on an acceptance scenario")
