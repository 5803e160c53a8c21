import numpy as np
import pytest

from zefcode.codes import ClassicalCode, lift_classical
from zefcode.compress import Ensemble

WORDS = ("0", "10", "110", "111")
DYADIC = (0.5, 0.25, 0.125, 0.125)
UNIFORM = (0.25, 0.25, 0.25, 0.25)


@pytest.fixture
def words():
    return WORDS


@pytest.fixture
def classical():
    return ClassicalCode(WORDS)


@pytest.fixture
def code():
    return lift_classical(WORDS)


@pytest.fixture
def dyadic(code):
    return Ensemble.from_words(code, WORDS, DYADIC)


@pytest.fixture
def uniform(code):
    return Ensemble.from_words(code, WORDS, UNIFORM)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
