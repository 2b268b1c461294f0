import numpy as np
import pytest

from girnn import MnistSet, handwritten_digit_corpus, select_test_targets


@pytest.fixture(scope="session")
def corpus() -> MnistSet:
    return handwritten_digit_corpus()


@pytest.fixture(scope="session")
def train_pool(corpus) -> MnistSet:
    return MnistSet(corpus.images[:1500], corpus.labels[:1500])


@pytest.fixture(scope="session")
def test_targets(corpus) -> MnistSet:
    pool = MnistSet(corpus.images[1500:], corpus.labels[1500:])
    return select_test_targets(pool, seed=13)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
