import warnings
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def small_corpus():
    from metatrust.harness import generate_corpus

    return generate_corpus(120, 4, seed=11)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    from metatrust.model import train_model

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train_model(small_corpus.pairs, small_corpus.labels, lsa_rank=6, seed=0)
