from __future__ import annotations

import pytest

from adgraph.extractor import load_blocklist, load_dictionary


@pytest.fixture(scope="session")
def dictionary():
    return load_dictionary()


@pytest.fixture(scope="session")
def blocklist():
    return load_blocklist()


@pytest.fixture(scope="session")
def corpus50():
    from helpers import fixture_corpus

    return fixture_corpus()
