import random

import pytest
from hypothesis import settings, strategies as st

from cantor_cdh.homeo import random_homeo, random_point

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
homeos = seeds.map(lambda s: random_homeo(random.Random(s)))
points = seeds.map(lambda s: random_point(random.Random(s)))

ACCEPTANCE = []


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
