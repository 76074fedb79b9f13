from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

# property suites that promise a fixed case count use this explicitly
THOUSAND = settings(max_examples=1000, deadline=None)

PRIMES = (2, 3, 5, 7)

small_fractions = st.builds(Fraction, st.integers(-12, 12), st.integers(1, 4))


def rationals(max_num: int = 200, max_den: int = 50):
    return st.builds(
        lambda n, d: Fraction(n, d),
        st.integers(-max_num, max_num),
        st.integers(1, max_den),
    )


@pytest.fixture(params=PRIMES)
def prime(request) -> int:
    return request.param
