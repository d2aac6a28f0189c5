from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from packetflow.instances import random_scenario

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def fractions(lo=0, hi=8, max_denominator=12):
    return st.builds(
        lambda n, d: Fraction(n, d),
        st.integers(lo * max_denominator, hi * max_denominator),
        st.integers(1, max_denominator),
    ).map(lambda x: min(max(x, Fraction(lo)), Fraction(hi)))


def positive_fractions(hi=6, max_denominator=12):
    return st.builds(Fraction, st.integers(1, hi * max_denominator), st.just(max_denominator))


scenarios = st.integers(0, 10**6).map(random_scenario)


@st.composite
def step_functions(draw, max_pieces=4, signed=False):
    n = draw(st.integers(0, max_pieces))
    t = draw(fractions(0, 3))
    pieces = []
    for _ in range(n):
        t += draw(fractions(0, 1))
        length = draw(positive_fractions(2))
        lo = -4 if signed else 0
        pieces.append((t, t + length, draw(fractions(lo, 4))))
        t += length
    return pieces


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
