import numpy as np
import pytest

from signedbc import build_signed_graph, generate_er_signed
from signedbc.rng import make_rng

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def fig2():
    return build_signed_graph(3, [(0, 2, -1), (0, 1, 1), (1, 2, 1)])


def random_graph(seed, n=None, n_max=12, p1=None, p2=None):
    """Small signed ER graph for property tests."""
    r = make_rng(seed)
    if n is None:
        n = int(r.integers(1, n_max + 1))
    if p1 is None:
        p1 = float(r.random())
    if p2 is None:
        p2 = float(r.random())
    return generate_er_signed(n, p1, p2, r)


def brute_step(x, adjacency, c, scaled=True, order=None):
    """Per-node reference update, straight from the definition.

    Reads only the frozen snapshot ``x``; ``order`` permutes the node
    processing order to show it does not matter.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.empty(n)
    for i in (range(n) if order is None else order):
        num = den = 0.0
        for j in range(n):
            a = adjacency[i][j]
            if a == 0:
                continue
            d = x[j] - x[i]
            if not abs(d) < c:
                continue
            if a > 0 or i == j or not scaled:
                m = d
            elif d != 0:
                m = np.sign(d) * abs(c - abs(d))
            else:
                m = np.sign(j - i) * c
            num += a * m
            den += abs(a)
        out[i] = x[i] + num / den
    return out
