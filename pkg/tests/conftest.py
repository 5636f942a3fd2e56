import numpy as np
import pytest

from mbrrepair.codes import admissible_variants, num_edges
from mbrrepair.field import GF256, Field, next_prime
from mbrrepair.params import make_params

F7 = Field.prime(7)

ACCEPTANCE_LINES = []


def prime_field_for(n, d):
    """GF(7), or the smallest larger prime the complete-graph code needs at d = n-1."""
    if d == n - 1:
        return Field.prime(next_prime(max(7, num_edges(n) + 1)))
    return F7


def grid(max_n=7, betas=(1, 2), fields=("gf256", "prime")):
    """(params, variants) for every 2 <= k <= d < n <= max_n."""
    for n in range(3, max_n + 1):
        for d in range(2, n):
            for k in range(2, d + 1):
                for beta in betas:
                    for f in fields:
                        field = GF256 if f == "gf256" else prime_field_for(n, d)
                        params = make_params(n, k, d, field, beta)
                        yield params, admissible_variants(params)


def random_message(params, stripes, rng):
    return rng.integers(0, params.q, size=(stripes, params.B), dtype=np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small():
    """The (n=4, k=2, d=2) instance over GF(7) used in the hand-worked examples."""
    return make_params(4, 2, 2, F7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
