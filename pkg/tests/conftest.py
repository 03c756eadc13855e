from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_signed_graph(rng, n, density=0.3, weights="pm1"):
    from signet.graph import SignedGraph

    iu = np.triu_indices(n, 1)
    mask = rng.random(iu[0].size) < density
    if weights == "pm1":
        w = rng.choice([-1.0, 1.0], size=mask.sum())
    else:
        w = rng.normal(size=mask.sum())
    return SignedGraph.from_upper(n, iu[0][mask], iu[1][mask], w)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
