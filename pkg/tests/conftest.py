import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from spdiff import LinkSet, build_graph

ROOT = Path(__file__).resolve().parents[1]
ML100K = Path(os.environ.get("SPDIFF_ML100K", ROOT / "data" / "ml-100k" / "u.data"))

# toy graph G0: u0={a,b}, u1={a,c}, u2={b,c,d} with a..d = 0..3
G0_LINKS = [(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2), (2, 3)]


@pytest.fixture
def g0():
    return build_graph(LinkSet.from_pairs(G0_LINKS), 3, 4)


@pytest.fixture(scope="session")
def ml100k_path():
    if not ML100K.exists():
        pytest.skip(f"MovieLens 100k not found at {ML100K} (see README, 'Data')")
    return ML100K


def random_links(rng, n_users, n_items, density):
    mask = rng.random((n_users, n_items)) < density
    users, items = np.nonzero(mask)
    return LinkSet(users, items)


@st.composite
def small_graphs(draw, max_users=12, max_items=15):
    """Random bipartite graph with at least one link; some nodes may be isolated."""
    n_users = draw(st.integers(1, max_users))
    n_items = draw(st.integers(1, max_items))
    density = draw(st.floats(0.1, 0.6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    links = random_links(rng, n_users, n_items, density)
    if not len(links):
        links = LinkSet([0], [0])
    return links, n_users, n_items


# -- acceptance reporting --------------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
