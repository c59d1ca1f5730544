"""
Pytest configuration and shared fixtures.
"""

import pytest
import pytest_asyncio
from fastapi.testclient import TestClient
from httpx import ASGITransport, AsyncClient

from graph import Clustering, build_graph
from main import app, runs_db
from tests.fixtures.test_data import planted_graph, toy_graph


@pytest.fixture(autouse=True)
def clear_runs():
    """Each test starts with an empty run store."""
    runs_db.clear()
    yield
    runs_db.clear()


@pytest.fixture
def client():
    """Create a test client for the FastAPI app."""
    return TestClient(app)


@pytest_asyncio.fixture
async def async_client():
    """Create an async test client for the FastAPI app."""
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac


@pytest.fixture
def triangle_graph():
    return toy_graph("single_triangle")


@pytest.fixture
def star_graph():
    return toy_graph("star4")


@pytest.fixture
def planted_instance():
    """Three cliques (4, 3, 3) with four flipped labels, and the planted truth."""
    return planted_graph([4, 3, 3], flips=4, seed=3)


@pytest.fixture
def split_truth_instance():
    """A + 4-clique whose ground truth splits it in two.

    The graph optimum keeps the clique whole (0 mistakes), so mistakes
    measured against the graph and against the truth differ.
    """
    g = build_graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    truth = Clustering(assignment=(0, 0, 1, 1))
    return g, truth


@pytest.fixture
def graph_payload():
    return {"n": 3, "plus_edges": [[0, 1], [1, 2]]}
