from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from provkit.model import EdgeKind, NodeKind, ProvNode, make_edge, make_node, set_attribute
from provkit.store import BACKENDS, open_store

settings.register_profile(
    "toolkit",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("toolkit")


@pytest.fixture(params=BACKENDS)
def backend(request) -> str:
    return request.param


@pytest.fixture
def store(backend):
    s = open_store(backend)
    yield s
    s.close()


def sample_elements():
    """The canonical instrumentation example: a photo entity, the transform
    activity that read it, and the Used edge between them."""
    entity = make_node(NodeKind.ENTITY, "e1")
    set_attribute(entity, "filename", "IMG-0942.jpg")
    activity = make_node(NodeKind.ACTIVITY, "a1")
    used = make_edge(EdgeKind.USED, activity, entity, "u1")
    return entity, activity, used


def chain_elements(n: int) -> tuple[list[ProvNode], list]:
    """A derivation chain m1 <- m2 <- ... <- mn (edges point at the past)."""
    nodes = [make_node(NodeKind.ENTITY, f"m{i + 1}") for i in range(n)]
    edges = [
        make_edge(EdgeKind.WAS_DERIVED_FROM, nodes[i + 1], nodes[i], f"d{i + 1}")
        for i in range(n - 1)
    ]
    return nodes, edges
