"""Common Store/Query interface implemented by both storage backends.

Backends differ only in how they lay elements out on disk; every query
operation must return identical results on either one. Traversals are
defined here, on top of the per-backend adjacency primitives:

* *ancestors* follow edges in their stored direction (source -> target).
  PROV relation names point from effect toward cause, so forward traversal
  reaches the influencers of a vertex.
* *descendants* walk edges in reverse.
* both are breadth-first with a visited set, so cycles terminate and the
  recorded depth of a node is its minimum distance from any root.

Stores tolerate open graphs: an edge may name endpoints that were never
written. Traversals walk through such ids; they appear in ``Lineage.depths``
but not in ``Lineage.graph.nodes`` (clients render them as placeholders).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from ..errors import ValidationError
from ..model import (
    AttributeValue,
    Identifier,
    ProvEdge,
    ProvElement,
    ProvNode,
    ProvenanceGraph,
    check_identifier,
    values_equal,
)


@dataclass
class Lineage:
    """The reachable portion of the graph from one or more roots.

    ``depths`` maps every reached id (roots at 0) to its minimum distance;
    ids present in ``depths`` but absent from ``graph.nodes`` are dangling
    endpoints of an open graph.
    """

    graph: ProvenanceGraph = field(default_factory=ProvenanceGraph)
    roots: list[Identifier] = field(default_factory=list)
    depths: dict[Identifier, int] = field(default_factory=dict)

    def placeholder_ids(self) -> set[Identifier]:
        return set(self.depths) - set(self.graph.nodes)


def _check_depth(max_depth: Optional[int]) -> Optional[int]:
    if max_depth is None:
        return None
    if not isinstance(max_depth, int) or isinstance(max_depth, bool) or max_depth < 0:
        raise ValidationError(f"max_depth must be a non-negative int, got {max_depth!r}")
    return max_depth


class Store:
    """Abstract provenance store. Safe for concurrent put and query calls."""

    backend: str = "abstract"

    # -- backend primitives ------------------------------------------------

    def put_node(self, node: ProvNode) -> None:
        """Write a node; a duplicate id merges attributes (last-write-wins)."""
        raise NotImplementedError

    def put_edge(self, edge: ProvEdge) -> None:
        """Write an edge; a duplicate id must agree on kind and endpoints."""
        raise NotImplementedError

    def get_node(self, node_id: Identifier) -> Optional[ProvNode]:
        raise NotImplementedError

    def get_edge(self, edge_id: Identifier) -> Optional[ProvEdge]:
        raise NotImplementedError

    def find_nodes(self, key: str, value: AttributeValue) -> list[ProvNode]:
        """Nodes carrying exactly that (key, value) pair, matched on value and variant."""
        raise NotImplementedError

    def edges_from(self, node_id: Identifier) -> list[ProvEdge]:
        """All edges whose source is the given id."""
        raise NotImplementedError

    def edges_to(self, node_id: Identifier) -> list[ProvEdge]:
        """All edges whose target is the given id."""
        raise NotImplementedError

    def all_nodes(self) -> Iterator[ProvNode]:
        raise NotImplementedError

    def all_edges(self) -> Iterator[ProvEdge]:
        raise NotImplementedError

    def fsck(self) -> list[dict]:
        """Internal-consistency check; returns one record per violation."""
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    # -- shared behaviour ----------------------------------------------------

    def put(self, element: ProvElement) -> None:
        if isinstance(element, ProvNode):
            self.put_node(element)
        else:
            self.put_edge(element)

    def put_all(self, elements: Iterable[ProvElement]) -> int:
        count = 0
        for element in elements:
            self.put(element)
            count += 1
        return count

    def find_edges(self, key: str, value: AttributeValue) -> list[ProvEdge]:
        """Edges carrying that (key, value) pair. Unlike node lookup this is a
        scan: only node attributes are index-backed."""
        hits = [e for e in self.all_edges() if key in e.attributes and values_equal(e.attributes[key], value)]
        hits.sort(key=lambda e: e.id)
        return hits

    def _traverse(
        self,
        roots: Sequence[Identifier],
        max_depth: Optional[int],
        forward: bool,
    ) -> Lineage:
        max_depth = _check_depth(max_depth)
        seen_roots: list[Identifier] = []
        for root in roots:
            check_identifier(root, "root id")
            if root not in seen_roots:
                seen_roots.append(root)
        lineage = Lineage(roots=seen_roots)
        queue: deque[Identifier] = deque()
        for root in seen_roots:
            lineage.depths[root] = 0
            queue.append(root)
        while queue:
            current = queue.popleft()
            depth = lineage.depths[current]
            node = self.get_node(current)
            if node is not None:
                lineage.graph.insert(node)
            if max_depth is not None and depth >= max_depth:
                continue
            adjacent = self.edges_from(current) if forward else self.edges_to(current)
            for edge in adjacent:
                lineage.graph.insert(edge)
                nxt = edge.target if forward else edge.source
                if nxt not in lineage.depths:
                    lineage.depths[nxt] = depth + 1
                    queue.append(nxt)
        return lineage

    def ancestors(self, node_id: Identifier, max_depth: Optional[int] = None) -> Lineage:
        """Everything that influenced the vertex, to the optional depth bound."""
        return self._traverse([node_id], max_depth, forward=True)

    def descendants(self, node_id: Identifier, max_depth: Optional[int] = None) -> Lineage:
        """Everything the vertex influenced, to the optional depth bound."""
        return self._traverse([node_id], max_depth, forward=False)

    def ancestors_of_set(self, ids: Sequence[Identifier], max_depth: Optional[int] = None) -> Lineage:
        """Union of per-root ancestor lineages; per-node depth is the minimum over roots."""
        if not ids:
            raise ValidationError("ancestors_of_set requires at least one id")
        return self._traverse(list(ids), max_depth, forward=True)

    def descendants_of_set(self, ids: Sequence[Identifier], max_depth: Optional[int] = None) -> Lineage:
        if not ids:
            raise ValidationError("descendants_of_set requires at least one id")
        return self._traverse(list(ids), max_depth, forward=False)

    def connected_subgraph(self, ids: Sequence[Identifier]) -> ProvenanceGraph:
        """Every node and edge in any weakly-connected component touching the ids."""
        if not ids:
            raise ValidationError("connected_subgraph requires at least one id")
        graph = ProvenanceGraph()
        seen: set[Identifier] = set()
        queue: deque[Identifier] = deque()
        for node_id in ids:
            check_identifier(node_id, "subgraph id")
            if node_id not in seen:
                seen.add(node_id)
                queue.append(node_id)
        while queue:
            current = queue.popleft()
            node = self.get_node(current)
            if node is not None:
                graph.insert(node)
            for edge in self.edges_from(current) + self.edges_to(current):
                graph.insert(edge)
                for endpoint in (edge.source, edge.target):
                    if endpoint not in seen:
                        seen.add(endpoint)
                        queue.append(endpoint)
        return graph

    def stats(self) -> dict:
        """Element counts, total and per kind."""
        by_kind: dict[str, int] = {}
        nodes = 0
        for node in self.all_nodes():
            nodes += 1
            by_kind[node.kind.value] = by_kind.get(node.kind.value, 0) + 1
        edges = 0
        for edge in self.all_edges():
            edges += 1
            by_kind[edge.kind.value] = by_kind.get(edge.kind.value, 0) + 1
        return {"nodes": nodes, "edges": edges, "by_kind": by_kind}

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
