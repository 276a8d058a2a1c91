"""Normalized relational backend.

Four tables, one fact per row: ``nodes`` and ``edges`` hold the elements,
``node_attrs``/``edge_attrs`` hold one attribute per row. Lookups by id hit
primary keys, attribute search hits the (key, value) index, and traversals
hit the source/target indexes. Attribute values are stored as their
canonical text rendering next to a variant tag, so matching is exact on
both content and variant.
"""

from __future__ import annotations

import sqlite3
import threading
from contextlib import contextmanager
from typing import Iterator, Optional

from ..errors import StoreError
from ..model import (
    AttributeValue,
    Identifier,
    EdgeKind,
    NodeKind,
    ProvEdge,
    ProvNode,
    merge_edge,
    merge_node,
    parse_value,
    render_value,
)
from .base import Store

_SCHEMA = """
CREATE TABLE IF NOT EXISTS nodes (
    id   TEXT PRIMARY KEY,
    kind TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS node_attrs (
    node_id TEXT NOT NULL,
    key     TEXT NOT NULL,
    vtype   TEXT NOT NULL,
    value   TEXT NOT NULL,
    PRIMARY KEY (node_id, key)
);
CREATE INDEX IF NOT EXISTS idx_node_attrs_kv ON node_attrs (key, value);
CREATE TABLE IF NOT EXISTS edges (
    id        TEXT PRIMARY KEY,
    kind      TEXT NOT NULL,
    source_id TEXT NOT NULL,
    target_id TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_edges_source ON edges (source_id);
CREATE INDEX IF NOT EXISTS idx_edges_target ON edges (target_id);
CREATE TABLE IF NOT EXISTS edge_attrs (
    edge_id TEXT NOT NULL,
    key     TEXT NOT NULL,
    vtype   TEXT NOT NULL,
    value   TEXT NOT NULL,
    PRIMARY KEY (edge_id, key)
);
"""


class NormalizedStore(Store):
    """SQLite-backed store using the normalized four-table schema."""

    backend = "normalized"

    def __init__(self, path: str = ":memory:") -> None:
        self.path = path
        try:
            self._conn = sqlite3.connect(path, check_same_thread=False, isolation_level=None)
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open store at {path}: {exc}") from exc
        self._lock = threading.RLock()
        with self._lock:
            if path != ":memory:":
                self._conn.execute("PRAGMA journal_mode=WAL")
                self._conn.execute("PRAGMA synchronous=NORMAL")
            self._conn.executescript(_SCHEMA)

    @contextmanager
    def _tx(self) -> Iterator[sqlite3.Connection]:
        with self._lock:
            self._conn.execute("BEGIN")
            try:
                yield self._conn
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise
            self._conn.execute("COMMIT")

    # -- writes --------------------------------------------------------------

    def put_node(self, node: ProvNode) -> None:
        with self._lock:
            merged = node
            existing = self.get_node(node.id)
            if existing is not None:
                merged = merge_node(existing, node)
            with self._tx() as conn:
                conn.execute(
                    "INSERT INTO nodes (id, kind) VALUES (?, ?) "
                    "ON CONFLICT(id) DO NOTHING",
                    (merged.id, merged.kind.value),
                )
                for key, value in merged.attributes.items():
                    vtype, text = render_value(value)
                    conn.execute(
                        "INSERT INTO node_attrs (node_id, key, vtype, value) VALUES (?, ?, ?, ?) "
                        "ON CONFLICT(node_id, key) DO UPDATE SET vtype=excluded.vtype, value=excluded.value",
                        (merged.id, key, vtype, text),
                    )

    def put_edge(self, edge: ProvEdge) -> None:
        with self._lock:
            merged = edge
            existing = self.get_edge(edge.id)
            if existing is not None:
                merged = merge_edge(existing, edge)
            with self._tx() as conn:
                conn.execute(
                    "INSERT INTO edges (id, kind, source_id, target_id) VALUES (?, ?, ?, ?) "
                    "ON CONFLICT(id) DO NOTHING",
                    (merged.id, merged.kind.value, merged.source, merged.target),
                )
                for key, value in merged.attributes.items():
                    vtype, text = render_value(value)
                    conn.execute(
                        "INSERT INTO edge_attrs (edge_id, key, vtype, value) VALUES (?, ?, ?, ?) "
                        "ON CONFLICT(edge_id, key) DO UPDATE SET vtype=excluded.vtype, value=excluded.value",
                        (merged.id, key, vtype, text),
                    )

    # -- reads ---------------------------------------------------------------

    def _node_attrs(self, node_id: Identifier) -> dict[str, AttributeValue]:
        rows = self._conn.execute(
            "SELECT key, vtype, value FROM node_attrs WHERE node_id = ?", (node_id,)
        ).fetchall()
        return {key: parse_value(vtype, text) for key, vtype, text in rows}

    def _edge_attrs(self, edge_id: Identifier) -> dict[str, AttributeValue]:
        rows = self._conn.execute(
            "SELECT key, vtype, value FROM edge_attrs WHERE edge_id = ?", (edge_id,)
        ).fetchall()
        return {key: parse_value(vtype, text) for key, vtype, text in rows}

    def get_node(self, node_id: Identifier) -> Optional[ProvNode]:
        with self._lock:
            row = self._conn.execute("SELECT kind FROM nodes WHERE id = ?", (node_id,)).fetchone()
            if row is None:
                return None
            return ProvNode(id=node_id, kind=NodeKind(row[0]), attributes=self._node_attrs(node_id))

    def get_edge(self, edge_id: Identifier) -> Optional[ProvEdge]:
        with self._lock:
            row = self._conn.execute(
                "SELECT kind, source_id, target_id FROM edges WHERE id = ?", (edge_id,)
            ).fetchone()
            if row is None:
                return None
            return ProvEdge(
                id=edge_id,
                kind=EdgeKind(row[0]),
                source=row[1],
                target=row[2],
                attributes=self._edge_attrs(edge_id),
            )

    def find_nodes(self, key: str, value: AttributeValue) -> list[ProvNode]:
        vtype, text = render_value(value)
        with self._lock:
            rows = self._conn.execute(
                "SELECT node_id FROM node_attrs WHERE key = ? AND value = ? AND vtype = ? "
                "ORDER BY node_id",
                (key, text, vtype),
            ).fetchall()
            found = [self.get_node(node_id) for (node_id,) in rows]
        return [node for node in found if node is not None]

    def _edges_where(self, column: str, node_id: Identifier) -> list[ProvEdge]:
        with self._lock:
            rows = self._conn.execute(
                f"SELECT id, kind, source_id, target_id FROM edges WHERE {column} = ? ORDER BY id",
                (node_id,),
            ).fetchall()
            return [
                ProvEdge(
                    id=eid,
                    kind=EdgeKind(kind),
                    source=source,
                    target=target,
                    attributes=self._edge_attrs(eid),
                )
                for eid, kind, source, target in rows
            ]

    def edges_from(self, node_id: Identifier) -> list[ProvEdge]:
        return self._edges_where("source_id", node_id)

    def edges_to(self, node_id: Identifier) -> list[ProvEdge]:
        return self._edges_where("target_id", node_id)

    def all_nodes(self) -> Iterator[ProvNode]:
        with self._lock:
            ids = [row[0] for row in self._conn.execute("SELECT id FROM nodes ORDER BY id")]
        for node_id in ids:
            node = self.get_node(node_id)
            if node is not None:
                yield node

    def all_edges(self) -> Iterator[ProvEdge]:
        with self._lock:
            ids = [row[0] for row in self._conn.execute("SELECT id FROM edges ORDER BY id")]
        for edge_id in ids:
            edge = self.get_edge(edge_id)
            if edge is not None:
                yield edge

    # -- maintenance -----------------------------------------------------------

    def fsck(self) -> list[dict]:
        violations: list[dict] = []
        with self._lock:
            for (node_id,) in self._conn.execute(
                "SELECT DISTINCT node_id FROM node_attrs "
                "WHERE node_id NOT IN (SELECT id FROM nodes) ORDER BY node_id"
            ):
                violations.append(
                    {"check": "orphan-node-attr", "id": node_id, "detail": "attribute rows without a node row"}
                )
            for (edge_id,) in self._conn.execute(
                "SELECT DISTINCT edge_id FROM edge_attrs "
                "WHERE edge_id NOT IN (SELECT id FROM edges) ORDER BY edge_id"
            ):
                violations.append(
                    {"check": "orphan-edge-attr", "id": edge_id, "detail": "attribute rows without an edge row"}
                )
        return violations

    def close(self) -> None:
        with self._lock:
            self._conn.close()
