"""Denormalized key/value backend.

Everything lives in one ordered key/value table, the way wide-column
stores lay graphs out: adjacency and the attribute index are precomputed
rows rather than joins.

Row families (key components are percent-encoded and joined with ``|``):

* ``N|<node id>``                      -> kind + inline attribute map
* ``E|<edge id>``                      -> locator: the edge's source id
* ``F|<source id>|<edge id>``          -> kind, target id, attributes
* ``R|<target id>|<edge id>``          -> kind, source id
* ``A|<key>|<vtype>|<value>|<node id>`` -> (empty): attribute index

F and R rows exist in pairs; A rows exist iff the node carries that
attribute; ``fsck`` verifies both. All rows of one element are written in
a single transaction. The storage engine is a SQLite B-tree used purely
as an ordered map (primary-key point gets and range scans; no joins).
"""

from __future__ import annotations

import json
import sqlite3
import threading
from contextlib import contextmanager
from typing import Iterator, Optional
from urllib.parse import quote, unquote

from ..errors import StoreError
from ..model import (
    AttributeValue,
    EdgeKind,
    Identifier,
    NodeKind,
    ProvEdge,
    ProvNode,
    merge_edge,
    merge_node,
    parse_value,
    render_value,
)
from .base import Store

_SEP = "|"  # never produced by quote(component, safe="")


def _key(*components: str) -> str:
    return _SEP.join(quote(component, safe="") for component in components)


def _split_key(key: str) -> list[str]:
    return [unquote(part) for part in key.split(_SEP)]


def _prefix_bounds(*components: str) -> tuple[str, str]:
    """Half-open key range covering every row whose leading components match."""
    prefix = _key(*components) + _SEP
    return prefix, prefix[:-1] + chr(ord(_SEP) + 1)


def _pack_attrs(attrs: dict[str, AttributeValue]) -> dict[str, list[str]]:
    return {key: list(render_value(value)) for key, value in attrs.items()}


def _unpack_attrs(packed: dict[str, list[str]]) -> dict[str, AttributeValue]:
    return {key: parse_value(vtype, text) for key, (vtype, text) in packed.items()}


class DenormalizedStore(Store):
    """Ordered key/value store using the denormalized N/E/F/R/A row families."""

    backend = "denormalized"

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
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS kv (k TEXT PRIMARY KEY, v TEXT NOT NULL)"
            )

    # -- raw ordered-map operations (also used by tests to corrupt a store) ----

    def _raw_get(self, key: str) -> Optional[str]:
        row = self._conn.execute("SELECT v FROM kv WHERE k = ?", (key,)).fetchone()
        return None if row is None else row[0]

    def _raw_put(self, key: str, value: str) -> None:
        self._conn.execute(
            "INSERT INTO kv (k, v) VALUES (?, ?) ON CONFLICT(k) DO UPDATE SET v=excluded.v",
            (key, value),
        )

    def _raw_delete(self, key: str) -> None:
        self._conn.execute("DELETE FROM kv WHERE k = ?", (key,))

    def _scan(self, *components: str) -> list[tuple[str, str]]:
        low, high = _prefix_bounds(*components)
        return self._conn.execute(
            "SELECT k, v FROM kv WHERE k >= ? AND k < ? ORDER BY k", (low, high)
        ).fetchall()

    @contextmanager
    def _tx(self) -> Iterator[None]:
        with self._lock:
            self._conn.execute("BEGIN")
            try:
                yield
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise
            self._conn.execute("COMMIT")

    # -- writes -----------------------------------------------------------------

    def put_node(self, node: ProvNode) -> None:
        with self._lock:
            existing = self.get_node(node.id)
            merged = merge_node(existing, node) if existing is not None else node
            with self._tx():
                self._raw_put(
                    _key("N", merged.id),
                    json.dumps({"kind": merged.kind.value, "attrs": _pack_attrs(merged.attributes)}),
                )
                old_attrs = existing.attributes if existing is not None else {}
                for key, value in merged.attributes.items():
                    vtype, text = render_value(value)
                    if key in old_attrs:
                        old_vtype, old_text = render_value(old_attrs[key])
                        if (old_vtype, old_text) != (vtype, text):
                            self._raw_delete(_key("A", key, old_vtype, old_text, merged.id))
                    self._raw_put(_key("A", key, vtype, text, merged.id), "")

    def put_edge(self, edge: ProvEdge) -> None:
        with self._lock:
            existing = self.get_edge(edge.id)
            merged = merge_edge(existing, edge) if existing is not None else edge
            with self._tx():
                self._raw_put(_key("E", merged.id), json.dumps({"source": merged.source}))
                self._raw_put(
                    _key("F", merged.source, merged.id),
                    json.dumps(
                        {
                            "kind": merged.kind.value,
                            "target": merged.target,
                            "attrs": _pack_attrs(merged.attributes),
                        }
                    ),
                )
                self._raw_put(
                    _key("R", merged.target, merged.id),
                    json.dumps({"kind": merged.kind.value, "source": merged.source}),
                )

    # -- reads -------------------------------------------------------------------

    def get_node(self, node_id: Identifier) -> Optional[ProvNode]:
        with self._lock:
            raw = self._raw_get(_key("N", node_id))
        if raw is None:
            return None
        body = json.loads(raw)
        return ProvNode(
            id=node_id, kind=NodeKind(body["kind"]), attributes=_unpack_attrs(body["attrs"])
        )

    def _edge_from_f_row(self, source: Identifier, edge_id: Identifier, raw: str) -> ProvEdge:
        body = json.loads(raw)
        return ProvEdge(
            id=edge_id,
            kind=EdgeKind(body["kind"]),
            source=source,
            target=body["target"],
            attributes=_unpack_attrs(body["attrs"]),
        )

    def get_edge(self, edge_id: Identifier) -> Optional[ProvEdge]:
        with self._lock:
            locator = self._raw_get(_key("E", edge_id))
            if locator is None:
                return None
            source = json.loads(locator)["source"]
            raw = self._raw_get(_key("F", source, edge_id))
        if raw is None:
            return None
        return self._edge_from_f_row(source, edge_id, raw)

    def find_nodes(self, key: str, value: AttributeValue) -> list[ProvNode]:
        vtype, text = render_value(value)
        with self._lock:
            rows = self._scan("A", key, vtype, text)
            found = [self.get_node(_split_key(k)[4]) for k, _ in rows]
        nodes = [node for node in found if node is not None]
        nodes.sort(key=lambda n: n.id)
        return nodes

    def edges_from(self, node_id: Identifier) -> list[ProvEdge]:
        with self._lock:
            rows = self._scan("F", node_id)
        edges = [self._edge_from_f_row(node_id, _split_key(k)[2], v) for k, v in rows]
        edges.sort(key=lambda e: e.id)
        return edges

    def edges_to(self, node_id: Identifier) -> list[ProvEdge]:
        with self._lock:
            rows = self._scan("R", node_id)
            edges = []
            for k, v in rows:
                edge_id = _split_key(k)[2]
                source = json.loads(v)["source"]
                raw = self._raw_get(_key("F", source, edge_id))
                if raw is not None:
                    edges.append(self._edge_from_f_row(source, edge_id, raw))
        edges.sort(key=lambda e: e.id)
        return edges

    def all_nodes(self) -> Iterator[ProvNode]:
        with self._lock:
            rows = self._scan("N")
        for k, raw in rows:
            body = json.loads(raw)
            yield ProvNode(
                id=_split_key(k)[1],
                kind=NodeKind(body["kind"]),
                attributes=_unpack_attrs(body["attrs"]),
            )

    def all_edges(self) -> Iterator[ProvEdge]:
        with self._lock:
            rows = self._scan("F")
        for k, raw in rows:
            _, source, edge_id = _split_key(k)
            yield self._edge_from_f_row(source, edge_id, raw)

    # -- maintenance ----------------------------------------------------------------

    def fsck(self) -> list[dict]:
        """Verify the F/R pairing, E locators, and the A index against node rows."""
        violations: list[dict] = []
        with self._lock:
            f_rows = self._scan("F")
            r_keys = {k for k, _ in self._scan("R")}
            e_keys = {k for k, _ in self._scan("E")}
            seen_f: set[str] = set()
            for k, raw in f_rows:
                _, source, edge_id = _split_key(k)
                body = json.loads(raw)
                seen_f.add(edge_id)
                r_key = _key("R", body["target"], edge_id)
                if r_key not in r_keys:
                    violations.append(
                        {"check": "missing-R-row", "id": edge_id, "detail": f"no reverse row for edge {edge_id!r}"}
                    )
                if _key("E", edge_id) not in e_keys:
                    violations.append(
                        {"check": "missing-E-row", "id": edge_id, "detail": f"no locator row for edge {edge_id!r}"}
                    )
            for k, raw in self._scan("R"):
                _, target, edge_id = _split_key(k)
                source = json.loads(raw)["source"]
                if self._raw_get(_key("F", source, edge_id)) is None:
                    violations.append(
                        {"check": "missing-F-row", "id": edge_id, "detail": f"no forward row for edge {edge_id!r}"}
                    )
            for k, raw in self._scan("E"):
                edge_id = _split_key(k)[1]
                source = json.loads(raw)["source"]
                if self._raw_get(_key("F", source, edge_id)) is None:
                    violations.append(
                        {"check": "dangling-E-row", "id": edge_id, "detail": f"locator points at missing forward row"}
                    )
            # A index vs node rows, both directions.
            expected_a: set[str] = set()
            for node in self.all_nodes():
                for key, value in node.attributes.items():
                    vtype, text = render_value(value)
                    a_key = _key("A", key, vtype, text, node.id)
                    expected_a.add(a_key)
                    if self._raw_get(a_key) is None:
                        violations.append(
                            {"check": "missing-A-row", "id": node.id, "detail": f"attribute {key!r} not indexed"}
                        )
            for k, _ in self._scan("A"):
                if k not in expected_a:
                    _, key, vtype, text, node_id = _split_key(k)
                    violations.append(
                        {"check": "stale-A-row", "id": node_id, "detail": f"index row for {key!r} does not match any node attribute"}
                    )
        return violations

    def close(self) -> None:
        with self._lock:
            self._conn.close()
