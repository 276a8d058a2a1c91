"""HTTP query service driving the browser explorer.

The service is a thin, read-only veneer over the store's Query interface:
every response is computed by one store call and serialized canonically
(sorted ids), so API results are bit-identical to direct store queries.
Graph-carrying endpoints all answer with the same payload shape:

    {"nodes": [{"id", "kind", "attrs", "depth"?, "placeholder"?}, ...],
     "edges": [{"id", "kind", "source", "target", "attrs"}, ...]}

Edge endpoints that are not stored nodes appear in ``nodes`` flagged
``placeholder: true`` with a null kind, so clients can always resolve both
ends of every edge. Errors are ``{"error": "..."}`` with a 4xx/5xx status.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional
from urllib.parse import parse_qs, urlparse

from .errors import ProvError, SourceError, ValidationError
from .model import AttributeValue, ProvenanceGraph
from .serde import encode_value, serialize, to_dot
from .store import Lineage, Store

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>provenance service</title></head>
<body><h1>provenance query service</h1>
<p>The API is up under <code>/api</code>. No explorer UI assets are
configured; start the service with <code>--ui-dir</code> to serve them.</p>
</body></html>
"""


def parse_query_value(vtype: str, text: str) -> AttributeValue:
    """Parse an attribute value from its query-string rendering."""
    if vtype == "text":
        return text
    if vtype == "int":
        return int(text)
    if vtype == "float":
        return float(text)
    if vtype == "bool":
        if text in ("true", "1"):
            return True
        if text in ("false", "0"):
            return False
        raise ValidationError(f"bad bool value {text!r}")
    raise ValidationError(f"unknown vtype {vtype!r}")


def graph_payload(
    graph: ProvenanceGraph,
    depths: Optional[dict[str, int]] = None,
) -> dict[str, Any]:
    """Serialize a graph (optionally with traversal depths) as a GraphPayload."""
    nodes = []
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        entry: dict[str, Any] = {
            "id": node.id,
            "kind": node.kind.value,
            "attrs": {key: encode_value(node.attributes[key]) for key in sorted(node.attributes)},
        }
        if depths is not None and node_id in depths:
            entry["depth"] = depths[node_id]
        nodes.append(entry)
    placeholder_ids: set[str] = set()
    for edge in graph.edges.values():
        placeholder_ids.update((edge.source, edge.target))
    if depths is not None:
        placeholder_ids.update(depths)
    placeholder_ids -= set(graph.nodes)
    for node_id in sorted(placeholder_ids):
        entry = {"id": node_id, "kind": None, "attrs": {}, "placeholder": True}
        if depths is not None and node_id in depths:
            entry["depth"] = depths[node_id]
        nodes.append(entry)
    edges = [
        {
            "id": edge.id,
            "kind": edge.kind.value,
            "source": edge.source,
            "target": edge.target,
            "attrs": {key: encode_value(edge.attributes[key]) for key in sorted(edge.attributes)},
        }
        for edge_id in sorted(graph.edges)
        for edge in [graph.edges[edge_id]]
    ]
    return {"nodes": nodes, "edges": edges}


def lineage_payload(lineage: Lineage) -> dict[str, Any]:
    return graph_payload(lineage.graph, depths=lineage.depths)


class _ApiError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


class QueryService:
    """Serves the /api endpoints plus the explorer's static assets at /."""

    def __init__(
        self,
        store: Store,
        host: str = "127.0.0.1",
        port: int = 0,
        ui_dir: Optional[str] = None,
        max_depth: int = 100,
    ) -> None:
        self.store = store
        self.max_depth = max_depth
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args: object) -> None:
                pass

            def _send(self, status: int, data: bytes, content_type: str) -> None:
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(data)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(data)

            def _send_json(self, status: int, body: Any) -> None:
                self._send(status, json.dumps(body).encode("utf-8"), "application/json")

            def _read_json_body(self) -> Any:
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length)
                try:
                    return json.loads(raw or b"{}")
                except json.JSONDecodeError as exc:
                    raise _ApiError(400, f"bad JSON body: {exc}")

            def do_OPTIONS(self) -> None:
                self.send_response(204)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.end_headers()

            def do_GET(self) -> None:
                try:
                    url = urlparse(self.path)
                    if url.path == "/api" or url.path.startswith("/api/"):
                        self._send_json(200, service.handle_get(url.path, parse_qs(url.query)))
                    else:
                        self._serve_static(url.path)
                except _ApiError as exc:
                    self._send_json(exc.status, {"error": exc.message})
                except (ProvError, ValueError) as exc:
                    self._send_json(400, {"error": str(exc)})
                except Exception as exc:  # pragma: no cover - defensive
                    self._send_json(500, {"error": f"internal error: {exc}"})

            def do_POST(self) -> None:
                try:
                    url = urlparse(self.path)
                    body = self._read_json_body()
                    self._send_json(200, service.handle_post(url.path, body))
                except _ApiError as exc:
                    self._send_json(exc.status, {"error": exc.message})
                except (ProvError, ValueError) as exc:
                    self._send_json(400, {"error": str(exc)})
                except Exception as exc:  # pragma: no cover - defensive
                    self._send_json(500, {"error": f"internal error: {exc}"})

            def _serve_static(self, path: str) -> None:
                if path in ("", "/"):
                    path = "/index.html"
                if service.ui_dir is None:
                    if path == "/index.html":
                        self._send(200, _FALLBACK_PAGE.encode("utf-8"), "text/html")
                    else:
                        self._send_json(404, {"error": f"no asset {path}"})
                    return
                candidate = (service.ui_dir / path.lstrip("/")).resolve()
                if not candidate.is_relative_to(service.ui_dir) or not candidate.is_file():
                    self._send_json(404, {"error": f"no asset {path}"})
                    return
                content_type = mimetypes.guess_type(str(candidate))[0] or "application/octet-stream"
                self._send(200, candidate.read_bytes(), content_type)

        try:
            self._server = ThreadingHTTPServer((host, port), Handler)
        except OSError as exc:
            raise SourceError(f"cannot bind {host}:{port}: {exc}") from exc
        self.port = self._server.server_address[1]
        self._thread: Optional[threading.Thread] = None

    # -- request handling (exercised directly by the handler) -------------------

    def _effective_depth(self, raw: Optional[str]) -> int:
        if raw is None:
            return self.max_depth
        depth = int(raw)
        if depth < 0:
            raise _ApiError(400, "depth must be non-negative")
        return min(depth, self.max_depth)

    def _export_graph(self, ids: Optional[list[str]]) -> ProvenanceGraph:
        if ids:
            return self.store.connected_subgraph(ids)
        graph = ProvenanceGraph()
        for node in self.store.all_nodes():
            graph.insert(node)
        for edge in self.store.all_edges():
            graph.insert(edge)
        return graph

    def handle_get(self, path: str, query: dict[str, list[str]]) -> Any:
        parts = [p for p in path.split("/") if p]  # e.g. ["api", "nodes", "e1", "ancestors"]
        if parts == ["api", "stats"]:
            return self.store.stats()
        if parts == ["api", "export"]:
            fmt = (query.get("format") or ["provjson"])[0]
            raw_ids = (query.get("ids") or [""])[0]
            ids = [i for i in raw_ids.split(",") if i] or None
            graph = self._export_graph(ids)
            if fmt == "provjson":
                return serialize(graph.elements())
            if fmt == "dot":
                return {"dot": to_dot(graph)}
            raise _ApiError(400, f"unknown export format {fmt!r}")
        if parts[:2] == ["api", "nodes"] and len(parts) == 2:
            key = (query.get("key") or [None])[0]
            value = (query.get("value") or [None])[0]
            vtype = (query.get("vtype") or ["text"])[0]
            if key is None or value is None:
                raise _ApiError(400, "node search needs key= and value=")
            nodes = self.store.find_nodes(key, parse_query_value(vtype, value))
            graph = ProvenanceGraph()
            for node in nodes:
                graph.insert(node)
            return graph_payload(graph)
        if parts[:2] == ["api", "nodes"] and len(parts) == 3:
            node = self.store.get_node(parts[2])
            if node is None:
                raise _ApiError(404, f"no node {parts[2]!r}")
            graph = ProvenanceGraph()
            graph.insert(node)
            return graph_payload(graph)
        if parts[:2] == ["api", "nodes"] and len(parts) == 4 and parts[3] in ("ancestors", "descendants"):
            depth = self._effective_depth((query.get("depth") or [None])[0])
            method = self.store.ancestors if parts[3] == "ancestors" else self.store.descendants
            return lineage_payload(method(parts[2], max_depth=depth))
        if parts[:2] == ["api", "edges"] and len(parts) == 3:
            edge = self.store.get_edge(parts[2])
            if edge is None:
                raise _ApiError(404, f"no edge {parts[2]!r}")
            graph = ProvenanceGraph()
            graph.insert(edge)
            node_source = self.store.get_node(edge.source)
            node_target = self.store.get_node(edge.target)
            for node in (node_source, node_target):
                if node is not None:
                    graph.insert(node)
            return graph_payload(graph)
        raise _ApiError(404, f"no endpoint {path}")

    def handle_post(self, path: str, body: Any) -> Any:
        parts = [p for p in path.split("/") if p]
        if not isinstance(body, dict):
            raise _ApiError(400, "body must be a JSON object")
        if parts == ["api", "lineage"]:
            ids = body.get("ids")
            direction = body.get("direction")
            if not isinstance(ids, list) or not ids:
                raise _ApiError(400, "lineage needs a non-empty ids list")
            if direction not in ("ancestors", "descendants"):
                raise _ApiError(400, "direction must be ancestors or descendants")
            raw_depth = body.get("depth")
            depth = self._effective_depth(None if raw_depth is None else str(raw_depth))
            method = (
                self.store.ancestors_of_set
                if direction == "ancestors"
                else self.store.descendants_of_set
            )
            return lineage_payload(method(ids, max_depth=depth))
        if parts == ["api", "subgraph"]:
            ids = body.get("ids")
            if not isinstance(ids, list) or not ids:
                raise _ApiError(400, "subgraph needs a non-empty ids list")
            return graph_payload(self.store.connected_subgraph(ids))
        raise _ApiError(404, f"no endpoint {path}")

    # -- lifecycle ---------------------------------------------------------------

    def start(self) -> "QueryService":
        self._thread = threading.Thread(target=lambda: self._server.serve_forever(poll_interval=0.05), daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        try:
            self._server.serve_forever(poll_interval=0.05)
        except KeyboardInterrupt:
            pass
        finally:
            self._server.server_close()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(5.0)


def serve(
    store: Store,
    port: int,
    host: str = "127.0.0.1",
    ui_dir: Optional[str] = None,
    max_depth: int = 100,
) -> QueryService:
    """Construct a service bound to the port (raises if the port is busy)."""
    return QueryService(store, host=host, port=port, ui_dir=ui_dir, max_depth=max_depth)
