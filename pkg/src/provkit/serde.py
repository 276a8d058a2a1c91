"""PROV-JSON documents, the log-line envelope, and DOT export.

The wire contract, bit-exact:

* A document is a flat JSON object whose top-level keys are the element
  kinds (``entity``, ``activity``, ``agent``, ``used``, ``wasGeneratedBy``,
  ``wasDerivedFrom``, ``wasAttributedTo``, ``wasAssociatedWith``,
  ``wasInformedBy``, ``actedOnBehalfOf``), each mapping element id to an
  attribute object. Relation entries carry the reserved keys
  ``prov:source`` and ``prov:target``.
* Attribute values: text encodes as a bare JSON string; the other variants
  encode as ``{"$": value, "type": "int"|"float"|"bool"}``. Non-finite
  floats use the string spellings ``NaN`` / ``Infinity`` / ``-Infinity``
  so the payload is always valid JSON.
* An envelope line is ``"CURATOR_PROV "`` followed by one compact document;
  the prefix of the log line (timestamp, level, logger name) is arbitrary.

Unknown top-level keys are ignored on read for forward compatibility.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Optional

from .errors import CorruptLineError, SchemaError
from .model import (
    AttributeValue,
    EdgeKind,
    NodeKind,
    ProvEdge,
    ProvElement,
    ProvNode,
    ProvenanceGraph,
    ValidationError,
)

ENVELOPE_MARKER = "CURATOR_PROV "

ProvJsonDocument = dict[str, Any]

NODE_SECTIONS: dict[str, NodeKind] = {
    "entity": NodeKind.ENTITY,
    "activity": NodeKind.ACTIVITY,
    "agent": NodeKind.AGENT,
}

EDGE_SECTIONS: dict[str, EdgeKind] = {
    "used": EdgeKind.USED,
    "wasGeneratedBy": EdgeKind.WAS_GENERATED_BY,
    "wasDerivedFrom": EdgeKind.WAS_DERIVED_FROM,
    "wasAttributedTo": EdgeKind.WAS_ATTRIBUTED_TO,
    "wasAssociatedWith": EdgeKind.WAS_ASSOCIATED_WITH,
    "wasInformedBy": EdgeKind.WAS_INFORMED_BY,
    "actedOnBehalfOf": EdgeKind.ACTED_ON_BEHALF_OF,
}

# Canonical top-level key order: nodes first, then relations.
SECTION_ORDER = list(NODE_SECTIONS) + list(EDGE_SECTIONS)

_SECTION_FOR_NODE = {kind: name for name, kind in NODE_SECTIONS.items()}
_SECTION_FOR_EDGE = {kind: name for name, kind in EDGE_SECTIONS.items()}

# DOT shape per node kind (the usual PROV layout convention).
DOT_SHAPES = {NodeKind.ENTITY: "ellipse", NodeKind.ACTIVITY: "box", NodeKind.AGENT: "house"}


def encode_value(value: AttributeValue) -> Any:
    """Encode one attribute value for a PROV-JSON attribute object."""
    if isinstance(value, bool):
        return {"$": value, "type": "bool"}
    if isinstance(value, int):
        return {"$": value, "type": "int"}
    if isinstance(value, float):
        if math.isnan(value):
            return {"$": "NaN", "type": "float"}
        if math.isinf(value):
            return {"$": "Infinity" if value > 0 else "-Infinity", "type": "float"}
        return {"$": value, "type": "float"}
    return value


def decode_value(raw: Any, where: str) -> AttributeValue:
    """Decode one attribute value; accepts bare JSON scalars liberally."""
    if isinstance(raw, str):
        return raw
    if isinstance(raw, bool) or isinstance(raw, (int, float)):
        return raw
    if isinstance(raw, dict) and "$" in raw and "type" in raw:
        vtype, inner = raw["type"], raw["$"]
        if vtype == "int" and isinstance(inner, int) and not isinstance(inner, bool):
            return inner
        if vtype == "bool" and isinstance(inner, bool):
            return inner
        if vtype == "float":
            if isinstance(inner, (int, float)) and not isinstance(inner, bool):
                return float(inner)
            if inner in ("NaN", "Infinity", "-Infinity"):
                return float(inner.replace("Infinity", "inf").replace("NaN", "nan"))
        raise SchemaError(f"bad typed value {raw!r} in {where}")
    raise SchemaError(f"unsupported attribute value {raw!r} in {where}")


def _encoded_attrs(element: ProvElement) -> dict[str, Any]:
    return {key: encode_value(element.attributes[key]) for key in sorted(element.attributes)}


def serialize(elements: Iterable[ProvElement]) -> ProvJsonDocument:
    """Build a PROV-JSON document from elements; sections and ids are canonically ordered."""
    sections: dict[str, dict[str, Any]] = {name: {} for name in SECTION_ORDER}
    for element in elements:
        if isinstance(element, ProvNode):
            sections[_SECTION_FOR_NODE[element.kind]][element.id] = _encoded_attrs(element)
        else:
            entry: dict[str, Any] = {"prov:source": element.source, "prov:target": element.target}
            entry.update(_encoded_attrs(element))
            sections[_SECTION_FOR_EDGE[element.kind]][element.id] = entry
    doc: ProvJsonDocument = {}
    for name in SECTION_ORDER:
        if sections[name]:
            doc[name] = {eid: sections[name][eid] for eid in sorted(sections[name])}
    return doc


def _decode_attrs(entry: dict[str, Any], where: str, *, skip: frozenset[str] = frozenset()) -> dict[str, AttributeValue]:
    attrs: dict[str, AttributeValue] = {}
    for key, raw in entry.items():
        if key in skip:
            continue
        attrs[key] = decode_value(raw, where)
    return attrs


_ENDPOINT_KEYS = frozenset({"prov:source", "prov:target"})


def deserialize(doc: ProvJsonDocument) -> list[ProvElement]:
    """Rebuild elements from a PROV-JSON document.

    Returns nodes before edges, each group in lexicographic id order, so
    downstream consumers see a deterministic sequence.
    """
    if not isinstance(doc, dict):
        raise SchemaError(f"document must be a JSON object, got {type(doc).__name__}")
    nodes: list[tuple[str, int, ProvNode]] = []
    edges: list[tuple[str, int, ProvEdge]] = []
    for rank, section in enumerate(SECTION_ORDER):
        body = doc.get(section)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise SchemaError(f"section {section!r} must map ids to attribute objects")
        for element_id, entry in body.items():
            if not isinstance(entry, dict):
                raise SchemaError(f"entry {element_id!r} in {section!r} must be an object")
            where = f"{section}/{element_id}"
            try:
                if section in NODE_SECTIONS:
                    nodes.append(
                        (
                            element_id,
                            rank,
                            ProvNode(
                                id=element_id,
                                kind=NODE_SECTIONS[section],
                                attributes=_decode_attrs(entry, where),
                            ),
                        )
                    )
                else:
                    source = entry.get("prov:source")
                    target = entry.get("prov:target")
                    if source is None or target is None:
                        raise SchemaError(
                            f"relation entry {element_id!r} is missing prov:source/prov:target"
                        )
                    edges.append(
                        (
                            element_id,
                            rank,
                            ProvEdge(
                                id=element_id,
                                kind=EDGE_SECTIONS[section],
                                source=source,
                                target=target,
                                attributes=_decode_attrs(entry, where, skip=_ENDPOINT_KEYS),
                            ),
                        )
                    )
            except ValidationError as exc:
                raise SchemaError(f"bad entry {element_id!r} in {section!r}: {exc}") from exc
    nodes.sort(key=lambda item: (item[0], item[1]))
    edges.sort(key=lambda item: (item[0], item[1]))
    return [item[2] for item in nodes] + [item[2] for item in edges]


def encode_line(doc: ProvJsonDocument) -> str:
    """Render a document as one marker-prefixed, newline-free envelope line."""
    payload = json.dumps(doc, separators=(",", ":"), ensure_ascii=True, allow_nan=False)
    return ENVELOPE_MARKER + payload


def decode_line(line: str) -> Optional[ProvJsonDocument]:
    """Extract the document from a log line, or None for ordinary log output.

    The payload runs from the first marker occurrence to the end of the line.
    A marker-bearing line whose payload does not parse as a JSON object is a
    corrupt record, reported with the raw line attached.
    """
    idx = line.find(ENVELOPE_MARKER)
    if idx < 0:
        return None
    payload = line[idx + len(ENVELOPE_MARKER):]
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise CorruptLineError(f"unparseable envelope payload: {exc}", line) from exc
    if not isinstance(doc, dict):
        raise CorruptLineError("envelope payload is not a JSON object", line)
    return doc


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: ProvenanceGraph) -> str:
    """Render a graph as a DOT digraph; output is deterministic (sorted ids)."""
    lines = ["digraph prov {"]
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        lines.append(
            f"  {_dot_quote(node_id)} [shape={DOT_SHAPES[node.kind]}, label={_dot_quote(node_id)}];"
        )
    for edge_id in sorted(graph.edges):
        edge = graph.edges[edge_id]
        lines.append(
            f"  {_dot_quote(edge.source)} -> {_dot_quote(edge.target)} "
            f"[label={_dot_quote(edge.kind.value)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
