"""In-memory provenance graph model.

Vertices are entities, activities and agents; edges are the seven core
relations between them. Nodes and edges carry typed attributes (text,
int, float, bool). A graph may be *open*: edges are allowed to name
endpoints that have not (yet) been inserted, because elements arrive
from log streams in no guaranteed order.
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

from .errors import ConflictError, ConstraintError, ValidationError

Identifier = str

AttributeValue = Union[str, int, float, bool]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# Keys reserved by the wire format for relation endpoints.
RESERVED_ATTR_KEYS = frozenset({"prov:source", "prov:target"})


class NodeKind(str, Enum):
    ENTITY = "Entity"
    ACTIVITY = "Activity"
    AGENT = "Agent"


class EdgeKind(str, Enum):
    USED = "Used"
    WAS_GENERATED_BY = "WasGeneratedBy"
    WAS_DERIVED_FROM = "WasDerivedFrom"
    WAS_ATTRIBUTED_TO = "WasAttributedTo"
    WAS_ASSOCIATED_WITH = "WasAssociatedWith"
    WAS_INFORMED_BY = "WasInformedBy"
    ACTED_ON_BEHALF_OF = "ActedOnBehalfOf"


# Each relation admits exactly one (source kind, target kind) pair.
EDGE_ENDPOINT_KINDS: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.USED: (NodeKind.ACTIVITY, NodeKind.ENTITY),
    EdgeKind.WAS_GENERATED_BY: (NodeKind.ENTITY, NodeKind.ACTIVITY),
    EdgeKind.WAS_DERIVED_FROM: (NodeKind.ENTITY, NodeKind.ENTITY),
    EdgeKind.WAS_ATTRIBUTED_TO: (NodeKind.ENTITY, NodeKind.AGENT),
    EdgeKind.WAS_ASSOCIATED_WITH: (NodeKind.ACTIVITY, NodeKind.AGENT),
    EdgeKind.WAS_INFORMED_BY: (NodeKind.ACTIVITY, NodeKind.ACTIVITY),
    EdgeKind.ACTED_ON_BEHALF_OF: (NodeKind.AGENT, NodeKind.AGENT),
}

# Relations that may legitimately connect an element to itself.
SELF_LOOP_KINDS = frozenset({EdgeKind.WAS_DERIVED_FROM, EdgeKind.WAS_INFORMED_BY})


def new_id() -> Identifier:
    """Return a fresh UUID-text identifier."""
    return str(uuid.uuid4())


def check_identifier(value: object, what: str = "identifier") -> Identifier:
    """Validate an identifier: non-empty text, no newline, no edge whitespace."""
    if not isinstance(value, str):
        raise ValidationError(f"{what} must be a string, got {type(value).__name__}")
    if not value:
        raise ValidationError(f"{what} must be non-empty")
    if "\n" in value:
        raise ValidationError(f"{what} must not contain a newline: {value!r}")
    if value != value.strip():
        raise ValidationError(f"{what} must not have leading/trailing whitespace: {value!r}")
    return value


def check_attr_key(key: object, *, edge: bool = False) -> str:
    """Validate an attribute key (non-empty, no newline; endpoint keys are reserved on edges)."""
    if not isinstance(key, str):
        raise ValidationError(f"attribute key must be a string, got {type(key).__name__}")
    if not key:
        raise ValidationError("attribute key must be non-empty")
    if "\n" in key:
        raise ValidationError(f"attribute key must not contain a newline: {key!r}")
    if edge and key in RESERVED_ATTR_KEYS:
        raise ValidationError(f"attribute key {key!r} is reserved for relation endpoints")
    return key


def check_attr_value(value: object) -> AttributeValue:
    """Validate an attribute value against the four supported variants."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValidationError(f"int attribute out of signed 64-bit range: {value}")
        return value
    if isinstance(value, (float, str)):
        return value
    raise ValidationError(
        f"attribute value must be str, int, float or bool, got {type(value).__name__}"
    )


def value_variant(value: AttributeValue) -> str:
    """Return the variant tag of a value: "text" | "int" | "float" | "bool".

    bool is checked before int because Python's bool subclasses int.
    """
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    return "text"


def render_value(value: AttributeValue) -> tuple[str, str]:
    """Render a value as a canonical ``(variant, text)`` pair.

    The text form round-trips exactly through :func:`parse_value`, including
    the float specials (``repr`` round-trips all finite doubles; nan/inf have
    stable spellings).
    """
    variant = value_variant(value)
    if variant == "bool":
        return variant, "true" if value else "false"
    if variant == "float":
        return variant, repr(float(value))
    return variant, str(value)


def parse_value(variant: str, text: str) -> AttributeValue:
    """Inverse of :func:`render_value`."""
    if variant == "text":
        return text
    if variant == "int":
        return int(text)
    if variant == "float":
        return float(text)
    if variant == "bool":
        if text == "true":
            return True
        if text == "false":
            return False
        raise ValidationError(f"bad bool rendering: {text!r}")
    raise ValidationError(f"unknown value variant: {variant!r}")


def values_equal(a: AttributeValue, b: AttributeValue) -> bool:
    """Exact equality on both content and variant.

    Stricter than ``==``: distinguishes bool from int and -0.0 from 0.0,
    and treats NaN as equal to NaN, so that attribute matching is a pure
    function of the stored bits.
    """
    if value_variant(a) != value_variant(b):
        return False
    if isinstance(a, float) and isinstance(b, float):
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        return a == b and math.copysign(1.0, a) == math.copysign(1.0, b)
    return a == b


def _checked_attrs(attributes: dict[str, AttributeValue] | None, *, edge: bool) -> dict[str, AttributeValue]:
    attrs: dict[str, AttributeValue] = {}
    for key, value in (attributes or {}).items():
        attrs[check_attr_key(key, edge=edge)] = check_attr_value(value)
    return attrs


@dataclass
class ProvNode:
    """A provenance vertex: entity, activity or agent, with typed attributes."""

    id: Identifier
    kind: NodeKind
    attributes: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_identifier(self.id, "node id")
        if not isinstance(self.kind, NodeKind):
            raise ValidationError(f"bad node kind: {self.kind!r}")
        self.attributes = _checked_attrs(self.attributes, edge=False)


@dataclass
class ProvEdge:
    """A provenance relation between two element ids, with typed attributes.

    Endpoints are ids rather than node references: an edge may arrive from
    a log stream before the nodes it names. Self-loops are only legal for
    the two same-kind derivation relations.
    """

    id: Identifier
    kind: EdgeKind
    source: Identifier
    target: Identifier
    attributes: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_identifier(self.id, "edge id")
        if not isinstance(self.kind, EdgeKind):
            raise ValidationError(f"bad edge kind: {self.kind!r}")
        check_identifier(self.source, "edge source")
        check_identifier(self.target, "edge target")
        if self.source == self.target and self.kind not in SELF_LOOP_KINDS:
            raise ValidationError(
                f"self-loop not allowed for {self.kind.value}: {self.source!r}"
            )
        self.attributes = _checked_attrs(self.attributes, edge=True)


ProvElement = Union[ProvNode, ProvEdge]


def make_node(kind: NodeKind, id: Identifier | None = None) -> ProvNode:
    """Create a node of the given kind; generates a fresh UUID id when absent."""
    return ProvNode(id=id if id is not None else new_id(), kind=kind)


def set_attribute(element: ProvElement, key: str, value: AttributeValue) -> ProvElement:
    """Set an attribute on a node or edge; re-setting a key overwrites it."""
    check_attr_key(key, edge=isinstance(element, ProvEdge))
    element.attributes[key] = check_attr_value(value)
    return element


def make_edge(
    kind: EdgeKind,
    source: ProvNode,
    target: ProvNode,
    id: Identifier | None = None,
) -> ProvEdge:
    """Create an edge between two nodes, enforcing the endpoint-kind table."""
    expected = EDGE_ENDPOINT_KINDS[kind]
    actual = (source.kind, target.kind)
    if actual != expected:
        raise ConstraintError(
            f"{kind.value} requires {expected[0].value}->{expected[1].value}, "
            f"got {actual[0].value}->{actual[1].value}"
        )
    return ProvEdge(
        id=id if id is not None else new_id(),
        kind=kind,
        source=source.id,
        target=target.id,
    )


def merge_node(existing: ProvNode, incoming: ProvNode) -> ProvNode:
    """Merge a re-inserted node into the stored one (per-key last-write-wins)."""
    if existing.kind is not incoming.kind:
        raise ConflictError(
            f"node {existing.id!r} already stored as {existing.kind.value}, "
            f"cannot re-insert as {incoming.kind.value}"
        )
    merged = dict(existing.attributes)
    merged.update(incoming.attributes)
    return ProvNode(id=existing.id, kind=existing.kind, attributes=merged)


def merge_edge(existing: ProvEdge, incoming: ProvEdge) -> ProvEdge:
    """Merge a re-inserted edge; kind and endpoints must match the stored edge."""
    if existing.kind is not incoming.kind:
        raise ConflictError(
            f"edge {existing.id!r} already stored as {existing.kind.value}, "
            f"cannot re-insert as {incoming.kind.value}"
        )
    if (existing.source, existing.target) != (incoming.source, incoming.target):
        raise ConflictError(
            f"edge {existing.id!r} already stored with endpoints "
            f"{existing.source!r}->{existing.target!r}, cannot re-insert with "
            f"{incoming.source!r}->{incoming.target!r}"
        )
    merged = dict(existing.attributes)
    merged.update(incoming.attributes)
    return ProvEdge(
        id=existing.id,
        kind=existing.kind,
        source=existing.source,
        target=existing.target,
        attributes=merged,
    )


@dataclass
class GraphViolation:
    """One structural problem found by :meth:`ProvenanceGraph.validate`."""

    edge_id: Identifier
    problem: str  # "kind-violation" | "dangling-reference"
    detail: str


@dataclass
class ProvenanceGraph:
    """A searchable vertex/edge collection. Insert order never matters."""

    nodes: dict[Identifier, ProvNode] = field(default_factory=dict)
    edges: dict[Identifier, ProvEdge] = field(default_factory=dict)

    def insert(self, element: ProvElement) -> "ProvenanceGraph":
        """Insert a node or edge; a duplicate id merges attributes (last-write-wins)."""
        if isinstance(element, ProvNode):
            existing = self.nodes.get(element.id)
            self.nodes[element.id] = merge_node(existing, element) if existing else element
        elif isinstance(element, ProvEdge):
            existing_edge = self.edges.get(element.id)
            self.edges[element.id] = (
                merge_edge(existing_edge, element) if existing_edge else element
            )
        else:
            raise ValidationError(f"cannot insert {type(element).__name__}")
        return self

    def insert_all(self, elements: Iterable[ProvElement]) -> "ProvenanceGraph":
        for element in elements:
            self.insert(element)
        return self

    def elements(self) -> list[ProvElement]:
        """All elements, nodes before edges, each group sorted by id."""
        out: list[ProvElement] = [self.nodes[i] for i in sorted(self.nodes)]
        out.extend(self.edges[i] for i in sorted(self.edges))
        return out

    def validate(self) -> list[GraphViolation]:
        """Report edges whose present endpoints break the kind table, plus dangling refs.

        Violations are data, not errors: an open graph (edges to not-yet-seen
        nodes) is a legitimate intermediate state during ingest.
        """
        violations: list[GraphViolation] = []
        for edge_id in sorted(self.edges):
            edge = self.edges[edge_id]
            source = self.nodes.get(edge.source)
            target = self.nodes.get(edge.target)
            if source is None:
                violations.append(
                    GraphViolation(edge_id, "dangling-reference", f"source {edge.source!r} absent")
                )
            if target is None:
                violations.append(
                    GraphViolation(edge_id, "dangling-reference", f"target {edge.target!r} absent")
                )
            if source is not None and target is not None:
                expected = EDGE_ENDPOINT_KINDS[edge.kind]
                actual = (source.kind, target.kind)
                if actual != expected:
                    violations.append(
                        GraphViolation(
                            edge_id,
                            "kind-violation",
                            f"{edge.kind.value} requires "
                            f"{expected[0].value}->{expected[1].value}, found "
                            f"{actual[0].value}->{actual[1].value}",
                        )
                    )
        return violations


def graph_insert(graph: ProvenanceGraph, element: ProvElement) -> ProvenanceGraph:
    """Functional alias for :meth:`ProvenanceGraph.insert`."""
    return graph.insert(element)


def validate_graph(graph: ProvenanceGraph) -> list[GraphViolation]:
    """Functional alias for :meth:`ProvenanceGraph.validate`."""
    return graph.validate()
