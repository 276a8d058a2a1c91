"""Provenance toolkit: emit W3C-PROV through ordinary log streams, then
aggregate, store, query, validate and visually explore it."""

from .errors import (
    ConflictError,
    ConstraintError,
    CorruptLineError,
    DeliveryError,
    ProvError,
    SchemaError,
    SinkError,
    SourceError,
    StoreError,
    ValidationError,
)
from .model import (
    AttributeValue,
    EdgeKind,
    Identifier,
    NodeKind,
    ProvEdge,
    ProvNode,
    ProvenanceGraph,
    graph_insert,
    make_edge,
    make_node,
    new_id,
    set_attribute,
    validate_graph,
)
from .logger import FileSink, LogSink, MemorySink, ProvenanceLogger, StreamSink, TcpSink
from .serde import (
    ENVELOPE_MARKER,
    decode_line,
    deserialize,
    encode_line,
    serialize,
    to_dot,
)
from .store import Lineage, Store, open_store

__version__ = "0.1.0"

__all__ = [
    "AttributeValue",
    "ConflictError",
    "ConstraintError",
    "CorruptLineError",
    "DeliveryError",
    "EdgeKind",
    "ENVELOPE_MARKER",
    "FileSink",
    "Identifier",
    "Lineage",
    "LogSink",
    "MemorySink",
    "NodeKind",
    "ProvEdge",
    "ProvError",
    "ProvNode",
    "ProvenanceGraph",
    "ProvenanceLogger",
    "SchemaError",
    "SinkError",
    "SourceError",
    "Store",
    "StoreError",
    "StreamSink",
    "TcpSink",
    "ValidationError",
    "decode_line",
    "deserialize",
    "encode_line",
    "graph_insert",
    "make_edge",
    "make_node",
    "new_id",
    "open_store",
    "serialize",
    "set_attribute",
    "to_dot",
    "validate_graph",
]
