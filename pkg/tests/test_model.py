import itertools
import random

import pytest
from hypothesis import given
import hypothesis.strategies as st

import strategies as strat
from provkit.errors import ConflictError, ConstraintError, ValidationError
from provkit.model import (
    EDGE_ENDPOINT_KINDS,
    EdgeKind,
    NodeKind,
    ProvEdge,
    ProvNode,
    ProvenanceGraph,
    SELF_LOOP_KINDS,
    graph_insert,
    make_edge,
    make_node,
    new_id,
    set_attribute,
    validate_graph,
)


class TestMakeNode:
    def test_explicit_id(self):
        node = make_node(NodeKind.ENTITY, "e1")
        assert node.id == "e1"
        assert node.kind is NodeKind.ENTITY
        assert node.attributes == {}

    def test_generated_ids_are_fresh(self):
        a = make_node(NodeKind.ACTIVITY)
        b = make_node(NodeKind.ACTIVITY)
        assert a.id != b.id

    def test_instrumentation_example_attribute(self):
        node = make_node(NodeKind.ENTITY)
        set_attribute(node, "filename", "IMG-0942.jpg")
        assert node.attributes == {"filename": "IMG-0942.jpg"}

    def test_id_uniqueness_at_scale(self):
        ids = {new_id() for _ in range(1_000_000)}
        assert len(ids) == 1_000_000


class TestIdentifierValidation:
    @pytest.mark.parametrize("bad", ["", "a\nb", " x", "x ", "\t", 7, None])
    def test_rejected(self, bad):
        with pytest.raises(ValidationError):
            ProvNode(id=bad, kind=NodeKind.ENTITY)

    @pytest.mark.parametrize("ok", ["x", "a b", "Ümläut", "e-1:2/3|4%5"])
    def test_accepted(self, ok):
        assert ProvNode(id=ok, kind=NodeKind.ENTITY).id == ok


class TestSetAttribute:
    def test_overwrite_is_last_write_wins(self):
        node = make_node(NodeKind.ENTITY, "e1")
        set_attribute(node, "k", 1)
        set_attribute(node, "k", 2)
        assert node.attributes["k"] == 2

    @pytest.mark.parametrize("bad_key", ["", "a\nb"])
    def test_bad_keys_rejected(self, bad_key):
        with pytest.raises(ValidationError):
            set_attribute(make_node(NodeKind.ENTITY, "e1"), bad_key, "x")

    def test_reserved_keys_rejected_on_edges(self):
        edge = make_edge(
            EdgeKind.USED, make_node(NodeKind.ACTIVITY, "a"), make_node(NodeKind.ENTITY, "e")
        )
        with pytest.raises(ValidationError):
            set_attribute(edge, "prov:source", "x")
        set_attribute(edge, "role", "input")  # ordinary keys are fine
        assert edge.attributes == {"role": "input"}

    def test_int_range_enforced(self):
        node = make_node(NodeKind.ENTITY, "e1")
        set_attribute(node, "big", 2**63 - 1)
        with pytest.raises(ValidationError):
            set_attribute(node, "too-big", 2**63)

    def test_unsupported_value_type_rejected(self):
        with pytest.raises(ValidationError):
            set_attribute(make_node(NodeKind.ENTITY, "e1"), "k", [1, 2])


class TestMakeEdge:
    def test_used_activity_to_entity(self):
        activity = make_node(NodeKind.ACTIVITY, "a1")
        entity = make_node(NodeKind.ENTITY, "e1")
        edge = make_edge(EdgeKind.USED, activity, entity)
        assert (edge.kind, edge.source, edge.target) == (EdgeKind.USED, "a1", "e1")

    def test_used_entity_source_rejected(self):
        e1 = make_node(NodeKind.ENTITY, "e1")
        e2 = make_node(NodeKind.ENTITY, "e2")
        with pytest.raises(ConstraintError) as excinfo:
            make_edge(EdgeKind.USED, e1, e2)
        assert "Activity" in str(excinfo.value) and "Entity" in str(excinfo.value)

    def test_derivation_between_entities(self):
        e1 = make_node(NodeKind.ENTITY, "e1")
        e2 = make_node(NodeKind.ENTITY, "e2")
        edge = make_edge(EdgeKind.WAS_DERIVED_FROM, e2, e1)
        assert (edge.source, edge.target) == ("e2", "e1")

    def test_endpoint_table_is_total(self):
        """Exhaustive: each of the 7 kinds accepts exactly one of the 9 pairs."""
        for kind in EdgeKind:
            for src_kind, tgt_kind in itertools.product(NodeKind, NodeKind):
                src = make_node(src_kind)
                tgt = make_node(tgt_kind)
                if (src_kind, tgt_kind) == EDGE_ENDPOINT_KINDS[kind]:
                    make_edge(kind, src, tgt)
                else:
                    with pytest.raises(ConstraintError):
                        make_edge(kind, src, tgt)

    def test_self_loop_rules(self):
        for kind in EdgeKind:
            node_kind = EDGE_ENDPOINT_KINDS[kind][0]
            if EDGE_ENDPOINT_KINDS[kind][1] is not node_kind:
                continue  # different endpoint kinds cannot self-loop anyway
            if kind in SELF_LOOP_KINDS:
                ProvEdge(id="x", kind=kind, source="n", target="n")
            else:
                with pytest.raises(ValidationError):
                    ProvEdge(id="x", kind=kind, source="n", target="n")


class TestGraphInsert:
    def test_duplicate_insert_merges_attributes(self):
        graph = ProvenanceGraph()
        graph_insert(graph, ProvNode("e1", NodeKind.ENTITY, {"a": 1}))
        graph_insert(graph, ProvNode("e1", NodeKind.ENTITY, {"b": 2}))
        assert graph.nodes["e1"].attributes == {"a": 1, "b": 2}
        assert len(graph.nodes) == 1

    def test_kind_conflict(self):
        graph = ProvenanceGraph()
        graph.insert(ProvNode("x", NodeKind.ENTITY))
        with pytest.raises(ConflictError):
            graph.insert(ProvNode("x", NodeKind.ACTIVITY))

    def test_edge_endpoint_conflict(self):
        graph = ProvenanceGraph()
        graph.insert(ProvEdge("d", EdgeKind.WAS_DERIVED_FROM, "a", "b"))
        with pytest.raises(ConflictError):
            graph.insert(ProvEdge("d", EdgeKind.WAS_DERIVED_FROM, "a", "c"))

    def test_open_graph_accepts_dangling_edge(self):
        graph = ProvenanceGraph()
        graph.insert(ProvEdge("u", EdgeKind.USED, "a1", "ghost"))
        assert "u" in graph.edges
        assert graph.nodes == {}

    @given(strat.element_lists(), st.randoms())
    def test_insert_order_never_matters(self, elements, rnd):
        # Duplicate each element as two partial copies: any interleaving
        # writes the same (id, key) pairs with the same values.
        sequence = []
        for el in elements:
            keys = sorted(el.attributes)
            half = {k: el.attributes[k] for k in keys[: len(keys) // 2]}
            if isinstance(el, ProvNode):
                sequence.append(ProvNode(el.id, el.kind, half))
            else:
                sequence.append(ProvEdge(el.id, el.kind, el.source, el.target, half))
            sequence.append(el)
        shuffled = list(sequence)
        rnd.shuffle(shuffled)
        g1 = ProvenanceGraph().insert_all(sequence)
        g2 = ProvenanceGraph().insert_all(shuffled)
        assert g1 == g2

    @given(strat.element_lists())
    def test_insert_is_idempotent(self, elements):
        once = ProvenanceGraph().insert_all(elements)
        twice = ProvenanceGraph().insert_all(elements).insert_all(elements)
        assert once == twice


class TestValidateGraph:
    def test_well_formed_sample_graph(self):
        from conftest import sample_elements

        graph = ProvenanceGraph().insert_all(sample_elements())
        assert validate_graph(graph) == []

    def test_kind_violation_reported(self):
        graph = ProvenanceGraph()
        graph.insert(ProvNode("e1", NodeKind.ENTITY))
        graph.insert(ProvNode("e2", NodeKind.ENTITY))
        graph.insert(ProvEdge("u", EdgeKind.USED, "e1", "e2"))
        violations = validate_graph(graph)
        assert [v.problem for v in violations] == ["kind-violation"]
        assert violations[0].edge_id == "u"

    def test_dangling_reference_reported(self):
        graph = ProvenanceGraph()
        graph.insert(ProvNode("a1", NodeKind.ACTIVITY))
        graph.insert(ProvEdge("u", EdgeKind.USED, "a1", "ghost"))
        violations = validate_graph(graph)
        assert [v.problem for v in violations] == ["dangling-reference"]
        assert "ghost" in violations[0].detail
