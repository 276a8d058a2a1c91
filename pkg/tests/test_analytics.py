import json

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

import strategies as strat
from conftest import chain_elements
from oracles import brute_force_template_match
from provkit.analytics import (
    AttrPredicate,
    PipelineTemplate,
    StageSpec,
    StageViolation,
    ValidationReport,
    dump_template,
    explain,
    load_template,
    validate,
)
from provkit.errors import ValidationError
from provkit.model import EdgeKind, NodeKind, ProvEdge, ProvNode
from provkit.store import open_store


def entity_chain_template(n: int, stage_attr: bool = False) -> PipelineTemplate:
    """[Entity] <- WasDerivedFrom x (n-1), optionally pinning the stage header."""
    stages = []
    for k in range(n):
        predicates = [AttrPredicate("stage", str(n - k))] if stage_attr else []
        stages.append(
            StageSpec(
                label=f"s{k}",
                node_kind=NodeKind.ENTITY,
                edge_kind_to_previous=None if k == 0 else EdgeKind.WAS_DERIVED_FROM,
                attr_predicates=predicates,
            )
        )
    return PipelineTemplate(stages=stages)


def stage_chain_store(store, n: int):
    """Chain m1..mn with stage attrs "1".."n"; root for validation is mn."""
    nodes, edges = chain_elements(n)
    for i, node in enumerate(nodes):
        node.attributes["stage"] = str(i + 1)
        store.put_node(node)
    for edge in edges:
        store.put_edge(edge)
    return nodes, edges


def verify_certificate(report, template, store):
    """Replay a pass report's assignment against the store."""
    assert report.verdict == "pass"
    assert [label for label, _ in report.matched] == [s.label for s in template.stages]
    ids = [node_id for _, node_id in report.matched]
    assert len(set(ids)) == len(ids), "assignment must be injective"
    for k, (stage, node_id) in enumerate(zip(template.stages, report.matched)):
        node = store.get_node(node_id[1])
        assert node is not None and node.kind is stage.node_kind
        for pred in stage.attr_predicates:
            assert pred.key in node.attributes
            if pred.expected is not None:
                assert strat.values_strict_equal(node.attributes[pred.key], pred.expected)
        if k > 0:
            prev_id = report.matched[k - 1][1]
            linked = any(
                e.target == node_id[1] and e.kind is stage.edge_kind_to_previous
                for e in store.edges_from(prev_id)
            )
            assert linked, f"stage {stage.label} not linked to its predecessor"


class TestTemplateModel:
    def test_first_stage_cannot_have_an_edge(self):
        with pytest.raises(ValidationError):
            PipelineTemplate(
                stages=[
                    StageSpec("s0", NodeKind.ENTITY, EdgeKind.WAS_DERIVED_FROM),
                ]
            )

    def test_later_stages_need_an_edge(self):
        with pytest.raises(ValidationError):
            PipelineTemplate(
                stages=[StageSpec("s0", NodeKind.ENTITY), StageSpec("s1", NodeKind.ENTITY)]
            )

    def test_empty_template_rejected(self):
        with pytest.raises(ValidationError):
            PipelineTemplate(stages=[])

    def test_file_round_trip(self, tmp_path):
        template = entity_chain_template(3, stage_attr=True)
        template.stages[1].attr_predicates.append(AttrPredicate("checked"))  # wildcard
        path = tmp_path / "template.json"
        path.write_text(json.dumps(dump_template(template)))
        loaded = load_template(path)
        assert dump_template(loaded) == dump_template(template)


class TestValidate:
    def test_single_stage_identity(self, store):
        store.put_node(ProvNode("root", NodeKind.ENTITY))
        report = validate(entity_chain_template(1), "root", store)
        assert report.verdict == "pass"
        assert report.matched == [("s0", "root")]

    def test_chain_matches(self, store):
        nodes, _ = stage_chain_store(store, 4)
        report = validate(entity_chain_template(4), nodes[-1].id, store)
        assert report.verdict == "pass"
        assert len(report.matched) == 4
        assert [node_id for _, node_id in report.matched] == ["m4", "m3", "m2", "m1"]

    def test_corrupted_stage_header_mismatch(self, store):
        nodes, _ = stage_chain_store(store, 3)
        # corrupt the final hop's header: the merge overwrites stage=3 with 2
        store.put_node(ProvNode("m3", NodeKind.ENTITY, {"stage": "2"}))
        report = validate(entity_chain_template(3, stage_attr=True), "m3", store)
        assert report.verdict == "fail"
        (violation,) = report.violations
        assert violation.reason == "attribute-mismatch"
        assert violation.key == "stage"
        assert violation.expected == "3"
        assert violation.found == "2"

    def test_unknown_root_missing_node_at_stage_zero(self, store):
        report = validate(entity_chain_template(2), "ghost", store)
        assert report.verdict == "fail"
        (violation,) = report.violations
        assert violation.stage_label == "s0"
        assert violation.reason == "missing-node"

    def test_wrong_edge_kind_reported(self, store):
        store.put_node(ProvNode("a", NodeKind.ENTITY))
        store.put_node(ProvNode("b", NodeKind.ACTIVITY))
        store.put_edge(ProvEdge("g", EdgeKind.WAS_GENERATED_BY, "a", "b"))
        report = validate(entity_chain_template(2), "a", store)
        (violation,) = report.violations
        assert violation.stage_label == "s1"
        assert violation.reason == "wrong-edge-kind"

    def test_dead_end_reports_missing_node(self, store):
        store.put_node(ProvNode("a", NodeKind.ENTITY))
        report = validate(entity_chain_template(2), "a", store)
        (violation,) = report.violations
        assert violation.stage_label == "s1"
        assert violation.reason == "missing-node"

    def test_backtracks_over_sibling_candidates(self, store):
        # root derives from both "dead" (no further lineage) and "mid" -> "deep";
        # candidate order tries "dead" first, so a 3-stage match must backtrack.
        for node_id in ("root", "dead", "mid", "deep"):
            store.put_node(ProvNode(node_id, NodeKind.ENTITY))
        store.put_edge(ProvEdge("e1", EdgeKind.WAS_DERIVED_FROM, "root", "dead"))
        store.put_edge(ProvEdge("e2", EdgeKind.WAS_DERIVED_FROM, "root", "mid"))
        store.put_edge(ProvEdge("e3", EdgeKind.WAS_DERIVED_FROM, "mid", "deep"))
        report = validate(entity_chain_template(3), "root", store)
        assert report.verdict == "pass"
        assert [node_id for _, node_id in report.matched] == ["root", "mid", "deep"]

    def test_injectivity_blocks_cycle_reuse(self, store):
        store.put_node(ProvNode("a", NodeKind.ENTITY))
        store.put_node(ProvNode("b", NodeKind.ENTITY))
        store.put_edge(ProvEdge("d1", EdgeKind.WAS_DERIVED_FROM, "a", "b"))
        store.put_edge(ProvEdge("d2", EdgeKind.WAS_DERIVED_FROM, "b", "a"))
        report = validate(entity_chain_template(3), "a", store)
        assert report.verdict == "fail"
        assert report.violations[0].stage_label == "s2"

    def test_result_ignores_disconnected_elements(self, store):
        nodes, _ = stage_chain_store(store, 3)
        template = entity_chain_template(3, stage_attr=True)
        before = validate(template, "m3", store)
        store.put_node(ProvNode("elsewhere", NodeKind.ENTITY, {"stage": "1"}))
        store.put_edge(ProvEdge("dx", EdgeKind.WAS_DERIVED_FROM, "elsewhere", "nowhere"))
        after = validate(template, "m3", store)
        assert (before.verdict, before.matched, before.violations) == (
            after.verdict,
            after.matched,
            after.violations,
        )

    def test_pass_certificates_self_verify(self, store):
        nodes, _ = stage_chain_store(store, 5)
        template = entity_chain_template(5, stage_attr=True)
        report = validate(template, "m5", store)
        verify_certificate(report, template, store)


class TestExplain:
    def test_pass_text(self, store):
        nodes, _ = stage_chain_store(store, 3)
        report = validate(entity_chain_template(3), "m3", store)
        assert explain(report) == "OK: 3 stages matched"

    def test_missing_node_line(self):
        report = ValidationReport(
            verdict="fail",
            violations=[StageViolation("resize", "missing-node")],
        )
        text = explain(report)
        assert "resize" in text and "missing-node" in text

    def test_one_line_per_violation_in_order(self):
        report = ValidationReport(
            verdict="fail",
            violations=[
                StageViolation("resize", "missing-node"),
                StageViolation("transcode", "attribute-mismatch", key="codec", expected="h264", found="vp9"),
            ],
        )
        lines = explain(report).split("\n")
        assert len(lines) == 2
        assert "resize" in lines[0]
        assert "transcode" in lines[1] and "codec" in lines[1]


# -- oracle equivalence -------------------------------------------------------

_simple_ids = st.sampled_from([f"n{i}" for i in range(8)])


@st.composite
def match_scenarios(draw):
    """A small stored graph, a root, and a template that sometimes matches.

    Half the templates are read off an actual walk through the graph (then
    possibly corrupted in one stage); the rest are random. This keeps the
    verdict distribution mixed instead of all-fail.
    """
    node_ids = draw(st.lists(_simple_ids, min_size=1, max_size=8, unique=True))
    nodes = [
        ProvNode(
            node_id,
            draw(st.sampled_from([NodeKind.ENTITY, NodeKind.ACTIVITY])),
            draw(st.dictionaries(st.sampled_from(["stage", "k"]), st.sampled_from(["1", "2"]), max_size=2)),
        )
        for node_id in node_ids
    ]
    edge_kind_pool = st.sampled_from([EdgeKind.WAS_DERIVED_FROM, EdgeKind.WAS_INFORMED_BY, EdgeKind.USED])
    n_edges = draw(st.integers(min_value=0, max_value=10))
    edges = []
    for i in range(n_edges):
        source = draw(st.sampled_from(node_ids))
        target = draw(st.sampled_from(node_ids + ["ghost"]))
        kind = draw(edge_kind_pool)
        if source == target and kind not in (EdgeKind.WAS_DERIVED_FROM, EdgeKind.WAS_INFORMED_BY):
            continue
        edges.append(ProvEdge(f"e{i}", kind, source, target))
    nodes_by_id = {n.id: n for n in nodes}
    root = draw(st.sampled_from(node_ids + ["ghost"]))

    def stage_from(node, edge_kind, k):
        predicates = []
        if node.attributes and draw(st.booleans()):
            key = draw(st.sampled_from(sorted(node.attributes)))
            expected = node.attributes[key] if draw(st.booleans()) else None
            predicates.append(AttrPredicate(key, expected))
        return StageSpec(f"s{k}", node.kind, edge_kind, predicates)

    stages = []
    if root in nodes_by_id and draw(st.booleans()):
        current = root
        stages.append(stage_from(nodes_by_id[root], None, 0))
        for k in range(1, draw(st.integers(min_value=1, max_value=4))):
            outs = [e for e in edges if e.source == current and e.target in nodes_by_id]
            if not outs:
                break
            edge = draw(st.sampled_from(outs))
            current = edge.target
            stages.append(stage_from(nodes_by_id[current], edge.kind, k))
        if draw(st.booleans()) and stages:  # corrupt one stage
            k = draw(st.integers(min_value=0, max_value=len(stages) - 1))
            victim = stages[k]
            if draw(st.booleans()):
                flipped = NodeKind.ACTIVITY if victim.node_kind is NodeKind.ENTITY else NodeKind.ENTITY
                stages[k] = StageSpec(victim.label, flipped, victim.edge_kind_to_previous, victim.attr_predicates)
            else:
                stages[k] = StageSpec(
                    victim.label,
                    victim.node_kind,
                    victim.edge_kind_to_previous,
                    [AttrPredicate("stage", "999")],
                )
    else:
        for k in range(draw(st.integers(min_value=1, max_value=3))):
            stages.append(
                StageSpec(
                    f"s{k}",
                    draw(st.sampled_from([NodeKind.ENTITY, NodeKind.ACTIVITY])),
                    None if k == 0 else draw(edge_kind_pool),
                    [AttrPredicate("stage", draw(st.sampled_from(["1", "2"])))]
                    if draw(st.booleans())
                    else [],
                )
            )
    return nodes, edges, root, PipelineTemplate(stages=stages)


class TestOracleEquivalence:
    @given(match_scenarios())
    @settings(max_examples=120)
    def test_verdict_and_first_violation_stage(self, scenario):
        nodes, edges, root, template = scenario
        nodes_by_id = {n.id: n for n in nodes}
        want = brute_force_template_match(template, root, nodes_by_id, edges)
        for backend in ("normalized", "denormalized"):
            with open_store(backend) as store:
                for node in nodes:
                    store.put_node(node)
                for edge in edges:
                    store.put_edge(edge)
                report = validate(template, root, store)
                if want == len(template.stages):
                    assert report.verdict == "pass", explain(report)
                    verify_certificate(report, template, store)
                else:
                    assert report.verdict == "fail"
                    assert report.violations[0].stage_label == f"s{want}"
