"""Structure-and-content validation of a data item's lineage.

A pipeline template describes, stage by stage, what the provenance of a
well-processed item must look like: the kind of node expected at each
stage, the relation linking it to the previous stage's node, and attribute
predicates the node must satisfy. Validation walks backward from a root id
through the stored graph, matching stages to distinct nodes (greedy, with
backtracking over sibling candidates). The result either carries the full
stage-to-node assignment (a certificate that can be re-checked against the
store) or the first stage that could not be matched, with the reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import SchemaError, ValidationError
from .model import AttributeValue, EdgeKind, Identifier, NodeKind, values_equal
from .serde import decode_value, encode_value
from .store import Store


@dataclass
class AttrPredicate:
    """Expected attribute: ``expected=None`` is a wildcard (key must exist)."""

    key: str
    expected: Optional[AttributeValue] = None


@dataclass
class StageSpec:
    label: str
    node_kind: NodeKind
    edge_kind_to_previous: Optional[EdgeKind] = None
    attr_predicates: list[AttrPredicate] = field(default_factory=list)


@dataclass
class PipelineTemplate:
    stages: list[StageSpec]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValidationError("a template needs at least one stage")
        if self.stages[0].edge_kind_to_previous is not None:
            raise ValidationError("the first stage cannot have edge_kind_to_previous")
        for stage in self.stages[1:]:
            if stage.edge_kind_to_previous is None:
                raise ValidationError(
                    f"stage {stage.label!r} needs edge_kind_to_previous"
                )


def load_template(path: Union[str, Path]) -> PipelineTemplate:
    """Load a template file; stage objects use the StageSpec field names."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict) or not isinstance(raw.get("stages"), list):
        raise SchemaError(f"{path}: expected an object with a 'stages' list")
    stages = []
    for entry in raw["stages"]:
        predicates = []
        for pred in entry.get("attr_predicates", []):
            expected = None
            if "expected" in pred:
                expected = decode_value(pred["expected"], f"template predicate {pred.get('key')!r}")
            predicates.append(AttrPredicate(key=pred["key"], expected=expected))
        edge_kind = entry.get("edge_kind_to_previous")
        stages.append(
            StageSpec(
                label=entry["label"],
                node_kind=NodeKind(entry["node_kind"]),
                edge_kind_to_previous=EdgeKind(edge_kind) if edge_kind is not None else None,
                attr_predicates=predicates,
            )
        )
    return PipelineTemplate(stages=stages)


def dump_template(template: PipelineTemplate) -> dict:
    """Inverse of :func:`load_template` (handy for writing fixtures)."""
    stages = []
    for stage in template.stages:
        entry: dict = {"label": stage.label, "node_kind": stage.node_kind.value}
        if stage.edge_kind_to_previous is not None:
            entry["edge_kind_to_previous"] = stage.edge_kind_to_previous.value
        if stage.attr_predicates:
            entry["attr_predicates"] = [
                {"key": p.key, "expected": encode_value(p.expected)}
                if p.expected is not None
                else {"key": p.key}
                for p in stage.attr_predicates
            ]
        stages.append(entry)
    return {"stages": stages}


@dataclass
class StageViolation:
    stage_label: str
    reason: str  # "missing-node" | "wrong-edge-kind" | "attribute-mismatch"
    key: Optional[str] = None
    expected: Optional[AttributeValue] = None
    found: Optional[AttributeValue] = None
    detail: str = ""


@dataclass
class ValidationReport:
    verdict: str  # "pass" | "fail"
    matched: list[tuple[str, Identifier]] = field(default_factory=list)
    violations: list[StageViolation] = field(default_factory=list)


def _check_stage_node(stage: StageSpec, store: Store, node_id: Identifier) -> Optional[StageViolation]:
    node = store.get_node(node_id)
    if node is None or node.kind is not stage.node_kind:
        found = "absent" if node is None else node.kind.value
        return StageViolation(
            stage.label,
            "missing-node",
            detail=f"expected a {stage.node_kind.value} node, {node_id!r} is {found}",
        )
    for pred in stage.attr_predicates:
        if pred.key not in node.attributes:
            return StageViolation(
                stage.label,
                "attribute-mismatch",
                key=pred.key,
                expected=pred.expected,
                found=None,
                detail=f"attribute {pred.key!r} absent on {node_id!r}",
            )
        actual = node.attributes[pred.key]
        if pred.expected is not None and not values_equal(actual, pred.expected):
            return StageViolation(
                stage.label,
                "attribute-mismatch",
                key=pred.key,
                expected=pred.expected,
                found=actual,
                detail=f"attribute {pred.key!r} on {node_id!r}",
            )
    return None


class _Matcher:
    def __init__(self, template: PipelineTemplate, root_id: Identifier, store: Store) -> None:
        self.stages = template.stages
        self.root_id = root_id
        self.store = store
        self.assignment: list[Identifier] = []
        self.best_depth = -1
        self.best_violation: Optional[StageViolation] = None

    def _fail(self, depth: int, violation: StageViolation) -> None:
        # Keep the first violation recorded at the deepest stage reached.
        if depth > self.best_depth:
            self.best_depth = depth
            self.best_violation = violation

    def search(self, k: int, used: set[Identifier]) -> bool:
        if k == len(self.stages):
            return True
        stage = self.stages[k]
        if k == 0:
            candidates = [self.root_id]
        else:
            out_edges = self.store.edges_from(self.assignment[-1])
            right_kind = sorted({e.target for e in out_edges if e.kind is stage.edge_kind_to_previous})
            if not right_kind:
                reason = "wrong-edge-kind" if out_edges else "missing-node"
                detail = (
                    f"no {stage.edge_kind_to_previous.value} edge out of {self.assignment[-1]!r}"
                    if out_edges
                    else f"no edges out of {self.assignment[-1]!r}"
                )
                self._fail(k, StageViolation(stage.label, reason, detail=detail))
                return False
            candidates = [c for c in right_kind if c not in used]
            if not candidates:
                self._fail(
                    k,
                    StageViolation(
                        stage.label,
                        "missing-node",
                        detail="every candidate node is already matched to an earlier stage",
                    ),
                )
                return False
        for candidate in candidates:
            violation = _check_stage_node(stage, self.store, candidate)
            if violation is not None:
                self._fail(k, violation)
                continue
            self.assignment.append(candidate)
            used.add(candidate)
            if self.search(k + 1, used):
                return True
            used.remove(candidate)
            self.assignment.pop()
        return False


def validate(template: PipelineTemplate, root_id: Identifier, store: Store) -> ValidationReport:
    """Match the template against the lineage of ``root_id``.

    Stage 0 must be the root itself; stage k must be a distinct node reached
    from stage k-1's node by one edge of the stage's kind. The search
    backtracks over sibling candidates, so it finds a full match whenever one
    exists; otherwise the report carries the first stage no assignment can
    reach, with the deepest branch's reason.
    """
    matcher = _Matcher(template, root_id, store)
    if matcher.search(0, set()):
        matched = [
            (stage.label, node_id) for stage, node_id in zip(template.stages, matcher.assignment)
        ]
        return ValidationReport(verdict="pass", matched=matched)
    violation = matcher.best_violation
    assert violation is not None
    return ValidationReport(verdict="fail", violations=[violation])


def _render(value: Optional[AttributeValue]) -> str:
    if value is None:
        return "<any>"
    return json.dumps(encode_value(value), sort_keys=True)


def explain(report: ValidationReport) -> str:
    """Deterministic one-line-per-violation rendering of a report."""
    if report.verdict == "pass":
        return f"OK: {len(report.matched)} stages matched"
    lines = []
    for v in report.violations:
        line = f'stage "{v.stage_label}": {v.reason}'
        if v.reason == "attribute-mismatch":
            found = "<absent>" if v.found is None else _render(v.found)
            line += f" key={v.key!r} expected={_render(v.expected)} found={found}"
        if v.detail:
            line += f" ({v.detail})"
        lines.append(line)
    return "\n".join(lines)
