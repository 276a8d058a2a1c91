"""In-process message channels with a provenance interceptor, plus a
simulated multi-stage processing pipeline that exercises the whole toolkit.

The interceptor runs before every channel delivery. For each message it
logs an entity named by the message id, with every header rendered as a
text attribute; if the message carries a ``previousId`` header it also logs
a derivation edge from the current message to the previous one; finally it
returns a copy of the message whose ``previousId`` header is the current
message id. Chaining one interceptor call per hop therefore records each
input's journey as a simple derivation path: n hops -> n entities and
n-1 edges, with no edge on the first hop.
"""

from __future__ import annotations

import contextvars
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .errors import ValidationError
from .logger import ProvenanceLogger
from .model import EdgeKind, Identifier, NodeKind, ProvEdge, ProvNode, new_id

PREVIOUS_ID_HEADER = "previousId"

# The id of the message currently being delivered, visible to stage code so
# it may log extra relations against the in-flight message. Optional; the
# built-in transforms never touch it.
_current_message_id: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar(
    "current_message_id", default=None
)


def current_message_id() -> Optional[str]:
    return _current_message_id.get()


@dataclass
class Message:
    """One message on a channel: fresh id, text headers, opaque payload."""

    id: Identifier = field(default_factory=new_id)
    headers: dict[str, str] = field(default_factory=dict)
    payload: bytes = b""


class ProvenanceInterceptor:
    """Channel interceptor that records per-message provenance."""

    def __init__(self, logger: ProvenanceLogger) -> None:
        self.logger = logger

    def pre_send(self, message: Message, channel: "Channel") -> Message:
        entity = ProvNode(
            id=message.id,
            kind=NodeKind.ENTITY,
            attributes={name: str(value) for name, value in message.headers.items()},
        )
        self.logger.log(entity)
        if PREVIOUS_ID_HEADER in message.headers:
            self.logger.log(
                ProvEdge(
                    id=new_id(),
                    kind=EdgeKind.WAS_DERIVED_FROM,
                    source=message.id,
                    target=message.headers[PREVIOUS_ID_HEADER],
                )
            )
        return replace(
            message, headers={**message.headers, PREVIOUS_ID_HEADER: message.id}
        )


def intercept_pre_send(
    message: Message, channel: "Channel", logger: ProvenanceLogger
) -> Message:
    """One-shot form of :meth:`ProvenanceInterceptor.pre_send`."""
    return ProvenanceInterceptor(logger).pre_send(message, channel)


@dataclass
class Channel:
    """A named point-to-point channel; interceptors run in order before delivery."""

    name: str
    subscriber: Callable[[Message], bytes]
    interceptors: list[ProvenanceInterceptor] = field(default_factory=list)

    def send(self, message: Message) -> tuple[Message, bytes]:
        """Deliver a message; returns the (possibly rewritten) message and the
        subscriber's result."""
        for interceptor in self.interceptors:
            message = interceptor.pre_send(message, self)
        token = _current_message_id.set(message.id)
        try:
            result = self.subscriber(message)
        finally:
            _current_message_id.reset(token)
        return message, result


Transform = Callable[[bytes], bytes]

TRANSFORMS: dict[str, Transform] = {
    "identity": lambda payload: payload,
    "uppercase": lambda payload: payload.upper(),
    "hash": lambda payload: hashlib.sha256(payload).hexdigest().encode("ascii"),
}


@dataclass
class Stage:
    name: str
    transform: str = "identity"

    def __post_init__(self) -> None:
        if self.transform not in TRANSFORMS:
            raise ValidationError(
                f"unknown transform {self.transform!r}; expected one of {sorted(TRANSFORMS)}"
            )


@dataclass
class PipelineSpec:
    stages: list[Stage]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValidationError("a pipeline needs at least one stage")


def load_pipeline_spec(path: Union[str, Path]) -> PipelineSpec:
    """Load a pipeline description: {"stages": [{"name": ..., "transform": ...}]}."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict) or not isinstance(raw.get("stages"), list):
        raise ValidationError(f"{path}: expected an object with a 'stages' list")
    stages = [
        Stage(name=s["name"], transform=s.get("transform", "identity")) for s in raw["stages"]
    ]
    return PipelineSpec(stages=stages)


@dataclass
class InputResult:
    """Outcome of one input's run through the pipeline."""

    input_index: int
    message_ids: list[Identifier] = field(default_factory=list)
    final_payload: Optional[bytes] = None
    failed_stage: Optional[str] = None
    error: Optional[str] = None


@dataclass
class RunReport:
    results: list[InputResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.failed_stage is None for r in self.results)


def build_channels(spec: PipelineSpec, logger: Optional[ProvenanceLogger]) -> list[Channel]:
    """One channel per stage; the provenance interceptor is attached to every
    channel unless no logger is given (an uninstrumented pipeline)."""
    channels = []
    for stage in spec.stages:
        transform = TRANSFORMS[stage.transform]
        interceptors = [ProvenanceInterceptor(logger)] if logger is not None else []
        channels.append(
            Channel(
                name=stage.name,
                subscriber=lambda msg, t=transform: t(msg.payload),
                interceptors=interceptors,
            )
        )
    return channels


def run_pipeline(
    spec: PipelineSpec,
    inputs: Sequence[bytes],
    logger: Optional[ProvenanceLogger],
) -> RunReport:
    """Flow each input through all stages over intercepted channels.

    Every hop gets a fresh message whose headers carry over from the previous
    hop's delivered message (so ``previousId`` persists and the interceptor
    can chain derivations). A failing stage transform marks the input failed
    at that stage; provenance logged up to the failure is retained.
    """
    channels = build_channels(spec, logger)
    report = RunReport()
    for index, payload in enumerate(inputs):
        result = InputResult(input_index=index)
        headers = {"input": str(index)}
        current = payload
        for hop, channel in enumerate(channels):
            message = Message(
                headers={**headers, "stage": str(hop + 1)},
                payload=current,
            )
            result.message_ids.append(message.id)
            try:
                delivered, current = channel.send(message)
            except Exception as exc:
                result.failed_stage = channel.name
                result.error = str(exc)
                break
            headers = dict(delivered.headers)
        else:
            result.final_payload = current
        report.results.append(result)
    return report
