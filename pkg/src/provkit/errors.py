"""Exception hierarchy shared across the toolkit."""


class ProvError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ProvError):
    """An input value violates a model constraint (bad id, bad key, bad value)."""


class ConstraintError(ProvError):
    """A relation's endpoint kinds do not match the kind table for that relation."""


class ConflictError(ProvError):
    """An insert collides with an existing element of the same id but different shape."""


class SchemaError(ProvError):
    """A PROV-JSON document or template file is structurally malformed."""


class CorruptLineError(ProvError):
    """A log line carries the envelope marker but its payload cannot be parsed.

    The offending raw line is kept on ``line`` so it can be dead-lettered.
    """

    def __init__(self, message: str, line: str):
        super().__init__(message)
        self.line = line


class SinkError(ProvError):
    """A log sink could not be opened."""


class DeliveryError(SinkError):
    """A log line could not be handed to its sink."""


class StoreError(ProvError):
    """A storage backend failed at the engine level."""


class SourceError(ProvError):
    """An ingest source could not be started (unreadable file, unbindable port)."""
