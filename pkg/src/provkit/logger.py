"""Instrumentation facade: a serializer wrapped around a line-oriented sink.

Applications construct one ``ProvenanceLogger`` and call ``log()`` for every
provenance object they create; each call emits exactly one envelope line to
the host's log stream. Sinks guarantee line atomicity (a written line is
never interleaved with another writer's line), so one logger may be shared
across threads.
"""

from __future__ import annotations

import socket
import sys
import threading
from pathlib import Path
from typing import IO, Callable, Iterable, Union

from .errors import DeliveryError, SinkError
from .model import ProvElement
from .serde import ProvJsonDocument, encode_line, serialize


class LogSink:
    """Abstract destination accepting whole lines."""

    def write_line(self, line: str) -> None:
        raise NotImplementedError

    def flush(self) -> None:
        """Hand all previously accepted lines to the destination."""

    def close(self) -> None:
        """Release the destination; later writes raise DeliveryError."""


class MemorySink(LogSink):
    """Test sink collecting lines in memory."""

    def __init__(self) -> None:
        self.lines: list[str] = []
        self._lock = threading.Lock()
        self._closed = False

    def write_line(self, line: str) -> None:
        with self._lock:
            if self._closed:
                raise DeliveryError("memory sink is closed")
            self.lines.append(line)

    def close(self) -> None:
        self._closed = True


class StreamSink(LogSink):
    """Writes lines to an open text stream (stdout by default)."""

    def __init__(self, stream: IO[str] | None = None) -> None:
        self._stream = stream if stream is not None else sys.stdout
        self._lock = threading.Lock()

    def write_line(self, line: str) -> None:
        with self._lock:
            try:
                self._stream.write(line + "\n")
            except (ValueError, OSError) as exc:
                raise DeliveryError(f"stream write failed: {exc}") from exc

    def flush(self) -> None:
        with self._lock:
            try:
                self._stream.flush()
            except (ValueError, OSError) as exc:
                raise DeliveryError(f"stream flush failed: {exc}") from exc


class FileSink(LogSink):
    """Appends lines to a log file."""

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        try:
            self._file = open(self.path, "a", encoding="utf-8")
        except OSError as exc:
            raise SinkError(f"cannot open log file {self.path}: {exc}") from exc
        self._lock = threading.Lock()

    def write_line(self, line: str) -> None:
        with self._lock:
            try:
                self._file.write(line + "\n")
            except (ValueError, OSError) as exc:
                raise DeliveryError(f"write to {self.path} failed: {exc}") from exc

    def flush(self) -> None:
        with self._lock:
            try:
                self._file.flush()
            except (ValueError, OSError) as exc:
                raise DeliveryError(f"flush of {self.path} failed: {exc}") from exc

    def close(self) -> None:
        with self._lock:
            self._file.close()


class TcpSink(LogSink):
    """Streams newline-delimited lines over a TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = 10.0) -> None:
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise SinkError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._lock = threading.Lock()

    def write_line(self, line: str) -> None:
        with self._lock:
            try:
                self._sock.sendall((line + "\n").encode("utf-8"))
            except OSError as exc:
                raise DeliveryError(f"tcp write failed: {exc}") from exc

    def flush(self) -> None:
        # TCP writes are unbuffered here; flush doubles as a liveness check
        # so a peer that has closed the stream surfaces as a delivery error.
        with self._lock:
            try:
                self._sock.settimeout(0.0)
                try:
                    data = self._sock.recv(1)
                except BlockingIOError:
                    return
                finally:
                    self._sock.settimeout(None)
            except OSError as exc:
                raise DeliveryError(f"tcp flush failed: {exc}") from exc
            if data == b"":
                raise DeliveryError("tcp peer closed the connection")

    def close(self) -> None:
        with self._lock:
            try:
                self._sock.close()
            except OSError:
                pass


class ProvenanceLogger:
    """Serializes provenance elements and emits one envelope line per log() call."""

    def __init__(
        self,
        sink: LogSink,
        serializer: Callable[[Iterable[ProvElement]], ProvJsonDocument] = serialize,
    ) -> None:
        self.sink = sink
        self.serializer = serializer

    def log(self, element: ProvElement) -> None:
        """Emit the element as a single envelope line; delivery failures surface here."""
        self.sink.write_line(encode_line(self.serializer([element])))

    def log_all(self, elements: list[ProvElement]) -> None:
        for element in elements:
            self.log(element)

    def flush(self) -> None:
        self.sink.flush()
