"""Aggregation and ingest: pull mixed log data from files and sockets,
filter envelope lines, deserialize, and write provenance into a store.

Ordinary log lines are skipped silently. Corrupt envelopes (marker present,
payload unusable) are counted and preserved in a dead-letter file so they
can be inspected later; they never stop the stream. Store write failures do
stop the stream: buffering unwritable provenance without bound would only
hide the problem.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from dataclasses import asdict, dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Union

from .errors import CorruptLineError, SchemaError, SourceError
from .serde import decode_line, deserialize
from .store import Store


@dataclass
class IngestStats:
    """Monotone counters describing one ingest run (or a delta of one)."""

    lines_seen: int = 0
    provenance_lines: int = 0
    elements_written: int = 0
    corrupt_lines: int = 0

    def add(self, other: "IngestStats") -> "IngestStats":
        self.lines_seen += other.lines_seen
        self.provenance_lines += other.provenance_lines
        self.elements_written += other.elements_written
        self.corrupt_lines += other.corrupt_lines
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FileSource:
    """Newline-delimited log file; ``follow`` keeps reading as the file grows."""

    path: Union[str, Path]
    follow: bool = False


@dataclass
class TcpListenerSource:
    """TCP listener; each connection streams newline-delimited log lines."""

    port: int
    host: str = "127.0.0.1"


@dataclass
class HttpIntakeSource:
    """HTTP intake for log shippers: POST a newline-delimited body to ``path``."""

    port: int
    path: str = "/intake"
    host: str = "127.0.0.1"


IngestSource = Union[FileSource, TcpListenerSource, HttpIntakeSource]


def _dead_letter(path: Optional[Union[str, Path]], line: str) -> None:
    if path is None:
        return
    with open(path, "a", encoding="utf-8") as f:
        f.write(line + "\n")


def ingest_line(
    line: str,
    store: Store,
    dead_letter: Optional[Union[str, Path]] = None,
) -> IngestStats:
    """Process one log line into the store; returns the stats delta.

    Store write failures propagate: a line is never silently lost.
    """
    stats = IngestStats(lines_seen=1)
    try:
        doc = decode_line(line)
    except CorruptLineError:
        stats.corrupt_lines = 1
        _dead_letter(dead_letter, line)
        return stats
    if doc is None:
        return stats
    try:
        elements = deserialize(doc)
    except SchemaError:
        stats.corrupt_lines = 1
        _dead_letter(dead_letter, line)
        return stats
    stats.provenance_lines = 1
    stats.elements_written = store.put_all(elements)
    return stats


def ingest_lines(
    lines,
    store: Store,
    dead_letter: Optional[Union[str, Path]] = None,
) -> IngestStats:
    stats = IngestStats()
    for line in lines:
        stats.add(ingest_line(line.rstrip("\r\n"), store, dead_letter))
    return stats


def ingest_file(
    path: Union[str, Path],
    store: Store,
    *,
    follow: bool = False,
    shutdown: Optional[threading.Event] = None,
    dead_letter: Optional[Union[str, Path]] = None,
    poll_interval: float = 0.05,
) -> IngestStats:
    """Ingest a log file; without ``follow`` this stops at EOF.

    In follow mode the file is re-polled until ``shutdown`` is set; partial
    lines are buffered until their newline arrives.
    """
    stats = IngestStats()
    try:
        f = open(path, "r", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise SourceError(f"cannot read {path}: {exc}") from exc
    with f:
        buffer = ""
        while True:
            chunk = f.readline()
            if chunk == "":
                if not follow:
                    if buffer:
                        stats.add(ingest_line(buffer.rstrip("\r"), store, dead_letter))
                    return stats
                if shutdown is not None and shutdown.is_set():
                    if buffer:
                        stats.add(ingest_line(buffer.rstrip("\r"), store, dead_letter))
                    return stats
                time.sleep(poll_interval)
                continue
            buffer += chunk
            if buffer.endswith("\n"):
                stats.add(ingest_line(buffer.rstrip("\r\n"), store, dead_letter))
                buffer = ""


class TcpIngestServer:
    """Listens for newline-delimited log streams; one worker per connection."""

    def __init__(
        self,
        store: Store,
        port: int = 0,
        host: str = "127.0.0.1",
        dead_letter: Optional[Union[str, Path]] = None,
    ) -> None:
        self._store = store
        self._dead_letter = dead_letter
        self.stats = IngestStats()
        self._stats_lock = threading.Lock()
        self._threads: list[threading.Thread] = []
        self._errors: list[BaseException] = []
        try:
            self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            self._sock.bind((host, port))
            self._sock.listen()
        except OSError as exc:
            raise SourceError(f"cannot listen on {host}:{port}: {exc}") from exc
        self.port = self._sock.getsockname()[1]
        self._closing = False
        # Poll accept with a timeout: closing a socket another thread is
        # blocked in does not reliably interrupt the accept call.
        self._sock.settimeout(0.2)
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True)
        self._acceptor.start()

    def _accept_loop(self) -> None:
        while True:
            try:
                conn, _ = self._sock.accept()
            except TimeoutError:
                if self._closing:
                    return
                continue
            except OSError:
                return  # listener closed
            worker = threading.Thread(target=self._serve_connection, args=(conn,), daemon=True)
            self._threads.append(worker)
            worker.start()

    def _serve_connection(self, conn: socket.socket) -> None:
        try:
            conn.settimeout(None)
            with conn, conn.makefile("r", encoding="utf-8", errors="replace") as reader:
                for line in reader:
                    delta = ingest_line(line.rstrip("\r\n"), self._store, self._dead_letter)
                    with self._stats_lock:
                        self.stats.add(delta)
        except BaseException as exc:  # surfaced on stop(): ingest must not lose errors
            self._errors.append(exc)

    def stop(self, timeout: float = 5.0) -> IngestStats:
        """Stop accepting, drain connection workers, re-raise any worker failure."""
        self._closing = True
        self._acceptor.join(timeout)
        self._sock.close()
        for worker in self._threads:
            worker.join(timeout)
        if self._errors:
            raise self._errors[0]
        return self.stats


class HttpIntakeServer:
    """HTTP intake endpoint: POST newline-delimited lines, get a stats delta back."""

    def __init__(
        self,
        store: Store,
        port: int = 0,
        host: str = "127.0.0.1",
        path: str = "/intake",
        dead_letter: Optional[Union[str, Path]] = None,
    ) -> None:
        self.stats = IngestStats()
        stats_lock = threading.Lock()
        intake = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args: object) -> None:
                pass

            def _reply(self, status: int, body: dict) -> None:
                data = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_POST(self) -> None:
                if self.path != path:
                    self._reply(404, {"error": f"unknown path {self.path}"})
                    return
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length).decode("utf-8", errors="replace")
                lines = body.split("\n")
                if lines and lines[-1] == "":
                    lines.pop()
                delta = IngestStats()
                for line in lines:
                    delta.add(ingest_line(line.rstrip("\r"), store, dead_letter))
                with stats_lock:
                    intake.stats.add(delta)
                self._reply(200, delta.to_dict())

            def do_GET(self) -> None:
                self._reply(404, {"error": "intake accepts POST only"})

        try:
            self._server = ThreadingHTTPServer((host, port), Handler)
        except OSError as exc:
            raise SourceError(f"cannot bind {host}:{port}: {exc}") from exc
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(target=lambda: self._server.serve_forever(poll_interval=0.05), daemon=True)
        self._thread.start()

    def stop(self, timeout: float = 5.0) -> IngestStats:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout)
        return self.stats


def run_source(
    source: IngestSource,
    store: Store,
    *,
    shutdown: Optional[threading.Event] = None,
    dead_letter: Optional[Union[str, Path]] = None,
) -> IngestStats:
    """Run one ingest source to completion and return its stats.

    A plain file source terminates at EOF; follow mode and the listeners run
    until the shutdown event is set.
    """
    if isinstance(source, FileSource):
        return ingest_file(
            source.path, store, follow=source.follow, shutdown=shutdown, dead_letter=dead_letter
        )
    if isinstance(source, TcpListenerSource):
        server: Union[TcpIngestServer, HttpIntakeServer] = TcpIngestServer(
            store, port=source.port, host=source.host, dead_letter=dead_letter
        )
    elif isinstance(source, HttpIntakeSource):
        server = HttpIntakeServer(
            store, port=source.port, host=source.host, path=source.path, dead_letter=dead_letter
        )
    else:
        raise SourceError(f"unknown source {source!r}")
    try:
        if shutdown is None:
            while True:
                time.sleep(3600)
        else:
            shutdown.wait()
    except KeyboardInterrupt:
        pass
    return server.stop()
