"""Command-line surface binding the toolkit together.

Subcommands: ingest, serve, query, validate, export, demo, fsck.
Exit codes: 0 success, 1 failed validation (validate/fsck), 2 operational
error (bad flags, unreadable files, store failures).
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from pathlib import Path
from typing import Optional, Sequence

from .analytics import explain, load_template, validate
from .config import AppConfig, load_config
from .errors import ProvError
from .ingest import FileSource, HttpIntakeSource, TcpListenerSource, run_source
from .logger import FileSink, ProvenanceLogger
from .model import ProvenanceGraph
from .pipeline import PipelineSpec, Stage, load_pipeline_spec, run_pipeline
from .serde import serialize, to_dot
from .service import graph_payload, lineage_payload, parse_query_value, serve
from .store import BACKENDS, Store, open_store


def _add_store_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store", help="data directory or database file")
    parser.add_argument("--backend", choices=BACKENDS, help="storage backend")
    parser.add_argument("--config", help="optional JSON config file")


def _open_store(args: argparse.Namespace, config: AppConfig) -> Store:
    backend = args.backend or config.store.backend
    path = args.store or config.store.path
    return open_store(backend, path)


def _store_dir(args: argparse.Namespace, config: AppConfig) -> Optional[Path]:
    path = Path(args.store or config.store.path)
    if path.suffix:
        return path.parent
    return path


def _dead_letter_path(args: argparse.Namespace, config: AppConfig) -> Optional[str]:
    if getattr(args, "dead_letter", None):
        return args.dead_letter
    if config.ingest.dead_letter:
        return config.ingest.dead_letter
    directory = _store_dir(args, config)
    return str(directory / "dead-letter.log") if directory is not None else None


def _print_stats(stats) -> None:
    print(
        f"lines_seen={stats.lines_seen} provenance_lines={stats.provenance_lines} "
        f"elements_written={stats.elements_written} corrupt_lines={stats.corrupt_lines}"
    )


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.file is None and args.tcp_port is None and args.http_port is None:
        print("ingest: one of --file, --tcp-port, --http-port is required", file=sys.stderr)
        return 2
    if args.file is not None:
        source = FileSource(path=args.file, follow=args.follow)
    elif args.tcp_port is not None:
        source = TcpListenerSource(port=args.tcp_port)
    else:
        source = HttpIntakeSource(port=args.http_port)
    store = _open_store(args, config)
    dead_letter = _dead_letter_path(args, config)
    shutdown = threading.Event()
    try:
        stats = run_source(source, store, shutdown=shutdown, dead_letter=dead_letter)
    except KeyboardInterrupt:
        shutdown.set()
        return 0
    finally:
        store.close()
    _print_stats(stats)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    service = serve(
        store,
        port=args.port if args.port is not None else config.serve.port,
        host=args.host or config.serve.host,
        ui_dir=args.ui_dir or config.serve.ui_dir,
        max_depth=args.max_depth if args.max_depth is not None else config.serve.max_depth,
    )
    print(f"serving on http://{args.host or config.serve.host}:{service.port}")
    try:
        service.serve_forever()
    finally:
        store.close()
    return 0


def _payload_json(payload: dict) -> str:
    return json.dumps(payload, indent=2)


def _cmd_query(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    try:
        if args.what == "get":
            node = store.get_node(args.id)
            if node is not None:
                graph = ProvenanceGraph()
                graph.insert(node)
                print(_payload_json(graph_payload(graph)))
                return 0
            edge = store.get_edge(args.id)
            if edge is not None:
                graph = ProvenanceGraph()
                graph.insert(edge)
                print(_payload_json(graph_payload(graph)))
                return 0
            print(f"no element {args.id!r}", file=sys.stderr)
            return 2
        if args.what == "find":
            nodes = store.find_nodes(args.key, parse_query_value(args.vtype, args.value))
            graph = ProvenanceGraph()
            for node in nodes:
                graph.insert(node)
            print(_payload_json(graph_payload(graph)))
            return 0
        if args.what == "ancestors":
            print(_payload_json(lineage_payload(store.ancestors(args.id, max_depth=args.depth))))
            return 0
        if args.what == "descendants":
            print(_payload_json(lineage_payload(store.descendants(args.id, max_depth=args.depth))))
            return 0
        if args.what == "subgraph":
            print(_payload_json(graph_payload(store.connected_subgraph(args.ids))))
            return 0
        raise AssertionError(args.what)
    finally:
        store.close()


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    template = load_template(args.template)
    store = _open_store(args, config)
    try:
        report = validate(template, args.root, store)
    finally:
        store.close()
    print(explain(report))
    return 0 if report.verdict == "pass" else 1


def _cmd_export(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    try:
        if args.ids:
            graph = store.connected_subgraph(args.ids)
        else:
            graph = ProvenanceGraph()
            for node in store.all_nodes():
                graph.insert(node)
            for edge in store.all_edges():
                graph.insert(edge)
    finally:
        store.close()
    if args.format == "provjson":
        text = json.dumps(serialize(graph.elements()), indent=2)
    else:
        text = to_dot(graph)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_demo(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.pipeline:
        spec = load_pipeline_spec(args.pipeline)
    else:
        spec = PipelineSpec(
            stages=[Stage(name=f"stage-{i + 1}", transform=args.transform) for i in range(args.stages)]
        )
    directory = _store_dir(args, config)
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
    log_path = args.log_file or (str(directory / "demo.log") if directory else "demo.log")
    sink = FileSink(log_path)
    logger = ProvenanceLogger(sink)
    inputs = [f"input-{i}".encode("utf-8") for i in range(args.inputs)]
    report = run_pipeline(spec, inputs, logger)
    logger.flush()
    sink.close()
    store = _open_store(args, config)
    try:
        stats = run_source(FileSource(path=log_path), store, dead_letter=_dead_letter_path(args, config))
        for result in report.results:
            chain = " -> ".join(result.message_ids)
            status = f"failed at {result.failed_stage}" if result.failed_stage else "ok"
            print(f"input {result.input_index} [{status}]: {chain}")
        _print_stats(stats)
        totals = store.stats()
        print(f"store: {totals['nodes']} nodes, {totals['edges']} edges")
    finally:
        store.close()
    return 0


def _cmd_fsck(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    try:
        violations = store.fsck()
    finally:
        store.close()
    print(json.dumps(violations, indent=2))
    return 0 if not violations else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="provkit",
        description="Provenance toolkit: ingest, store, query, validate and explore "
        "provenance carried in ordinary log streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="pull log data into the store")
    _add_store_flags(p_ingest)
    p_ingest.add_argument("--file", help="log file to ingest")
    p_ingest.add_argument("--follow", action="store_true", help="keep reading as the file grows")
    p_ingest.add_argument("--tcp-port", type=int, help="listen for newline-delimited log streams")
    p_ingest.add_argument("--http-port", type=int, help="accept POST /intake bodies")
    p_ingest.add_argument("--dead-letter", help="file collecting corrupt envelope lines")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the HTTP query service and explorer UI")
    _add_store_flags(p_serve)
    p_serve.add_argument("--port", type=int, help="listen port (default 8080)")
    p_serve.add_argument("--host", help="bind address (default 127.0.0.1)")
    p_serve.add_argument("--ui-dir", help="directory with explorer UI assets")
    p_serve.add_argument("--max-depth", type=int, help="cap on traversal depth (default 100)")
    p_serve.set_defaults(func=_cmd_serve)

    p_query = sub.add_parser("query", help="query the store")
    query_sub = p_query.add_subparsers(dest="what", required=True)
    q_get = query_sub.add_parser("get", help="fetch a node or edge by id")
    q_get.add_argument("id")
    _add_store_flags(q_get)
    q_find = query_sub.add_parser("find", help="find nodes by attribute")
    q_find.add_argument("key")
    q_find.add_argument("value")
    q_find.add_argument("--vtype", choices=["text", "int", "float", "bool"], default="text")
    _add_store_flags(q_find)
    for name in ("ancestors", "descendants"):
        q_dir = query_sub.add_parser(name, help=f"{name} of a vertex")
        q_dir.add_argument("id")
        q_dir.add_argument("--depth", type=int)
        _add_store_flags(q_dir)
    q_sub = query_sub.add_parser("subgraph", help="connected subgraph of a set of vertices")
    q_sub.add_argument("ids", nargs="+")
    _add_store_flags(q_sub)
    p_query.set_defaults(func=_cmd_query)

    p_validate = sub.add_parser("validate", help="check a lineage against a pipeline template")
    _add_store_flags(p_validate)
    p_validate.add_argument("--template", required=True, help="template JSON file")
    p_validate.add_argument("--root", required=True, help="root id to validate from")
    p_validate.set_defaults(func=_cmd_validate)

    p_export = sub.add_parser("export", help="export the graph as PROV-JSON or DOT")
    _add_store_flags(p_export)
    p_export.add_argument("--format", choices=["provjson", "dot"], default="provjson")
    p_export.add_argument("--ids", nargs="*", help="export the connected subgraph of these ids")
    p_export.add_argument("--output", help="write to a file instead of stdout")
    p_export.set_defaults(func=_cmd_export)

    p_demo = sub.add_parser("demo", help="run the simulated pipeline end to end")
    _add_store_flags(p_demo)
    p_demo.add_argument("--stages", type=int, default=3)
    p_demo.add_argument("--inputs", type=int, default=1)
    p_demo.add_argument("--transform", default="hash", help="stage transform tag")
    p_demo.add_argument("--pipeline", help="pipeline spec file (overrides --stages/--transform)")
    p_demo.add_argument("--log-file", help="where the pipeline writes its log")
    p_demo.set_defaults(func=_cmd_demo)

    p_fsck = sub.add_parser("fsck", help="check store consistency")
    _add_store_flags(p_fsck)
    p_fsck.set_defaults(func=_cmd_fsck)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
