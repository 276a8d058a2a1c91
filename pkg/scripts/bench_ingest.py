#!/usr/bin/env python3
"""Ingest-rate and lookup-latency experiment over both storage backends.

    python3 scripts/bench_ingest.py --lines 20000
"""

import argparse
import random
import statistics
import tempfile
import time
from pathlib import Path

from provkit.ingest import ingest_lines
from provkit.model import NodeKind, ProvNode
from provkit.serde import encode_line, serialize
from provkit.store import BACKENDS, open_store


def make_lines(count: int, seed: int = 1) -> list[str]:
    rnd = random.Random(seed)
    lines = []
    for i in range(count):
        node = ProvNode(f"n{i}", rnd.choice(list(NodeKind)), {"seq": i, "tag": "bench"})
        lines.append(encode_line(serialize([node])))
    return lines


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lines", type=int, default=10_000)
    parser.add_argument("--lookups", type=int, default=1_000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    lines = make_lines(args.lines, args.seed)
    rnd = random.Random(args.seed)
    print(f"{'backend':<14} {'ingest':>10} {'lines/s':>10} {'median get':>12} {'p99 get':>12}")
    for backend in BACKENDS:
        with tempfile.TemporaryDirectory(prefix="prov-bench-") as tmp:
            with open_store(backend, Path(tmp)) as store:
                started = time.monotonic()
                ingest_lines(lines, store)
                elapsed = time.monotonic() - started
                samples = []
                for _ in range(args.lookups):
                    node_id = f"n{rnd.randrange(args.lines)}"
                    t0 = time.perf_counter()
                    store.get_node(node_id)
                    samples.append(time.perf_counter() - t0)
                samples.sort()
                median = statistics.median(samples)
                p99 = samples[int(len(samples) * 0.99) - 1]
                print(
                    f"{backend:<14} {elapsed:>9.2f}s {args.lines / elapsed:>10.0f} "
                    f"{median * 1e6:>10.0f}us {p99 * 1e6:>10.0f}us"
                )


if __name__ == "__main__":
    main()
