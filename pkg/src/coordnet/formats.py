"""Shared CSV/line formats used across pipeline stages.

Floats are written with repr() (shortest round-trip form) so output is
byte-stable; empty cells encode null.
"""

from __future__ import annotations

import csv
from typing import Iterable

from coordnet.detectors import DETECTORS, CoordinationEdge

EDGE_HEADER = ("account_a", "account_b", "detector", "score", "evidence")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_edges_csv(edges: Iterable[CoordinationEdge], fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(EDGE_HEADER)
    for e in edges:
        writer.writerow((e.a, e.b, e.detector, fmt(e.score), e.evidence))


def read_edges_csv(source) -> list[CoordinationEdge]:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as fp:
            return read_edges_csv(fp)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(header) != EDGE_HEADER:
        raise ValueError(f"edge CSV must start with header {','.join(EDGE_HEADER)}")
    edges = []
    for row in reader:
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"edge row must have 5 fields, got {len(row)}")
        a, b, detector, score, evidence = row
        if detector not in DETECTORS:
            raise ValueError(f"unknown detector in edge file: {detector!r}")
        edges.append(CoordinationEdge(a, b, detector, float(score), evidence))
    return edges


def write_account_list(accounts: Iterable[str], fp) -> None:
    for account in sorted(accounts):
        fp.write(account)
        fp.write("\n")


def read_account_list(source) -> set[str]:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fp:
            return read_account_list(fp)
    return {line.strip() for line in source if line.strip()}
