"""File formats, golden fixtures, and report plumbing.

Three graph formats round-trip losslessly:

* matrix text (`.mat`/`.txt`): whitespace-separated 0/1 rows, an
  optional first line of node labels and an optional class line of
  M/F tokens. Binary edges parse with a default latency of 1 ms.
* edge-list CSV (`.csv`): header ``src,dst,latency_ms[,directed]``,
  with an optional node sidecar ``name,class,fitness,uptime,bandwidth``
  (conventionally ``<stem>.nodes.csv``). Rows with ``directed=false``
  expand to both orientations.
* JSON snapshot (`.json`): one self-contained document with node
  attributes and directed edges.

External string labels live only here; the core graph uses dense ids.
All writes are atomic (temp file + rename) and byte-deterministic.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, is_dataclass, asdict
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from .errors import ParseError
from .graphcore import (
    FULL,
    MINER,
    AdjacencyMatrix,
    DirectedGraph,
    NodeAttributes,
    NodeClass,
    from_matrix,
)

SNAPSHOT_SCHEMA_VERSION = 1

_CLASS_TOKENS = {
    "m": MINER,
    "miner": MINER,
    "f": FULL,
    "full": FULL,
}


class ParsedGraph(NamedTuple):
    graph: DirectedGraph
    names: list[str]


def default_names(g: DirectedGraph) -> list[str]:
    """M<i>/F<i> labels numbered within each class, id order."""
    names = []
    m = f = 0
    for v in g.nodes():
        if g.node_class(v) is MINER:
            m += 1
            names.append(f"M{m}")
        else:
            f += 1
            names.append(f"F{f}")
    return names


# ---- matrix text ------------------------------------------------------------


def parse_matrix(text: str) -> ParsedGraph:
    """Square 0/1 matrix; optional label header and class line."""
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split())
    if not rows:
        raise ParseError("empty matrix document")

    names: list[str] | None = None
    classes: list[NodeClass] | None = None

    def is_binary_row(tokens: list[str]) -> bool:
        return all(t in ("0", "1") for t in tokens)

    def is_class_row(tokens: list[str]) -> bool:
        return all(t.lower() in _CLASS_TOKENS for t in tokens)

    while rows and not is_binary_row(rows[0]):
        tokens = rows.pop(0)
        if is_class_row(tokens) and classes is None:
            classes = [_CLASS_TOKENS[t.lower()] for t in tokens]
        elif names is None and classes is None:
            names = tokens
        else:
            raise ParseError(f"unexpected non-matrix line starting with {tokens[0]!r}")

    n = len(rows)
    if n == 0:
        raise ParseError("matrix document has no 0/1 rows")
    entries = np.zeros((n, n), dtype=float)
    for i, tokens in enumerate(rows):
        if len(tokens) != n:
            raise ParseError(
                f"non-square matrix: row has {len(tokens)} entries, expected {n}",
                line=i + 1,
            )
        for j, tok in enumerate(tokens):
            if tok not in ("0", "1"):
                raise ParseError(f"non-binary entry {tok!r}", line=i + 1, column=j + 1)
            if tok == "1":
                if i == j:
                    raise ParseError("nonzero diagonal entry", line=i + 1, column=j + 1)
                entries[i, j] = 1.0
    if names is not None and len(names) != n:
        raise ParseError(f"{len(names)} labels for {n} matrix rows")
    if classes is not None and len(classes) != n:
        raise ParseError(f"{len(classes)} class tokens for {n} matrix rows")

    attrs = [
        NodeAttributes(node_class=classes[v] if classes else FULL) for v in range(n)
    ]
    graph = from_matrix(AdjacencyMatrix(n=n, entries=entries), attrs)
    if names is None:
        names = default_names(graph)
    return ParsedGraph(graph=graph, names=names)


def write_matrix(g: DirectedGraph, names: list[str] | None = None) -> str:
    """Matrix text with label header and class line; binary edges only."""
    names = names or default_names(g)
    n = g.node_count
    out = [" ".join(names)]
    out.append(" ".join("M" if g.node_class(v) is MINER else "F" for v in g.nodes()))
    m = np.zeros((n, n), dtype=int)
    for src, dst, _ in g.edges():
        m[src, dst] = 1
    for i in range(n):
        out.append(" ".join(str(x) for x in m[i]))
    return "\n".join(out) + "\n"


# ---- edge-list CSV -----------------------------------------------------------


def parse_edges(edges_csv: str, nodes_csv: str | None = None) -> ParsedGraph:
    """Edge rows plus optional node sidecar; names map to dense ids."""
    name_order: list[str] = []
    name_to_id: dict[str, int] = {}
    attrs_by_name: dict[str, NodeAttributes] = {}

    if nodes_csv is not None:
        reader = csv.DictReader(io.StringIO(nodes_csv))
        required = {"name", "class"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError("node sidecar needs at least name,class columns")
        for lineno, row in enumerate(reader, start=2):
            name = row["name"].strip()
            if not name:
                raise ParseError("empty node name", line=lineno)
            if name in name_to_id:
                raise ParseError(f"duplicate node name {name!r}", line=lineno)
            cls_token = row["class"].strip().lower()
            if cls_token not in _CLASS_TOKENS:
                raise ParseError(f"unknown class token {row['class']!r}", line=lineno)
            try:
                attrs = NodeAttributes(
                    node_class=_CLASS_TOKENS[cls_token],
                    fitness=float(row.get("fitness") or 1.0),
                    uptime=float(row.get("uptime") or 1.0),
                    bandwidth=float(row.get("bandwidth") or 1.0),
                )
            except ValueError as exc:
                raise ParseError(f"bad numeric field: {exc}", line=lineno) from None
            name_to_id[name] = len(name_order)
            name_order.append(name)
            attrs_by_name[name] = attrs

    def node_id(name: str, lineno: int) -> int:
        if name not in name_to_id:
            if nodes_csv is not None:
                raise ParseError(f"edge references unknown node {name!r}", line=lineno)
            name_to_id[name] = len(name_order)
            name_order.append(name)
        return name_to_id[name]

    reader = csv.DictReader(io.StringIO(edges_csv))
    if reader.fieldnames is None or not {"src", "dst", "latency_ms"}.issubset(
        reader.fieldnames
    ):
        raise ParseError("edge CSV needs header src,dst,latency_ms[,directed]")
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int, float]] = []
    for lineno, row in enumerate(reader, start=2):
        src_name = row["src"].strip()
        dst_name = row["dst"].strip()
        if not src_name or not dst_name:
            raise ParseError("empty endpoint name", line=lineno)
        try:
            latency = float(row["latency_ms"])
        except (TypeError, ValueError):
            raise ParseError(
                f"bad latency {row.get('latency_ms')!r}", line=lineno
            ) from None
        if latency <= 0:
            raise ParseError(f"non-positive latency {latency}", line=lineno)
        directed_tok = (row.get("directed") or "true").strip().lower()
        if directed_tok not in ("true", "false", "1", "0", "yes", "no"):
            raise ParseError(f"bad directed flag {row['directed']!r}", line=lineno)
        directed = directed_tok in ("true", "1", "yes")
        src = node_id(src_name, lineno)
        dst = node_id(dst_name, lineno)
        if src == dst:
            raise ParseError(f"self-loop on {src_name!r}", line=lineno)
        pairs = [(src, dst)] if directed else [(src, dst), (dst, src)]
        for a, b in pairs:
            if (a, b) in seen:
                raise ParseError(
                    f"duplicate ordered pair {name_order[a]}->{name_order[b]}",
                    line=lineno,
                )
            seen.add((a, b))
            edges.append((a, b, latency))

    if nodes_csv is not None:
        attrs = [attrs_by_name[name] for name in name_order]
    else:
        # no sidecar: infer class from the conventional M/F name prefix
        attrs = [
            NodeAttributes(node_class=MINER if name.upper().startswith("M") else FULL)
            for name in name_order
        ]
    return ParsedGraph(graph=DirectedGraph(attrs, edges), names=name_order)


def write_edges(g: DirectedGraph, names: list[str] | None = None) -> tuple[str, str]:
    """(edges_csv, nodes_csv). Mutual pairs with equal latency collapse
    to one directed=false row."""
    names = names or default_names(g)
    lines = ["src,dst,latency_ms,directed"]
    emitted: set[tuple[int, int]] = set()
    for src, dst, lat in g.edges():
        if (src, dst) in emitted:
            continue
        back = g.has_edge(dst, src) and g.latency(dst, src) == lat
        if back and src < dst:
            lines.append(f"{names[src]},{names[dst]},{lat!r},false")
            emitted.add((src, dst))
            emitted.add((dst, src))
        else:
            lines.append(f"{names[src]},{names[dst]},{lat!r},true")
            emitted.add((src, dst))
    edges_csv = "\n".join(lines) + "\n"
    node_lines = ["name,class,fitness,uptime,bandwidth"]
    for v in g.nodes():
        a = g.attributes(v)
        node_lines.append(
            f"{names[v]},{a.node_class.value},{a.fitness!r},{a.uptime!r},{a.bandwidth!r}"
        )
    return edges_csv, "\n".join(node_lines) + "\n"


# ---- JSON snapshot -----------------------------------------------------------


def graph_to_doc(g: DirectedGraph, names: list[str] | None = None) -> dict:
    names = names or default_names(g)
    return {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "nodes": [
            {
                "name": names[v],
                "class": g.attributes(v).node_class.value,
                "fitness": g.attributes(v).fitness,
                "uptime": g.attributes(v).uptime,
                "bandwidth": g.attributes(v).bandwidth,
            }
            for v in g.nodes()
        ],
        "edges": [
            {"src": src, "dst": dst, "latency_ms": lat} for src, dst, lat in g.edges()
        ],
    }


def doc_to_graph(doc: dict) -> ParsedGraph:
    try:
        version = doc["schema_version"]
        if version != SNAPSHOT_SCHEMA_VERSION:
            raise ParseError(f"unsupported snapshot schema_version {version}")
        names = [str(node["name"]) for node in doc["nodes"]]
        attrs = []
        for node in doc["nodes"]:
            cls_token = str(node["class"]).lower()
            if cls_token not in _CLASS_TOKENS:
                raise ParseError(f"unknown class token {node['class']!r}")
            attrs.append(
                NodeAttributes(
                    node_class=_CLASS_TOKENS[cls_token],
                    fitness=float(node.get("fitness", 1.0)),
                    uptime=float(node.get("uptime", 1.0)),
                    bandwidth=float(node.get("bandwidth", 1.0)),
                )
            )
        edges = [
            (int(e["src"]), int(e["dst"]), float(e["latency_ms"]))
            for e in doc["edges"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed snapshot document: {exc}") from None
    return ParsedGraph(graph=DirectedGraph(attrs, edges), names=names)


# ---- DOT rendering -----------------------------------------------------------


def export_dot(g: DirectedGraph, names: list[str] | None = None) -> str:
    """Graphviz text: miners boxed as core nodes, full-node-incident
    edges dashed, mutual pairs collapsed to one two-way edge."""
    names = names or default_names(g)
    out = ["digraph relay {"]
    for v in g.nodes():
        if g.node_class(v) is MINER:
            out.append(f'  "{names[v]}" [shape=doublecircle, style=bold];')
        else:
            out.append(f'  "{names[v]}" [shape=circle];')
    emitted: set[tuple[int, int]] = set()
    for src, dst, lat in g.edges():
        if (src, dst) in emitted:
            continue
        dashed = g.node_class(src) is FULL or g.node_class(dst) is FULL
        style = "dashed" if dashed else "solid"
        mutual = g.has_edge(dst, src)
        if mutual and src < dst:
            out.append(
                f'  "{names[src]}" -> "{names[dst]}" [dir=both, style={style}];'
            )
            emitted.add((src, dst))
            emitted.add((dst, src))
        elif not mutual:
            out.append(f'  "{names[src]}" -> "{names[dst]}" [style={style}];')
            emitted.add((src, dst))
    out.append("}")
    return "\n".join(out) + "\n"


# ---- path-level load/save ----------------------------------------------------

MATRIX_SUFFIXES = {".mat", ".txt"}


def load_graph(path: str | Path) -> ParsedGraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix in MATRIX_SUFFIXES:
        return parse_matrix(text)
    if path.suffix == ".json":
        return doc_to_graph(json.loads(text))
    if path.suffix == ".csv":
        sidecar = path.parent / (path.stem + ".nodes.csv")
        nodes_text = sidecar.read_text() if sidecar.exists() else None
        return parse_edges(text, nodes_text)
    raise ParseError(f"unknown graph file suffix {path.suffix!r}")


def atomic_write(path: str | Path, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_graph(path: str | Path, g: DirectedGraph, names: list[str] | None = None) -> None:
    path = Path(path)
    if path.suffix in MATRIX_SUFFIXES:
        atomic_write(path, write_matrix(g, names))
    elif path.suffix == ".json":
        atomic_write(path, canonical_json(graph_to_doc(g, names)))
    elif path.suffix == ".csv":
        edges_csv, nodes_csv = write_edges(g, names)
        atomic_write(path, edges_csv)
        atomic_write(path.parent / (path.stem + ".nodes.csv"), nodes_csv)
    else:
        raise ParseError(f"unknown graph file suffix {path.suffix!r}")


# ---- canonical JSON / hashing -------------------------------------------------


def jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses/numpy/tuples into plain JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, NodeClass):
        return obj.value
    return obj


def _key(k: Any) -> str:
    if isinstance(k, tuple):
        return "-".join(str(part) for part in k)
    return str(k)


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def config_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


# ---- golden fixtures -----------------------------------------------------------

# 6-node directed acyclic relay snapshot (btc-style): high-uptime core
# rows dominate outbound connectivity, the last rows only receive
BTC_SNAPSHOT = """\
M1 M2 M3 M4 F1 F2
M M M M F F
0 1 1 0 0 0
0 0 1 1 0 0
0 0 0 1 0 0
0 0 0 0 1 1
0 0 0 0 0 1
0 0 0 0 0 0
"""

# 6-node cyclic snapshot (bsv-style): denser mutual peering in the core
BSV_SNAPSHOT = """\
M1 M2 M3 M4 F1 F2
M M M M F F
0 1 1 1 0 0
1 0 1 0 1 0
1 1 0 0 0 0
0 0 1 0 1 1
0 0 0 1 0 1
0 0 0 0 1 0
"""

# latency-weighted miner backbone with two slow full-node leaves
WEIGHTED_RELAY_EDGES = """\
src,dst,latency_ms,directed
M1,M2,5,false
M1,M3,8,false
M2,M3,3,false
M3,M4,6,false
M4,M5,4,false
M2,M4,7,false
F1,M1,50,false
F2,M2,42,false
"""

WEIGHTED_RELAY_NODES = """\
name,class,fitness,uptime,bandwidth
M1,miner,1.0,1.0,100.0
M2,miner,1.0,1.0,100.0
M3,miner,1.0,1.0,100.0
M4,miner,1.0,1.0,100.0
M5,miner,1.0,1.0,100.0
F1,full,0.1,0.9,10.0
F2,full,0.1,0.9,10.0
"""

# sparse miner chain with a chord plus pendant full nodes; the classic
# 2-core peeling example
CORE_DECOMP_EDGES = """\
src,dst,latency_ms,directed
M1,M2,1,false
M2,M3,1,false
M3,M4,1,false
M4,M5,1,false
M1,M3,1,false
F1,M1,1,false
F2,M2,1,false
F3,M4,1,false
"""

CORE_DECOMP_NODES = """\
name,class,fitness,uptime,bandwidth
M1,miner,1.0,1.0,100.0
M2,miner,1.0,1.0,100.0
M3,miner,1.0,1.0,100.0
M4,miner,1.0,1.0,100.0
M5,miner,1.0,1.0,100.0
F1,full,0.1,0.9,10.0
F2,full,0.1,0.9,10.0
F3,full,0.1,0.9,10.0
"""

# K6 miner clique with six pendant full nodes (two share the M1 anchor)
CLIQUE_PERIPHERY_EDGES = """\
src,dst,latency_ms,directed
M1,M2,10,false
M1,M3,10,false
M1,M4,10,false
M1,M5,10,false
M1,M6,10,false
M2,M3,10,false
M2,M4,10,false
M2,M5,10,false
M2,M6,10,false
M3,M4,10,false
M3,M5,10,false
M3,M6,10,false
M4,M5,10,false
M4,M6,10,false
M5,M6,10,false
F1,M1,200,false
F2,M1,200,false
F3,M2,200,false
F4,M4,200,false
F5,M5,200,false
F6,M6,200,false
"""

CLIQUE_PERIPHERY_NODES = """\
name,class,fitness,uptime,bandwidth
M1,miner,0.9,1.0,100.0
M2,miner,0.9,1.0,100.0
M3,miner,0.9,1.0,100.0
M4,miner,0.9,1.0,100.0
M5,miner,0.9,1.0,100.0
M6,miner,0.9,1.0,100.0
F1,full,0.1,0.9,10.0
F2,full,0.1,0.9,10.0
F3,full,0.1,0.9,10.0
F4,full,0.1,0.9,10.0
F5,full,0.1,0.9,10.0
F6,full,0.1,0.9,10.0
"""

FIXTURE_FILES = {
    "btc_snapshot.mat": BTC_SNAPSHOT,
    "bsv_snapshot.mat": BSV_SNAPSHOT,
    "weighted_relay.csv": WEIGHTED_RELAY_EDGES,
    "weighted_relay.nodes.csv": WEIGHTED_RELAY_NODES,
    "core_decomposition.csv": CORE_DECOMP_EDGES,
    "core_decomposition.nodes.csv": CORE_DECOMP_NODES,
    "clique_periphery.csv": CLIQUE_PERIPHERY_EDGES,
    "clique_periphery.nodes.csv": CLIQUE_PERIPHERY_NODES,
}


def write_fixtures(directory: str | Path) -> list[str]:
    """Materialize the golden fixture files; returns the written paths."""
    directory = Path(directory)
    written = []
    for name, content in FIXTURE_FILES.items():
        atomic_write(directory / name, content)
        written.append(str(directory / name))
    return written


# ---- experiment report ---------------------------------------------------------


def merge_reports(directory: str | Path) -> dict:
    """Fold every .json artifact in a directory into one report document."""
    directory = Path(directory)
    sections: dict[str, Any] = {}
    for path in sorted(directory.glob("*.json")):
        try:
            sections[path.stem] = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON artifact {path.name}: {exc}") from None
    return {
        "schema_version": 1,
        "sections": sections,
        "section_hashes": {
            name: config_hash(doc) for name, doc in sections.items()
        },
    }
