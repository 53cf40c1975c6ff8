"""Graph input parsing and export formats.

The input format is plain structured text: a ``vertices:`` line fixing the
letter order, then one ``edge:`` line per edge. Exports (GraphML, DOT, JSON)
write nodes and edges in canonical order so identical inputs produce
byte-identical files regardless of thread count.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from . import __version__
from .graphdef import DefiningGraph, GraphError, require_valid, validate_defining_graph
from .rips import DIVERGENCE_KIND, HorosphereGraph
from .words import Word


class ParseError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def parse_graph_text(text: str, path: str = "<string>") -> DefiningGraph:
    names: list[str] | None = None
    edges: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vertices:"):
            if names is not None:
                raise ParseError(path, lineno, "duplicate vertices line")
            names = line[len("vertices:") :].split()
            if not names:
                raise ParseError(path, lineno, "empty vertex list")
        elif line.startswith("edge:"):
            parts = line[len("edge:") :].split()
            if len(parts) != 2:
                raise ParseError(path, lineno, f"edge needs two vertex names, got {parts}")
            edges.append((parts[0], parts[1]))
        else:
            raise ParseError(path, lineno, f"unrecognized line {line!r}")
    if names is None:
        raise ParseError(path, 0, "missing vertices line")
    try:
        return DefiningGraph.from_edges(names, edges)
    except GraphError as exc:
        raise ParseError(path, 0, str(exc)) from None


def parse_graph_file(path: str) -> DefiningGraph:
    """Parse and validate a defining graph; the vertex order in the file is
    the alphabet order."""
    with open(path, "r", encoding="utf-8") as fh:
        g = parse_graph_text(fh.read(), path)
    require_valid(g)
    return g


def graph_hash(g: DefiningGraph) -> str:
    return hashlib.sha256(g.canonical_text().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ExportBundle:
    """Graph payload plus everything needed to regenerate it bit-identically."""

    h: HorosphereGraph

    def metadata(self) -> dict[str, str]:
        h = self.h
        g = h.graph
        return {
            "tool": f"horoforge {__version__}",
            "kind": h.kind,
            "graph_hash": graph_hash(g),
            "ray": f"{g.names[h.ray.i]},{g.names[h.ray.j]}",
            "busemann": str(h.k),
            "max_suffix_len": str(h.max_suffix_len),
        }


def _node_key(g: DefiningGraph, w: Word) -> str:
    return ".".join(g.names[a] for a in w)


def write_graphml(h: HorosphereGraph, path: str) -> None:
    """GraphML with per-node suffix attributes, in deterministic order."""
    g = h.graph
    meta = ExportBundle(h).metadata()
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns"',
        '         xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"',
        '         xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns'
        ' http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
        '  <key id="d0" for="node" attr.name="suffix" attr.type="string"/>',
        '  <key id="d1" for="node" attr.name="suffix_length" attr.type="int"/>',
        '  <key id="d2" for="node" attr.name="slots" attr.type="string"/>',
        '  <key id="d3" for="graph" attr.name="metadata" attr.type="string"/>',
        '  <graph id="horosphere" edgedefault="undirected">',
        "    <data key=\"d3\">" + escape(json.dumps(meta, sort_keys=True)) + "</data>",
    ]
    slots = h.meta.get("slots", {})
    for idx, w in enumerate(h.vertices):
        label = _node_key(g, w)
        lines.append(f"    <node id={quoteattr(f'n{idx}')}>")
        lines.append(f"      <data key=\"d0\">{escape(label)}</data>")
        lines.append(f"      <data key=\"d1\">{len(w)}</data>")
        if w in slots:
            lines.append(f"      <data key=\"d2\">{escape(slots[w])}</data>")
        lines.append("    </node>")
    for eidx, (i, j) in enumerate(h.edges):
        lines.append(
            f"    <edge id={quoteattr(f'e{eidx}')} source={quoteattr(f'n{i}')} target={quoteattr(f'n{j}')}/>"
        )
    lines.append("  </graph>")
    lines.append("</graphml>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_dot(h: HorosphereGraph, path: str) -> None:
    g = h.graph
    name = "divergence" if h.kind == DIVERGENCE_KIND else "rips2"
    lines = [f"graph {name} {{"]
    for idx, w in enumerate(h.vertices):
        lines.append(f'  n{idx} [label="{_node_key(g, w)}"];')
    for i, j in h.edges:
        lines.append(f"  n{i} -- n{j};")
    lines.append("}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(h: HorosphereGraph, path: str) -> None:
    g = h.graph
    payload = {
        "metadata": ExportBundle(h).metadata(),
        "graph": {
            "vertices": list(g.names),
            "edges": sorted(sorted((g.names[a], g.names[b])) for e in g.edges for a, b in [sorted(e)]),
        },
        "nodes": [_node_key(g, w) for w in h.vertices],
        "edges": [[int(i), int(j)] for i, j in h.edges],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> HorosphereGraph:
    """Inverse of write_json, for round-trips and the stats subcommand."""
    from .rays import Ray

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    gspec = payload["graph"]
    g = DefiningGraph.from_edges(gspec["vertices"], [tuple(e) for e in gspec["edges"]])
    meta = payload["metadata"]
    ray_names = meta["ray"].split(",")
    ray = Ray(*g.letters_named(*ray_names))
    index = {n: i for i, n in enumerate(g.names)}

    def to_word(key: str) -> Word:
        if not key:
            return ()
        return tuple(index[p] for p in key.split("."))

    return HorosphereGraph(
        kind=meta["kind"],
        graph=g,
        ray=ray,
        k=int(meta["busemann"]),
        max_suffix_len=int(meta["max_suffix_len"]),
        vertices=tuple(to_word(k) for k in payload["nodes"]),
        edges=tuple((int(i), int(j)) for i, j in payload["edges"]),
    )


def write_distortion_csv(metrics, path: str) -> None:
    """Distortion rows plus the growth sequence, one CSV."""
    names = metrics.graph.names if metrics.graph is not None else None

    def label(w):
        if names is None:
            return ".".join(map(str, w))
        return ".".join(names[a] for a in w)

    lines = ["section,u,v,cayley_distance,graph_distance"]
    for u, v, d, dh in metrics.distortion.rows:
        lines.append(f"distortion,{label(u)},{label(v)},{d},{dh}")
    for r, count in enumerate(metrics.growth):
        lines.append(f"growth,{r},,{count},")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def validation_report_text(g: DefiningGraph) -> tuple[bool, str]:
    report = validate_defining_graph(g)
    return report.ok, report.summary()
