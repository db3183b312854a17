"""Export documents, table rendering, DOT output and hop traces.

All output is deterministic: nodes and edges are emitted in sorted order
and JSON keys are sorted.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any

from .core import (
    EdgeRole,
    FabricParams,
    FabricTopology,
    FiberEdge,
    Node,
    NodeId,
    NodeKind,
    Side,
    Stage,
    format_label,
)
from .shuffle import ConnectivityTable, Flavor

SCHEMA_VERSION = 1


def export_document(t: FabricTopology, tables: dict[str, Any] | None = None,
                    reports: dict[str, Any] | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "schemaVersion": SCHEMA_VERSION,
        "fabric": {
            "N": t.params.N, "n": t.params.n, "r": t.params.r, "w": t.params.w,
            "stage": t.stage.value,
            "sealed": t.sealed,
            "couplerInput": t.coupler_input,
        },
        "nodes": [
            {
                "id": node.id.key,
                "kind": node.id.kind.value,
                "label": list(node.id.label),
                "side": node.id.side.value if node.id.side else None,
                "fanIn": node.fan_in,
                "fanOut": node.fan_out,
                "parent": list(node.parent) if node.parent else None,
            }
            for node in sorted(t.nodes.values(), key=lambda nd: nd.id)
        ],
        "edges": [
            {
                "id": e.id,
                "from": {"node": e.src.key, "port": e.src_port},
                "to": {"node": e.dst.key, "port": e.dst_port},
                "role": e.role.value,
                "tag": [list(e.tag[0]), list(e.tag[1])] if e.tag else None,
            }
            for e in sorted(t.edges.values(), key=lambda e: (e.src, e.src_port))
        ],
    }
    if tables:
        doc["tables"] = tables
    if reports:
        doc["reports"] = reports
    return doc


def import_document(doc: dict[str, Any]) -> FabricTopology:
    version = doc.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {version!r}")
    fab = doc["fabric"]
    params = FabricParams(fab["N"], fab["n"], fab["r"], fab["w"])
    nodes = {}
    for item in doc["nodes"]:
        nid = NodeId(NodeKind(item["kind"]), tuple(item["label"]),
                     Side(item["side"]) if item.get("side") else None)
        parent = tuple(item["parent"]) if item.get("parent") else None
        nodes[nid] = Node(nid, item["fanIn"], item["fanOut"], parent)
    edges = {}
    for item in doc["edges"]:
        tag = item.get("tag")
        edges[item["id"]] = FiberEdge(
            item["id"],
            NodeId.from_key(item["from"]["node"]), item["from"]["port"],
            NodeId.from_key(item["to"]["node"]), item["to"]["port"],
            EdgeRole(item["role"]),
            (tuple(tag[0]), tuple(tag[1])) if tag else None,
        )
    return FabricTopology(params, Stage(fab["stage"]), nodes, edges,
                          bool(fab.get("sealed")), bool(fab.get("couplerInput")))


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _table_compact(table: ConnectivityTable) -> bool:
    numbers = [x for (src, dst) in table.entries.values() for x in src + dst]
    return all(0 <= x <= 9 for x in numbers)


def _cell(entry: tuple[tuple[int, ...], tuple[int, ...]], compact: bool) -> str:
    src, dst = entry
    return f"{format_label(src, compact)}, {format_label(dst, compact)}"


def table_cells(table: ConnectivityTable) -> list[list[str]]:
    """Row-major cell strings, rows = input groups, columns = output groups."""
    compact = _table_compact(table)
    return [[_cell(table.entries[(row, col)], compact) for col in table.cols]
            for row in table.rows]


def render_table(table: ConnectivityTable, fmt: str = "pretty") -> str:
    compact = _table_compact(table)
    row_labels = [format_label(row, compact) for row in table.rows]
    col_labels = [format_label(col, compact) for col in table.cols]
    cells = table_cells(table)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row\\col"] + col_labels)
        for label, row in zip(row_labels, cells):
            writer.writerow([label] + row)
        return buf.getvalue()
    if fmt != "pretty":
        raise ValueError(f"unknown table format {fmt!r}")

    period = table.r if table.flavor is Flavor.FACTORIZED else table.size
    width = max(len(c) for row in cells for c in row + col_labels)
    head = max(len(x) for x in row_labels)

    def line(label: str, items: list[str]) -> str:
        parts = []
        for j, item in enumerate(items):
            if j and j % period == 0:
                parts.append("|")
            parts.append(item.center(width))
        return label.rjust(head) + " | " + " ".join(parts)

    header = line("", col_labels)
    rule = "-" * len(header)
    out = [header, rule]
    for i, (label, row) in enumerate(zip(row_labels, cells)):
        if i and i % period == 0:
            out.append(rule)
        out.append(line(label, row))
    return "\n".join(out) + "\n"


def device_name(t: FabricTopology, node: NodeId) -> str:
    info = t.nodes[node]
    label = format_label(node.label)
    if node.kind is NodeKind.OXC_MODULE:
        a, b = node.label
        return f"Q_{format_label((a, b))}({t.params.r})"
    if node.kind is NodeKind.INPUT_COUPLER:
        return f"1x{info.fan_out} OC {label}"
    if node.kind is NodeKind.INPUT_WSS:
        return f"1x{info.fan_out} WSS {label}"
    if node.kind is NodeKind.OUTPUT_WSS:
        return f"{info.fan_in}x1 WSS {label}"
    return node.key


def format_trace(t: FabricTopology, path, inner: bool = False) -> list[str]:
    """Hop-by-hop description of a routed path.

    Classical fabrics name the shuffle fiber ``f(pq,qp)``; the other stages
    list the input and output port used at every device.
    """
    devices = [h for h in path.hops if h.node.kind is not NodeKind.EXTERNAL_PORT]
    if t.stage is Stage.CLASSICAL:
        fiber = next(t.edges[eid] for eid in path.edges
                     if t.edges[eid].role is EdgeRole.STAGE)
        src, dst = fiber.tag
        return [
            f"Input of {device_name(t, devices[0].node)}",
            f"-> fiber f({format_label(src)},{format_label(dst)}) of S({t.params.N})",
            f"-> output of {device_name(t, devices[-1].node)}",
        ]
    inner_by_module: dict[NodeId, list] = {}
    for hop in path.inner_hops:
        owner = t.nodes[hop.node].parent
        inner_by_module.setdefault(NodeId(NodeKind.OXC_MODULE, owner), []).append(hop)
    lines = []
    for i, hop in enumerate(devices):
        name = device_name(t, hop.node)
        lines.append(f"Input of {name}" if i == 0 else f"-> input {hop.in_port} of {name}")
        if inner and hop.node in inner_by_module:
            for sub in inner_by_module[hop.node]:
                lines.append(f"   . {device_name(t, sub.node)} "
                             f"(in {sub.in_port}, out {sub.out_port})")
        if i == len(devices) - 1:
            lines.append(f"-> output of {name}")
        else:
            lines.append(f"-> output {hop.out_port} of {name}")
    return lines


_DOT_SHAPES = {
    NodeKind.EXTERNAL_PORT: "plaintext",
    NodeKind.INPUT_WSS: "box",
    NodeKind.OUTPUT_WSS: "box",
    NodeKind.INPUT_COUPLER: "triangle",
    NodeKind.OXC_MODULE: "box3d",
}


def render_dot(t: FabricTopology) -> str:
    """Graphviz digraph with stable node and edge order."""
    lines = [f'digraph "{t.stage.value}_N{t.params.N}_n{t.params.n}_r{t.params.r}" {{',
             "  rankdir=LR;"]
    clusters: dict[tuple[int, int], list[Node]] = {}
    top = []
    for node in sorted(t.nodes.values(), key=lambda nd: nd.id):
        (clusters.setdefault(node.parent, []) if node.parent else top).append(node)
    for node in top:
        label = device_name(t, node.id) if node.id.kind is not NodeKind.EXTERNAL_PORT \
            else node.id.key
        lines.append(f'  "{node.id.key}" [shape={_DOT_SHAPES[node.id.kind]}, label="{label}"];')
    for owner, members in sorted(clusters.items()):
        lines.append(f'  subgraph "cluster_Q{owner[0]}_{owner[1]}" {{')
        lines.append(f'    label="{format_label(owner)}";')
        for node in members:
            lines.append(f'    "{node.id.key}" [shape=box, label="{device_name(t, node.id)}"];')
        lines.append("  }")
    for e in sorted(t.edges.values(), key=lambda e: (e.src, e.src_port)):
        style = ", style=dashed" if e.role is EdgeRole.INTERNAL else ""
        lines.append(f'  "{e.src.key}" -> "{e.dst.key}" '
                     f'[taillabel="{e.src_port}", headlabel="{e.dst_port}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_request_line(line: str) -> tuple[Any, Any, int] | None:
    """Parse ``"p q lambda"`` or ``"(a,p') (b,q') lambda"``; ``None`` for
    blank and ``#`` comment lines."""
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    tokens = text.replace(", ", ",").split()
    if len(tokens) != 3:
        raise ValueError(f"expected 3 fields, got {len(tokens)}: {line.strip()!r}")

    def end(token: str):
        if token.startswith("("):
            parts = token.strip("()").split(",")
            if len(parts) != 2:
                raise ValueError(f"bad modular address {token!r}")
            return (int(parts[0]), int(parts[1]))
        return int(token)

    return end(tokens[0]), end(tokens[1]), int(tokens[2])
