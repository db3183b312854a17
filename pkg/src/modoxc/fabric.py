"""Classical OXC builder and the three-phase modularization pipeline.

``build_classical`` gives ``Q(N, w)``. ``phase1_substitute`` swaps its shuffle
for the modular shuffle (``Q'``), ``phase2_decompose`` splits each large WSS
into a ``1 x n`` WSS cascaded with ``n`` ``1 x r`` WSSs (``Q''``) and
``phase3_merge`` folds every sub-shuffle with its small WSSs into an
``r x r`` OXC module (``Q^``). Each phase reads the previous topology's
edges, so a fault injected at one stage is carried into the next.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import (
    EdgeRole,
    FabricParams,
    FabricTopology,
    FiberEdge,
    Node,
    NodeId,
    NodeKind,
    Stage,
    edge_id,
    external_input,
    external_output,
)
from .shuffle import build_modular_shuffle, build_shuffle


class StageError(ValueError):
    """A pipeline phase was handed a topology of the wrong stage."""


def _edge(src: NodeId, src_port: int, dst: NodeId, dst_port: int,
          role: EdgeRole = EdgeRole.STAGE, tag=None) -> FiberEdge:
    return FiberEdge(edge_id(src, src_port), src, src_port, dst, dst_port, role, tag)


def _collect(nodes: Iterable[Node]) -> dict[NodeId, Node]:
    return {node.id: node for node in sorted(nodes, key=lambda nd: nd.id)}


def _external_nodes(N: int) -> list[Node]:
    return ([Node(external_input(p), 0, 1) for p in range(N)]
            + [Node(external_output(q), 1, 0) for q in range(N)])


def _sorted_edges(edges: Iterable[FiberEdge]) -> dict[str, FiberEdge]:
    return {e.id: e for e in sorted(edges, key=lambda e: (e.src, e.src_port))}


def input_device(label: tuple[int, ...], coupler: bool = False) -> NodeId:
    return NodeId(NodeKind.INPUT_COUPLER if coupler else NodeKind.INPUT_WSS, label)


def output_device(label: tuple[int, ...]) -> NodeId:
    return NodeId(NodeKind.OUTPUT_WSS, label)


def module_node(a: int, b: int) -> NodeId:
    return NodeId(NodeKind.OXC_MODULE, (a, b))


def build_classical(N: int, w: int = 1) -> FabricTopology:
    params = FabricParams.classical(N, w)
    shuffle = build_shuffle(N)
    nodes = _external_nodes(N)
    nodes += [Node(input_device((p,)), 1, N) for p in range(N)]
    nodes += [Node(output_device((q,)), N, 1) for q in range(N)]
    edges = []
    for p in range(N):
        edges.append(_edge(external_input(p), 0, input_device((p,)), 0, EdgeRole.EXTERNAL))
        edges.append(_edge(output_device((p,)), 0, external_output(p), 0, EdgeRole.EXTERNAL))
    # q-th output of input WSS p -> p-th input of output WSS q
    for (p, q), (q2, p2) in shuffle.fibers.items():
        edges.append(_edge(input_device((p,)), q, output_device((q2,)), p2,
                           tag=((p, q), (q2, p2))))
    return FabricTopology(params, Stage.CLASSICAL, _collect(nodes), _sorted_edges(edges))


def phase1_substitute(N: int, n: int, r: int, w: int = 1) -> FabricTopology:
    """Classical OXC with ``S(N)`` replaced by the modular shuffle (``Q'``)."""
    params = FabricParams(N, n, r, w)
    shuffle = build_modular_shuffle(n, r)
    nodes = _external_nodes(N)
    nodes += [Node(input_device(divmod(p, r)), 1, N) for p in range(N)]
    nodes += [Node(output_device(divmod(q, r)), N, 1) for q in range(N)]
    edges = []
    for p in range(N):
        edges.append(_edge(external_input(p), 0, input_device(divmod(p, r)), 0,
                           EdgeRole.EXTERNAL))
        edges.append(_edge(output_device(divmod(p, r)), 0, external_output(p), 0,
                           EdgeRole.EXTERNAL))
    for src, dst in shuffle.connections().items():
        if dst is None:
            continue
        a, p_prime, b, q_prime = src
        b2, q2, a2, p2 = dst
        edges.append(_edge(input_device((a, p_prime)), b * r + q_prime,
                           output_device((b2, q2)), a2 * r + p2, tag=(src, dst)))
    return FabricTopology(params, Stage.PRIME, _collect(nodes), _sorted_edges(edges))


def phase2_decompose(t: FabricTopology, coupler_input: bool = False) -> FabricTopology:
    """Replace each ``1 x N`` WSS by a ``1 x n`` device feeding ``n`` ``1 x r``
    WSSs, and mirror the construction on the output side (``Q''``).

    With ``coupler_input`` the ``1 x n`` devices are broadcast couplers.
    """
    if t.stage is not Stage.PRIME:
        raise StageError(f"phase 2 expects a {Stage.PRIME.value} topology, got {t.stage.value}")
    params = t.params
    n, r = params.n, params.r
    nodes = _external_nodes(params.N)
    for a, p_prime in itertools.product(range(n), range(r)):
        nodes.append(Node(input_device((a, p_prime), coupler_input), 1, n))
        nodes.append(Node(output_device((a, p_prime)), n, 1))
        for b in range(n):
            nodes.append(Node(input_device((a, p_prime, b)), 1, r))
            nodes.append(Node(output_device((a, p_prime, b)), r, 1))

    edges = []
    for e in t.edges.values():
        if e.role is EdgeRole.EXTERNAL and e.src.kind is NodeKind.EXTERNAL_PORT:
            edges.append(_edge(e.src, e.src_port, input_device(e.dst.label, coupler_input),
                               e.dst_port, EdgeRole.EXTERNAL))
        elif e.role is EdgeRole.EXTERNAL:
            edges.append(_edge(output_device(e.src.label), e.src_port, e.dst, e.dst_port,
                               EdgeRole.EXTERNAL))
        else:
            # cascade output port b*r+q' is port q' of 1xr WSS (a, p', b)
            b, q_prime = divmod(e.src_port, r)
            a, p_prime = divmod(e.dst_port, r)
            edges.append(_edge(input_device(e.src.label + (b,)), q_prime,
                               output_device(e.dst.label + (a,)), p_prime, tag=e.tag))
    for a, p_prime, b in itertools.product(range(n), range(r), range(n)):
        edges.append(_edge(input_device((a, p_prime), coupler_input), b,
                           input_device((a, p_prime, b)), 0))
        edges.append(_edge(output_device((a, p_prime, b)), 0,
                           output_device((a, p_prime)), b))
    return FabricTopology(params, Stage.DOUBLE_PRIME, _collect(nodes), _sorted_edges(edges),
                          coupler_input=coupler_input)


def phase3_merge(t: FabricTopology, sealed: bool = False) -> FabricTopology:
    """Merge each ``S_ab(r)`` with WSSs ``(a, *, b)`` and ``(b, *, a)`` into
    OXC module ``Q_ab(r)``.

    Unsealed modules keep their inner WSSs (``parent`` set) and fibers
    (role ``INTERNAL``); sealed ones are opaque per-wavelength crossbars.
    """
    if t.stage is not Stage.DOUBLE_PRIME:
        raise StageError(
            f"phase 3 expects a {Stage.DOUBLE_PRIME.value} topology, got {t.stage.value}")
    params = t.params
    n, r = params.n, params.r
    nodes = []
    for nid, node in t.nodes.items():
        if len(nid.label) == 3:
            if sealed:
                continue
            a, _, b = nid.label
            owner = (a, b) if nid.kind is NodeKind.INPUT_WSS else (b, a)
            nodes.append(Node(nid, node.fan_in, node.fan_out, parent=owner))
        else:
            nodes.append(node)
    nodes += [Node(module_node(a, b), r, r) for a, b in itertools.product(range(n), repeat=2)]

    edges = []
    for e in t.edges.values():
        src_inner = e.src.kind is NodeKind.INPUT_WSS and len(e.src.label) == 3
        dst_inner = e.dst.kind is NodeKind.OUTPUT_WSS and len(e.dst.label) == 3
        if src_inner and dst_inner:
            a, _, b = e.src.label
            b2, _, a2 = e.dst.label
            if (a, b) != (a2, b2):
                raise ValueError(f"fiber {e.id} crosses from sub-network {(a, b)} to {(a2, b2)}")
            if not sealed:
                edges.append(FiberEdge(e.id, e.src, e.src_port, e.dst, e.dst_port,
                                       EdgeRole.INTERNAL, e.tag))
        elif len(e.dst.label) == 3 and e.dst.kind is NodeKind.INPUT_WSS:
            a, p_prime, b = e.dst.label
            edges.append(_edge(e.src, e.src_port, module_node(a, b), p_prime))
        elif len(e.src.label) == 3 and e.src.kind is NodeKind.OUTPUT_WSS:
            b, q_prime, a = e.src.label
            edges.append(_edge(module_node(a, b), q_prime, e.dst, e.dst_port))
        else:
            edges.append(e)
    return FabricTopology(params, Stage.MODULAR, _collect(nodes), _sorted_edges(edges),
                          sealed=sealed, coupler_input=t.coupler_input)


def build_modular(n: int, r: int, w: int = 1, sealed: bool = False,
                  coupler_input: bool = False) -> FabricTopology:
    prime = phase1_substitute(n * r, n, r, w)
    return phase3_merge(phase2_decompose(prime, coupler_input), sealed)


def build_stage(stage: Stage, n: int, r: int, w: int = 1, sealed: bool = False,
                coupler_input: bool = False) -> FabricTopology:
    if stage is Stage.CLASSICAL:
        return build_classical(n * r, w)
    prime = phase1_substitute(n * r, n, r, w)
    if stage is Stage.PRIME:
        return prime
    double = phase2_decompose(prime, coupler_input)
    if stage is Stage.DOUBLE_PRIME:
        return double
    return phase3_merge(double, sealed)


def module_entry(t: FabricTopology, module: NodeId, port: int) -> NodeId | None:
    """Inner ``1 x r`` WSS behind input ``port`` of an unsealed module."""
    a, b = module.label
    inner = NodeId(NodeKind.INPUT_WSS, (a, port, b))
    return inner if inner in t.nodes else None


def module_exit(t: FabricTopology, inner: NodeId) -> tuple[NodeId, int] | None:
    """Module and output port fed by inner ``r x 1`` WSS ``(b, q', a)``."""
    node = t.nodes.get(inner)
    if node is None or node.parent is None or inner.kind is not NodeKind.OUTPUT_WSS:
        return None
    b, q_prime, a = inner.label
    return module_node(*node.parent), q_prime


def path_count_matrix(t: FabricTopology) -> np.ndarray:
    """Count input-to-output path skeletons by exhaustive graph search.

    Every switching element is treated as able to connect any of its inputs
    to any of its outputs, so no address arithmetic is involved. Entry
    ``[p, q]`` is the number of distinct fiber paths from external input
    ``p`` to external output ``q``.
    """
    N = t.params.N
    counts = np.zeros((N, N), dtype=np.int64)
    out_edges: dict[NodeId, list[FiberEdge]] = {}
    for e in t.edges.values():
        out_edges.setdefault(e.src, []).append(e)

    def successors(e: FiberEdge) -> list[FiberEdge]:
        node = e.dst
        if node.kind is NodeKind.OXC_MODULE and not t.sealed:
            inner = module_entry(t, node, e.dst_port)
            return [] if inner is None else out_edges.get(inner, [])
        if e.role is EdgeRole.INTERNAL:
            exit_ = module_exit(t, node)
            if exit_ is None:
                return []
            nxt = t.out_edge(*exit_)
            return [] if nxt is None else [nxt]
        return out_edges.get(node, [])

    def walk(e: FiberEdge, depth: int) -> None:
        if depth > len(t.edges):
            raise RuntimeError("cycle in fabric topology")
        if e.dst.kind is NodeKind.EXTERNAL_PORT:
            counts[start, e.dst.label[0]] += 1
            return
        for nxt in successors(e):
            walk(nxt, depth + 1)

    for start in range(N):
        for e in out_edges.get(external_input(start), []):
            walk(e, 0)
    return counts


@dataclass
class WssNode:
    """Per-wavelength switching state of a ``1 x k`` or ``k x 1`` device.

    ``state[wavelength]`` maps a selected input port to its output port.
    Wavelengths never share entries, so setting one cannot affect another.
    """

    node: Node
    wavelengths: int
    state: dict[int, dict[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.node.fan_in != 1 and self.node.fan_out != 1:
            raise ValueError(f"{self.node.id} is {self.node.fan_in}x{self.node.fan_out}, "
                             "not a 1xk or kx1 WSS")

    def select(self, wavelength: int, in_port: int, out_port: int) -> None:
        if not 0 <= wavelength < self.wavelengths:
            raise ValueError(f"wavelength {wavelength} outside [0, {self.wavelengths - 1}]")
        if not (0 <= in_port < self.node.fan_in and 0 <= out_port < self.node.fan_out):
            raise ValueError(f"port pair ({in_port}, {out_port}) outside {self.node.id}")
        current = self.state.setdefault(wavelength, {})
        if in_port in current:
            raise ValueError(f"{self.node.id} input {in_port} already switched at {wavelength}")
        if out_port in current.values():
            raise ValueError(f"contention at {self.node.id} output {out_port} "
                             f"on wavelength {wavelength}")
        current[in_port] = out_port

    def release(self, wavelength: int, in_port: int) -> None:
        current = self.state.get(wavelength, {})
        current.pop(in_port)
        if not current:
            self.state.pop(wavelength, None)

    def output_of(self, wavelength: int, in_port: int = 0) -> int | None:
        return self.state.get(wavelength, {}).get(in_port)


def cascade_assignment(assignment: dict[int, int], n: int, r: int
                       ) -> tuple[dict[int, int], dict[int, dict[int, int]]]:
    """Split a ``1 x nr`` WSS setting ``{wavelength: output}`` into the
    ``1 x n`` first-stage setting and the per-branch ``1 x r`` settings."""
    first: dict[int, int] = {}
    second: dict[int, dict[int, int]] = {}
    for wavelength, out in assignment.items():
        if not 0 <= out < n * r:
            raise ValueError(f"output {out} outside a 1x{n * r} WSS")
        b, q_prime = divmod(out, r)
        first[wavelength] = b
        second.setdefault(b, {})[wavelength] = q_prime
    return first, second


def compose_cascade(first: dict[int, int], second: dict[int, dict[int, int]], r: int
                    ) -> dict[int, int]:
    """Switch relation realised by a cascade, as ``{wavelength: output}``."""
    out = {}
    for wavelength, b in first.items():
        q_prime = second.get(b, {}).get(wavelength)
        if q_prime is not None:
            out[wavelength] = b * r + q_prime
    return out
