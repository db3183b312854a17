"""Addressing algebra, wavelength model and the topology graph.

Every fabric in this package (classical, the two intermediate stages and the
modular one) is a :class:`FabricTopology`: a frozen bag of nodes and fiber
edges. Addresses are integer tuples; the concatenated digit labels used in
drawings (``"1002"``) are produced only by :func:`format_label`.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping


class AddressError(ValueError):
    """An address component is outside the range of its network."""


class Side(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class NodeKind(str, enum.Enum):
    INPUT_WSS = "input_wss"
    OUTPUT_WSS = "output_wss"
    INPUT_COUPLER = "input_coupler"
    OXC_MODULE = "oxc_module"
    EXTERNAL_PORT = "external_port"


class Stage(str, enum.Enum):
    CLASSICAL = "classical"
    PRIME = "prime"
    DOUBLE_PRIME = "double_prime"
    MODULAR = "modular"


class EdgeRole(str, enum.Enum):
    EXTERNAL = "external"  # OXC port <-> first/last device
    STAGE = "stage"  # device-to-device cable
    INTERNAL = "internal"  # inside an unsealed OXC module


@dataclass(frozen=True)
class FabricParams:
    """Port count ``N = n * r`` and wavelength count ``w``."""

    N: int
    n: int
    r: int
    w: int = 1

    def __post_init__(self) -> None:
        for name in ("N", "n", "r", "w"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.N != self.n * self.r:
            raise ValueError(f"N={self.N} is not n*r={self.n}*{self.r}")

    @classmethod
    def from_factors(cls, n: int, r: int, w: int = 1) -> FabricParams:
        return cls(n * r, n, r, w)

    @classmethod
    def classical(cls, N: int, w: int = 1) -> FabricParams:
        # no factorization: one period of width N
        return cls(N, 1, N, w)

    def check_wavelength(self, index: int) -> int:
        if not 0 <= index < self.w:
            raise AddressError(f"wavelength index {index} outside [0, {self.w - 1}]")
        return index

    def check_port(self, p: int) -> int:
        if not 0 <= p < self.N:
            raise AddressError(f"port {p} outside [0, {self.N - 1}]")
        return p


@dataclass(frozen=True, order=True)
class Wavelength:
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise AddressError(f"negative wavelength index {self.index}")


def split_address(p: int, r: int, N: int | None = None) -> tuple[int, int]:
    """Split flat index ``p`` into ``(a, p')`` with ``p = a*r + p'``."""
    if r < 1:
        raise ValueError(f"inner factor must be positive, got {r}")
    if p < 0 or (N is not None and p >= N):
        raise AddressError(f"address {p} out of range for N={N}")
    return divmod(p, r)


def flatten_address(a: int, p_prime: int, r: int, n: int | None = None) -> int:
    """Inverse of :func:`split_address`."""
    if not 0 <= p_prime < r:
        raise AddressError(f"sub-address {p_prime} outside [0, {r - 1}]")
    if a < 0 or (n is not None and a >= n):
        raise AddressError(f"period {a} out of range for n={n}")
    return a * r + p_prime


def swap_halves(address: tuple[int, ...]) -> tuple[int, ...]:
    """Exchange the two sub-addresses of an even-length address tuple."""
    if len(address) % 2:
        raise ValueError(f"address {address} has no two equal halves")
    half = len(address) // 2
    return address[half:] + address[:half]


@dataclass(frozen=True, order=True)
class GroupPortAddress:
    group: int
    port: int
    side: Side = Side.INPUT

    def swap(self) -> GroupPortAddress:
        other = Side.OUTPUT if self.side is Side.INPUT else Side.INPUT
        return GroupPortAddress(self.port, self.group, other)

    def check(self, N: int) -> GroupPortAddress:
        if not (0 <= self.group < N and 0 <= self.port < N):
            raise AddressError(f"{self} out of range for N={N}")
        return self

    @property
    def digits(self) -> tuple[int, int]:
        return (self.group, self.port)


@dataclass(frozen=True, order=True)
class ModularAddress:
    """Four-part label ``(a, p', b, q')`` of a modular shuffle endpoint."""

    a: int
    p_prime: int
    b: int
    q_prime: int
    side: Side = Side.INPUT

    def inverse(self) -> ModularAddress:
        other = Side.OUTPUT if self.side is Side.INPUT else Side.INPUT
        return ModularAddress(self.b, self.q_prime, self.a, self.p_prime, other)

    def check(self, n: int, r: int) -> ModularAddress:
        if not (0 <= self.a < n and 0 <= self.b < n):
            raise AddressError(f"{self} period out of range for n={n}")
        if not (0 <= self.p_prime < r and 0 <= self.q_prime < r):
            raise AddressError(f"{self} sub-address out of range for r={r}")
        return self

    def flatten(self, r: int) -> GroupPortAddress:
        return GroupPortAddress(
            flatten_address(self.a, self.p_prime, r),
            flatten_address(self.b, self.q_prime, r),
            self.side,
        )

    @classmethod
    def split(cls, address: GroupPortAddress, r: int) -> ModularAddress:
        a, p_prime = split_address(address.group, r)
        b, q_prime = split_address(address.port, r)
        return cls(a, p_prime, b, q_prime, address.side)

    @property
    def digits(self) -> tuple[int, int, int, int]:
        return (self.a, self.p_prime, self.b, self.q_prime)


def format_label(digits: tuple[int, ...], compact: bool | None = None) -> str:
    """Render an address tuple as ``"1002"`` or ``"(1,0,0,12)"``.

    The digit-string form is used only when every component is a single
    decimal digit (or when ``compact`` forces it on/off).
    """
    if compact is None:
        compact = all(0 <= d <= 9 for d in digits)
    if compact:
        return "".join(str(d) for d in digits)
    return "(" + ",".join(str(d) for d in digits) + ")"


@dataclass(frozen=True, order=True)
class NodeId:
    """Identity of a topology node.

    ``label`` is the address of the device: ``(p,)`` for a classical WSS,
    ``(a, p')`` for an input-stage WSS of the factorized fabrics,
    ``(a, p', b)`` for a cascaded ``1 x r`` WSS, ``(a, b)`` for an OXC module
    and ``(p,)`` for an external port (with ``side`` set).
    """

    kind: NodeKind
    label: tuple[int, ...]
    side: Side | None = None

    @property
    def key(self) -> str:
        prefix = {
            NodeKind.INPUT_WSS: "iw",
            NodeKind.OUTPUT_WSS: "ow",
            NodeKind.INPUT_COUPLER: "ic",
            NodeKind.OXC_MODULE: "Q",
            NodeKind.EXTERNAL_PORT: "in" if self.side is Side.INPUT else "out",
        }[self.kind]
        return prefix + "[" + ",".join(str(d) for d in self.label) + "]"

    @classmethod
    def from_key(cls, key: str) -> NodeId:
        prefix, _, rest = key.partition("[")
        label = tuple(int(x) for x in rest.rstrip("]").split(",") if x != "")
        kinds = {
            "iw": (NodeKind.INPUT_WSS, None),
            "ow": (NodeKind.OUTPUT_WSS, None),
            "ic": (NodeKind.INPUT_COUPLER, None),
            "Q": (NodeKind.OXC_MODULE, None),
            "in": (NodeKind.EXTERNAL_PORT, Side.INPUT),
            "out": (NodeKind.EXTERNAL_PORT, Side.OUTPUT),
        }
        if prefix not in kinds:
            raise ValueError(f"unknown node key {key!r}")
        kind, side = kinds[prefix]
        return cls(kind, label, side)

    def __str__(self) -> str:
        return self.key


def external_input(p: int) -> NodeId:
    return NodeId(NodeKind.EXTERNAL_PORT, (p,), Side.INPUT)


def external_output(q: int) -> NodeId:
    return NodeId(NodeKind.EXTERNAL_PORT, (q,), Side.OUTPUT)


def module_index(a: int, b: int, n: int) -> int:
    """Vertical position ``k = a*n + b`` of module/sub-network ``(a, b)``."""
    return a * n + b


@dataclass(frozen=True)
class Node:
    id: NodeId
    fan_in: int
    fan_out: int
    parent: tuple[int, int] | None = None  # owning OXC module when unsealed


@dataclass(frozen=True)
class FiberEdge:
    id: str
    src: NodeId
    src_port: int
    dst: NodeId
    dst_port: int
    role: EdgeRole = EdgeRole.STAGE
    tag: tuple[tuple[int, ...], tuple[int, ...]] | None = None


def edge_id(src: NodeId, src_port: int) -> str:
    # an output port holds at most one fiber, so it names the fiber
    return f"{src.key}.{src_port}"


@dataclass(frozen=True)
class Violation:
    subject: str
    invariant: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.subject}: {self.invariant}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class FabricTopology:
    params: FabricParams
    stage: Stage
    nodes: Mapping[NodeId, Node]
    edges: Mapping[str, FiberEdge]
    sealed: bool = False
    coupler_input: bool = False
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    @cached_property
    def out_index(self) -> dict[tuple[NodeId, int], FiberEdge]:
        return {(e.src, e.src_port): e for e in self.edges.values()}

    @cached_property
    def in_index(self) -> dict[tuple[NodeId, int], FiberEdge]:
        return {(e.dst, e.dst_port): e for e in self.edges.values()}

    def out_edge(self, node: NodeId, port: int) -> FiberEdge | None:
        return self.out_index.get((node, port))

    def edges_by_role(self, role: EdgeRole) -> list[FiberEdge]:
        return [e for e in self.edges.values() if e.role is role]

    @property
    def stage_fiber_count(self) -> int:
        return len(self.edges_by_role(EdgeRole.STAGE))

    @property
    def internal_fiber_count(self) -> int:
        return len(self.edges_by_role(EdgeRole.INTERNAL))

    def module_members(self, a: int, b: int) -> list[NodeId]:
        return sorted(nid for nid, node in self.nodes.items() if node.parent == (a, b))

    def census(self) -> Counter:
        """Count nodes by ``(kind, fan_in, fan_out)`` for top-level nodes."""
        return Counter(
            (node.id.kind, node.fan_in, node.fan_out)
            for node in self.nodes.values()
            if node.parent is None
        )

    def replace_edges(self, edges: Mapping[str, FiberEdge]) -> FabricTopology:
        return FabricTopology(
            self.params, self.stage, dict(self.nodes), dict(edges),
            self.sealed, self.coupler_input, dict(self.meta),
        )


def _expected_stage_fibers(t: FabricTopology) -> int:
    N, n = t.params.N, t.params.n
    return {
        Stage.CLASSICAL: N * N,
        Stage.PRIME: N * N,
        Stage.DOUBLE_PRIME: N * N + 2 * N * n,
        Stage.MODULAR: 2 * N * n,
    }[t.stage]


def validate_topology(t: FabricTopology) -> list[Violation]:
    """Return every broken topology invariant; empty means valid."""
    out: list[Violation] = []
    params = t.params

    for key, node in t.nodes.items():
        if key != node.id:
            out.append(Violation(str(key), "node keyed under a different id", str(node.id)))
        if node.id.kind is NodeKind.OXC_MODULE:
            a, b = node.id.label
            k = module_index(a, b, params.n)
            if not (0 <= a < params.n and 0 <= b < params.n and 0 <= k < params.n ** 2):
                out.append(Violation(node.id.key, "module label outside n x n grid"))

    seen_out: dict[tuple[NodeId, int], str] = {}
    seen_in: dict[tuple[NodeId, int], str] = {}
    for eid, e in t.edges.items():
        if eid != e.id:
            out.append(Violation(eid, "edge keyed under a different id", e.id))
        src, dst = t.nodes.get(e.src), t.nodes.get(e.dst)
        if src is None:
            out.append(Violation(e.id, "dangling source endpoint", e.src.key))
        elif not 0 <= e.src_port < src.fan_out:
            out.append(Violation(e.id, "source port outside node degree",
                                 f"{e.src_port} >= {src.fan_out}"))
        if dst is None:
            out.append(Violation(e.id, "dangling destination endpoint", e.dst.key))
        elif not 0 <= e.dst_port < dst.fan_in:
            out.append(Violation(e.id, "destination port outside node degree",
                                 f"{e.dst_port} >= {dst.fan_in}"))
        if (e.src, e.src_port) in seen_out:
            out.append(Violation(e.id, "output port carries two fibers",
                                 seen_out[(e.src, e.src_port)]))
        if (e.dst, e.dst_port) in seen_in:
            out.append(Violation(e.id, "input port carries two fibers",
                                 seen_in[(e.dst, e.dst_port)]))
        seen_out[(e.src, e.src_port)] = e.id
        seen_in[(e.dst, e.dst_port)] = e.id

    for p in range(params.N):
        for port, side in ((external_input(p), "input"), (external_output(p), "output")):
            if port not in t.nodes:
                out.append(Violation(port.key, f"missing external {side} port"))
                continue
            attached = [e for e in t.edges.values() if port in (e.src, e.dst)]
            if len(attached) != 1:
                out.append(Violation(port.key, f"external {side} port must have exactly one fiber",
                                     f"found {len(attached)}"))
    ports = [nid for nid in t.nodes if nid.kind is NodeKind.EXTERNAL_PORT]
    if len(ports) != 2 * params.N:
        out.append(Violation("topology", "external port count", f"{len(ports)} != {2 * params.N}"))

    expected = _expected_stage_fibers(t)
    if t.stage_fiber_count != expected:
        out.append(Violation("topology", "stage fiber count",
                             f"{t.stage_fiber_count} != {expected}"))
    if t.stage is Stage.MODULAR and not t.sealed and t.internal_fiber_count != params.N ** 2:
        out.append(Violation("topology", "internal module fiber count",
                             f"{t.internal_fiber_count} != {params.N ** 2}"))
    return out
