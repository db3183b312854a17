"""Self-routing, wavelength occupancy and the nonblocking harness.

A path is fixed by its end addresses: every switching element picks its
output port from the destination alone and the physical fibers do the rest.
:func:`resolve_path` walks the actual edges of the topology, so a missing or
rewired fiber shows up as an unroutable or misrouted request rather than
being papered over by arithmetic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .core import (
    AddressError,
    EdgeRole,
    FabricTopology,
    NodeId,
    NodeKind,
    Stage,
    edge_id,
    external_input,
    external_output,
    flatten_address,
)
from .fabric import WssNode, module_entry, module_exit


class RoutingError(Exception):
    pass


class UnroutableError(RoutingError):
    def __init__(self, p: int, q: int, where: str):
        super().__init__(f"R({p},{q}) cannot be routed: {where}")
        self.p, self.q, self.where = p, q, where


class MisroutedError(RoutingError):
    def __init__(self, p: int, q: int, reached: NodeId, detail: str = ""):
        super().__init__(detail or f"R({p},{q}) self-routes to {reached.key} instead of output {q}")
        self.p, self.q, self.reached = p, q, reached


class WavelengthBusyAtEndpoint(RoutingError):
    """The requested wavelength is already used at the input or output."""


class InternalContention(RoutingError):
    """A fiber on the path already carries the wavelength.

    Never raised by a correctly built fabric when both endpoints are free.
    """

    def __init__(self, message: str, edge: str | None = None, holder: int | None = None):
        super().__init__(message)
        self.edge, self.holder = edge, holder


class UnknownConnection(RoutingError, KeyError):
    pass


class InvalidRequest(ValueError):
    pass


@dataclass(frozen=True)
class ConnectionRequest:
    """``R(p, q, lambda)``; ends may be flat indices or ``(a, p')`` pairs."""

    input: int | tuple[int, int]
    output: int | tuple[int, int]
    wavelength: int
    output_wavelength: int | None = None

    def resolve(self, fabric: FabricTopology) -> tuple[int, int, int]:
        params = fabric.params
        if self.output_wavelength is not None and self.output_wavelength != self.wavelength:
            raise InvalidRequest("wavelength conversion is not available: "
                                 f"{self.wavelength} -> {self.output_wavelength}")

        def flat(end: int | tuple[int, int]) -> int:
            if isinstance(end, tuple):
                return flatten_address(end[0], end[1], params.r, params.n)
            return params.check_port(end)

        return flat(self.input), flat(self.output), params.check_wavelength(self.wavelength)


@dataclass(frozen=True)
class Hop:
    node: NodeId
    in_port: int | None
    out_port: int | None


@dataclass(frozen=True)
class RoutedPath:
    p: int
    q: int
    wavelength: int
    hops: tuple[Hop, ...]
    edges: tuple[str, ...]
    inner_hops: tuple[Hop, ...] = ()
    inner_edges: tuple[str, ...] = ()
    broadcast_edges: tuple[str, ...] = ()

    @property
    def lit_edges(self) -> tuple[str, ...]:
        """Every fiber carrying the signal, broadcast branches included."""
        return self.edges + self.inner_edges + self.broadcast_edges


def _select_port(t: FabricTopology, node: NodeId, q: int) -> int:
    r = t.params.r
    b, q_prime = divmod(q, r)
    kind, label = node.kind, node.label
    if kind is NodeKind.OUTPUT_WSS:
        return 0
    if kind is NodeKind.INPUT_COUPLER:
        return b
    if kind is NodeKind.OXC_MODULE:
        return q_prime
    if kind is NodeKind.INPUT_WSS:
        if len(label) == 1:
            return q
        if len(label) == 3:
            return q_prime
        return q if t.stage is Stage.PRIME else b
    raise RoutingError(f"no switching rule for {node.key}")


def _expected_in_port(t: FabricTopology, node: NodeId, p: int) -> int:
    a, p_prime = divmod(p, t.params.r)
    kind, label = node.kind, node.label
    if kind is NodeKind.OXC_MODULE:
        return p_prime
    if kind is not NodeKind.OUTPUT_WSS:
        return 0
    if len(label) == 3:
        return p_prime
    if len(label) == 1 or t.stage is Stage.PRIME:
        return p
    return a


def _check_arrival(t: FabricTopology, node: NodeId, in_port: int, p: int, q: int) -> None:
    expected = _expected_in_port(t, node, p)
    if in_port != expected:
        raise MisroutedError(p, q, node, f"R({p},{q}) arrives at input {in_port} of "
                                         f"{node.key}; self-routing selects input {expected}")


def resolve_path(fabric: FabricTopology, req: ConnectionRequest) -> RoutedPath:
    """Self-route ``req`` through ``fabric``; occupancy is ignored."""
    p, q, wavelength = req.resolve(fabric)
    return _trace(fabric, p, q, wavelength)


def _trace(t: FabricTopology, p: int, q: int, wavelength: int) -> RoutedPath:
    hops = [Hop(external_input(p), None, 0)]
    edges: list[str] = []
    inner_hops: list[Hop] = []
    inner_edges: list[str] = []
    broadcast: list[str] = []
    node, port = external_input(p), 0
    for _ in range(len(t.edges) + 1):
        e = t.out_edge(node, port)
        if e is None:
            raise UnroutableError(p, q, f"no fiber at output {port} of {node.key}")
        edges.append(e.id)
        node, in_port = e.dst, e.dst_port
        if node not in t.nodes:
            raise UnroutableError(p, q, f"fiber {e.id} ends at missing node {node.key}")
        if node.kind is NodeKind.EXTERNAL_PORT:
            hops.append(Hop(node, 0, None))
            if node != external_output(q):
                raise MisroutedError(p, q, node)
            return RoutedPath(p, q, wavelength, tuple(hops), tuple(edges),
                              tuple(inner_hops), tuple(inner_edges), tuple(broadcast))
        _check_arrival(t, node, in_port, p, q)
        if node.kind is NodeKind.OXC_MODULE and not t.sealed:
            out_port = _cross_module(t, node, in_port, p, q, inner_hops, inner_edges)
        else:
            out_port = _select_port(t, node, q)
        if node.kind is NodeKind.INPUT_COUPLER:
            for other in range(t.nodes[node].fan_out):
                extra = t.out_edge(node, other)
                if other != out_port and extra is not None:
                    broadcast.append(extra.id)
        hops.append(Hop(node, in_port, out_port))
        port = out_port
    raise UnroutableError(p, q, "path does not terminate")


def _cross_module(t: FabricTopology, module: NodeId, in_port: int, p: int, q: int,
                  inner_hops: list[Hop], inner_edges: list[str]) -> int:
    q_prime = q % t.params.r
    inner = module_entry(t, module, in_port)
    if inner is None:
        raise UnroutableError(p, q, f"{module.key} has no inner WSS at input {in_port}")
    e = t.out_edge(inner, q_prime)
    if e is None or e.role is not EdgeRole.INTERNAL:
        raise UnroutableError(p, q, f"no internal fiber at output {q_prime} of {inner.key}")
    inner_hops.append(Hop(inner, 0, q_prime))
    inner_edges.append(e.id)
    exit_ = module_exit(t, e.dst)
    if exit_ is None or exit_[0] != module:
        raise UnroutableError(p, q, f"internal fiber {e.id} leaves {module.key}")
    _check_arrival(t, e.dst, e.dst_port, p, q)
    inner_hops.append(Hop(e.dst, e.dst_port, 0))
    return exit_[1]


_SWITCHING = (NodeKind.INPUT_WSS, NodeKind.OUTPUT_WSS, NodeKind.OXC_MODULE)


class WavelengthState:
    """Occupancy of every ``(fiber, wavelength)`` plus switch settings.

    One writer per instance. Paths are cached because the fabric is
    immutable.
    """

    def __init__(self, fabric: FabricTopology):
        self.fabric = fabric
        self.occupancy: dict[tuple[str, int], int] = {}
        self.connections: dict[int, RoutedPath] = {}
        self.switches: dict[NodeId, WssNode] = {}
        self.crossbars: dict[tuple[NodeId, int], dict[int, int]] = {}
        self._next_id = 0
        self._paths: dict[tuple[int, int, int], tuple[RoutedPath, tuple]] = {}
        self._input_edge = [edge_id(external_input(p), 0) for p in range(fabric.params.N)]
        self._output_edge = {
            q: fabric.in_index[(external_output(q), 0)].id
            for q in range(fabric.params.N)
            if (external_output(q), 0) in fabric.in_index
        }

    def path(self, p: int, q: int, wavelength: int) -> RoutedPath:
        return self._plan(p, q, wavelength)[0]

    def _plan(self, p: int, q: int, wavelength: int) -> tuple[RoutedPath, tuple]:
        plan = self._paths.get((p, q, wavelength))
        if plan is None:
            path = _trace(self.fabric, p, q, wavelength)
            steps = tuple(
                (hop.node, hop.in_port, hop.out_port, hop.node.kind is NodeKind.OXC_MODULE)
                for hop in path.hops + path.inner_hops
                if hop.node.kind in _SWITCHING
            )
            plan = self._paths[(p, q, wavelength)] = (path, steps)
        return plan

    def input_busy(self, p: int, wavelength: int) -> bool:
        return (self._input_edge[p], wavelength) in self.occupancy

    def output_busy(self, q: int, wavelength: int) -> bool:
        eid = self._output_edge.get(q)
        return eid is not None and (eid, wavelength) in self.occupancy

    def _switch(self, node: NodeId) -> WssNode:
        sw = self.switches.get(node)
        if sw is None:
            sw = self.switches[node] = WssNode(self.fabric.nodes[node], self.fabric.params.w)
        return sw

    def setup(self, req: ConnectionRequest) -> int:
        p, q, wavelength = req.resolve(self.fabric)
        if self.input_busy(p, wavelength):
            raise WavelengthBusyAtEndpoint(f"wavelength {wavelength} busy at input {p}")
        if self.output_busy(q, wavelength):
            raise WavelengthBusyAtEndpoint(f"wavelength {wavelength} busy at output {q}")
        path, steps = self._plan(p, q, wavelength)
        occupancy = self.occupancy
        for eid in path.lit_edges:
            holder = occupancy.get((eid, wavelength))
            if holder is not None:
                raise InternalContention(
                    f"R({p},{q},{wavelength}) collides with connection {holder} on {eid}",
                    eid, holder)
        for node, in_port, out_port, is_module in steps:
            if is_module:
                used = self.crossbars.get((node, wavelength), {})
            else:
                sw = self.switches.get(node)
                used = {} if sw is None else sw.state.get(wavelength, {})
            if in_port in used or out_port in used.values():
                raise InternalContention(
                    f"R({p},{q},{wavelength}) collides at {node.key}")

        cid = self._next_id
        self._next_id += 1
        for eid in path.lit_edges:
            occupancy[(eid, wavelength)] = cid
        for node, in_port, out_port, is_module in steps:
            if is_module:
                self.crossbars.setdefault((node, wavelength), {})[in_port] = out_port
            else:
                self._switch(node).select(wavelength, in_port, out_port)
        self.connections[cid] = path
        return cid

    def teardown(self, cid: int) -> RoutedPath:
        path = self.connections.pop(cid, None)
        if path is None:
            raise UnknownConnection(f"no active connection {cid}")
        wavelength = path.wavelength
        for eid in path.lit_edges:
            del self.occupancy[(eid, wavelength)]
        for node, in_port, _, is_module in self._plan(path.p, path.q, wavelength)[1]:
            if is_module:
                used = self.crossbars[(node, wavelength)]
                del used[in_port]
                if not used:
                    del self.crossbars[(node, wavelength)]
            else:
                sw = self.switches[node]
                sw.release(wavelength, in_port)
                if not sw.state:
                    del self.switches[node]
        return path

    def snapshot(self) -> tuple:
        """Canonical, hashable view of occupancy and switch settings."""
        return (
            tuple(sorted(self.occupancy.items())),
            tuple(sorted(
                (node.key, wl, tuple(sorted(m.items())))
                for node, sw in self.switches.items()
                for wl, m in sw.state.items()
            )),
            tuple(sorted(
                (node.key, wl, tuple(sorted(m.items())))
                for (node, wl), m in self.crossbars.items()
            )),
        )

    def occupancy_at(self, wavelength: int) -> dict[str, int]:
        return {eid: cid for (eid, wl), cid in self.occupancy.items() if wl == wavelength}

    def check_invariants(self) -> list[str]:
        problems = []
        expected: dict[tuple[str, int], int] = {}
        for cid, path in self.connections.items():
            for eid in path.lit_edges:
                key = (eid, path.wavelength)
                if key in expected:
                    problems.append(f"{eid} carries connections {expected[key]} and {cid} "
                                    f"at wavelength {path.wavelength}")
                expected[key] = cid
        if expected != self.occupancy:
            problems.append("occupancy differs from the union of active paths")
        for node, sw in self.switches.items():
            for wl, mapping in sw.state.items():
                if len(set(mapping.values())) != len(mapping):
                    problems.append(f"{node.key} merges two inputs at wavelength {wl}")
        return problems


@dataclass(frozen=True)
class Counterexample:
    wavelength: int
    kind: str  # unroutable, misrouted, shared-fiber, contention, endpoint
    request: tuple[int, int]
    context: tuple[tuple[int, int], ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        ctx = f" after {list(self.context)}" if self.context else ""
        return (f"[{self.kind}] R({self.request[0]},{self.request[1]},"
                f"{self.wavelength}){ctx}: {self.detail}")


@dataclass
class NonblockingReport:
    stage: str
    N: int
    w: int
    mode: str
    counterexamples: list[Counterexample] = field(default_factory=list)
    setups: int = 0
    partial_permutations: int = 0
    full_permutations: int = 0
    extreme_cases: int = 0
    orders_exhaustive: bool = False
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def summary(self) -> str:
        return (f"{self.stage} N={self.N} w={self.w} mode={self.mode}: "
                f"{len(self.counterexamples)} counterexamples "
                f"({self.setups} setups, {self.partial_permutations} partial and "
                f"{self.full_permutations} full permutations, "
                f"{self.extreme_cases} extreme cases)")


class _Harness:
    def __init__(self, fabric: FabricTopology, w: int, report: NonblockingReport,
                 limit: int):
        self.fabric = fabric
        self.N = fabric.params.N
        self.w = w
        self.report = report
        self.limit = limit
        self.bad_pairs: set[tuple[int, int]] = set()

    def record(self, cx: Counterexample) -> None:
        if len(self.report.counterexamples) < self.limit:
            self.report.counterexamples.append(cx)
        else:
            self.report.truncated = True

    @property
    def full(self) -> bool:
        return len(self.report.counterexamples) >= self.limit

    def try_setup(self, state: WavelengthState, p: int, q: int, wavelength: int,
                  context: list[tuple[int, int]]) -> int | None:
        self.report.setups += 1
        try:
            return state.setup(ConnectionRequest(p, q, wavelength))
        except InternalContention as exc:
            kind, detail = "contention", str(exc)
        except WavelengthBusyAtEndpoint as exc:
            kind, detail = "endpoint", str(exc)
        except MisroutedError as exc:
            kind, detail = "misrouted", str(exc)
        except UnroutableError as exc:
            kind, detail = "unroutable", str(exc)
        self.record(Counterexample(wavelength, kind, (p, q), tuple(context), detail))
        return None

    def sweep_routes(self) -> dict[tuple[int, int], RoutedPath]:
        paths = {}
        for p, q in itertools.product(range(self.N), repeat=2):
            try:
                path = _trace(self.fabric, p, q, 0)
            except MisroutedError as exc:
                self.bad_pairs.add((p, q))
                self.record(Counterexample(0, "misrouted", (p, q), (), str(exc)))
                continue
            except UnroutableError as exc:
                self.bad_pairs.add((p, q))
                self.record(Counterexample(0, "unroutable", (p, q), (), str(exc)))
                continue
            if path.hops[0].node != external_input(p):
                self.bad_pairs.add((p, q))
            paths[(p, q)] = path
        return paths

    def pairwise_disjoint(self, paths: dict[tuple[int, int], RoutedPath]) -> None:
        # fixed paths: a set of connections fits in every order iff pairwise disjoint
        items = sorted(paths.items())
        lit = {k: set(v.lit_edges) for k, v in items}
        for i, ((p, q), _) in enumerate(items):
            for (p2, q2), _ in items[i + 1:]:
                if p == p2 or q == q2:
                    continue
                shared = lit[(p, q)] & lit[(p2, q2)]
                if shared:
                    self.record(Counterexample(0, "shared-fiber", (p2, q2), ((p, q),),
                                               f"shares {sorted(shared)[0]}"))
                    if self.full:
                        return

    def background(self, state: WavelengthState, skip: int) -> None:
        """Load every other wavelength with a full permutation."""
        for wl in range(self.w):
            if wl == skip:
                continue
            for p in range(self.N):
                q = (p + wl + 1) % self.N
                if (p, q) not in self.bad_pairs:
                    self.try_setup(state, p, q, wl, [])

    def partial_dfs(self, state: WavelengthState, wavelength: int, p: int,
                    used: set[int], stack: list[tuple[int, int]], full_only: bool) -> None:
        if self.full:
            return
        if p == self.N:
            if len(stack) == self.N:
                self.report.full_permutations += 1
            if not full_only:
                self.report.partial_permutations += 1
            return
        if not full_only:
            self.partial_dfs(state, wavelength, p + 1, used, stack, full_only)
        for q in range(self.N):
            if q in used or (p, q) in self.bad_pairs:
                continue
            cid = self.try_setup(state, p, q, wavelength, stack)
            if cid is None:
                continue
            used.add(q)
            stack.append((p, q))
            self.partial_dfs(state, wavelength, p + 1, used, stack, full_only)
            stack.pop()
            used.discard(q)
            state.teardown(cid)

    def ordered_dfs(self, state: WavelengthState, wavelength: int,
                    used_in: set[int], used_out: set[int],
                    stack: list[tuple[int, int]]) -> None:
        if self.full:
            return
        for p in range(self.N):
            if p in used_in:
                continue
            for q in range(self.N):
                if q in used_out or (p, q) in self.bad_pairs:
                    continue
                cid = self.try_setup(state, p, q, wavelength, stack)
                if cid is None:
                    continue
                used_in.add(p)
                used_out.add(q)
                stack.append((p, q))
                self.ordered_dfs(state, wavelength, used_in, used_out, stack)
                stack.pop()
                used_in.discard(p)
                used_out.discard(q)
                state.teardown(cid)

    def extreme_cases(self, state: WavelengthState, wavelength: int) -> None:
        """Idle only at one input and one output; then connect them."""
        N = self.N
        for p, q in itertools.product(range(N), repeat=2):
            if (p, q) in self.bad_pairs:
                continue
            ins = [x for x in range(N) if x != p]
            outs = [y for y in range(N) if y != q]
            for shift in sorted({0, 1 % max(len(outs), 1)}):
                if self.full:
                    return
                rotated = outs[shift:] + outs[:shift]
                loaded = []
                for x, y in zip(ins, rotated):
                    if (x, y) in self.bad_pairs:
                        continue
                    cid = self.try_setup(state, x, y, wavelength, loaded)
                    if cid is not None:
                        loaded.append((x, y))
                context = list(loaded)
                last = self.try_setup(state, p, q, wavelength, context)
                self.report.extreme_cases += 1
                if last is not None:
                    state.teardown(last)
                for cid in [c for c, path in state.connections.items()
                            if path.wavelength == wavelength]:
                    state.teardown(cid)


PARTIAL_LIMIT = 6
ORDER_LIMIT = 5
FULL_LIMIT = 8
PAIRWISE_LIMIT = 16


def verify_nonblocking(fabric: FabricTopology, w: int | None = None,
                       mode: str = "exhaustive", budget: int = 200, seed: int = 0,
                       max_counterexamples: int = 50) -> NonblockingReport:
    """Exercise same-wavelength connection sets and collect counterexamples.

    Exhaustive mode, per wavelength, with every other wavelength loaded:
    all partial permutations for ``N <= 6`` (every arrival order for
    ``N <= 5``), all full permutations for ``N <= 8``, pairwise path
    disjointness for ``N <= 16`` and, for every ``(p, q)``, the fully loaded
    case where only ``p`` and ``q`` are idle. Randomized mode draws
    ``budget`` random request sequences from ``seed``.
    """
    w = fabric.params.w if w is None else w
    if not 1 <= w <= fabric.params.w:
        raise ValueError(f"fabric carries {fabric.params.w} wavelengths, asked for {w}")
    if mode not in ("exhaustive", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    N = fabric.params.N
    report = NonblockingReport(fabric.stage.value, N, w, mode)
    h = _Harness(fabric, w, report, max_counterexamples)
    paths = h.sweep_routes()

    if mode == "exhaustive":
        if N <= PAIRWISE_LIMIT:
            h.pairwise_disjoint(paths)
        report.orders_exhaustive = N <= ORDER_LIMIT
        for wavelength in range(w):
            state = WavelengthState(fabric)
            h.background(state, wavelength)
            if N <= ORDER_LIMIT:
                h.ordered_dfs(state, wavelength, set(), set(), [])
            if N <= PARTIAL_LIMIT:
                h.partial_dfs(state, wavelength, 0, set(), [], full_only=False)
            elif N <= FULL_LIMIT:
                h.partial_dfs(state, wavelength, 0, set(), [], full_only=True)
            h.extreme_cases(state, wavelength)
            problems = state.check_invariants()
            for problem in problems:
                h.record(Counterexample(wavelength, "state", (-1, -1), (), problem))
    else:
        rng = random.Random(seed)
        for _ in range(budget):
            if h.full:
                break
            state = WavelengthState(fabric)
            for wavelength in range(w):
                ins = rng.sample(range(N), rng.randint(1, N))
                outs = rng.sample(range(N), len(ins))
                stack: list[tuple[int, int]] = []
                for p, q in zip(ins, outs):
                    if (p, q) in h.bad_pairs:
                        continue
                    if h.try_setup(state, p, q, wavelength, stack) is not None:
                        stack.append((p, q))
            for problem in state.check_invariants():
                h.record(Counterexample(-1, "state", (-1, -1), (), problem))
            ids = list(state.connections)
            rng.shuffle(ids)
            for cid in ids:
                state.teardown(cid)
            report.partial_permutations += 1
    return report


def compare_fabrics(modular: FabricTopology, classical: FabricTopology,
                    w: int | None = None) -> list[str]:
    """Check that both fabrics route every ``(p, q, lambda)`` between the
    same external endpoints."""
    if modular.params.N != classical.params.N:
        return [f"port counts differ: {modular.params.N} vs {classical.params.N}"]
    w = min(modular.params.w, classical.params.w) if w is None else w
    problems = []
    N = modular.params.N
    for p, q, wavelength in itertools.product(range(N), range(N), range(w)):
        ends = []
        for fabric in (modular, classical):
            try:
                path = resolve_path(fabric, ConnectionRequest(p, q, wavelength))
                ends.append((path.hops[0].node, path.hops[-1].node))
            except (RoutingError, AddressError) as exc:
                ends.append(str(exc))
        if ends[0] != ends[1]:
            problems.append(f"R({p},{q},{wavelength}): {ends[0]} vs {ends[1]}")
    return problems
