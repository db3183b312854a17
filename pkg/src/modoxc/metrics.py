"""Closed-form cabling, component census and insertion-loss budgets.

Counts are exact integers and :class:`fractions.Fraction`; only decibel
values are floats. Each analytic figure has a ``*_from_topology`` twin that
measures the same quantity on a built fabric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import FabricParams, FabricTopology, NodeKind, Stage

WSS_LOSS_DB = 5.0


@dataclass(frozen=True)
class CablingReport:
    fabric_kind: str
    N: int
    n: int
    r: int
    stage_fibers: int
    internal_module_fibers: int
    total_external_cables: int
    ratio_to_classical: Fraction

    def as_dict(self) -> dict:
        return {
            "fabricKind": self.fabric_kind,
            "N": self.N, "n": self.n, "r": self.r,
            "stageFibers": self.stage_fibers,
            "internalModuleFibers": self.internal_module_fibers,
            "totalExternalCables": self.total_external_cables,
            "ratioToClassical": str(self.ratio_to_classical),
        }


def cabling_report(params: FabricParams, sealed: bool = True,
                   fabric_kind: str = "modular") -> CablingReport:
    """Fiber counts of the classical (``N**2``) or modular (``2*N*n``) OXC.

    Sealed modules keep their ``r**2`` fibers inside the package, so they
    are not external cables.
    """
    N, n, r = params.N, params.n, params.r
    if fabric_kind == "classical":
        return CablingReport("classical", N, n, r, N * N, 0, N * N, Fraction(1))
    if fabric_kind != "modular":
        raise ValueError(f"unknown fabric kind {fabric_kind!r}")
    stage = 2 * N * n
    internal = n * n * r * r
    total = stage if sealed else stage + internal
    return CablingReport("modular", N, n, r, stage, internal, total,
                         Fraction(stage, N * N))


def cabling_from_topology(t: FabricTopology) -> CablingReport:
    """Measure the same figures on a built fabric by counting edges."""
    p = t.params
    stage = t.stage_fiber_count
    if t.stage is Stage.MODULAR:
        # sealed modules hide their fibers; they still hold r**2 each
        modules = sum(1 for nid in t.nodes if nid.kind is NodeKind.OXC_MODULE)
        internal = modules * p.r * p.r if t.sealed else t.internal_fiber_count
        total = stage if t.sealed else stage + internal
        kind = "modular"
    else:
        internal, total = 0, stage
        kind = "classical" if t.stage is Stage.CLASSICAL else t.stage.value
    return CablingReport(kind, p.N, p.n, p.r, stage, internal, total,
                         Fraction(stage, p.N * p.N))


@dataclass(frozen=True)
class ComponentCensus:
    input_wss: int
    oxc_modules: int
    output_wss: int
    input_port_count: int  # k of each 1 x k input device
    module_size: int
    output_port_count: int


def component_census(params: FabricParams) -> ComponentCensus:
    """``N`` ``1 x n`` WSSs, ``n**2`` ``r x r`` OXCs and ``N`` ``n x 1`` WSSs."""
    return ComponentCensus(params.N, params.n ** 2, params.N, params.n, params.r, params.n)


def census_from_topology(t: FabricTopology) -> ComponentCensus:
    if t.stage is not Stage.MODULAR:
        raise ValueError("component census is defined on the modular fabric")
    top = [node for node in t.nodes.values() if node.parent is None]
    inputs = [nd for nd in top if nd.id.kind in (NodeKind.INPUT_WSS, NodeKind.INPUT_COUPLER)]
    outputs = [nd for nd in top if nd.id.kind is NodeKind.OUTPUT_WSS]
    modules = [nd for nd in top if nd.id.kind is NodeKind.OXC_MODULE]
    sizes = {nd.fan_out for nd in inputs}, {nd.fan_in for nd in modules}, \
        {nd.fan_in for nd in outputs}
    if any(len(s) > 1 for s in sizes):
        raise ValueError(f"mixed device sizes in topology: {sizes}")
    k_in, k_mod, k_out = (next(iter(s), 0) for s in sizes)
    return ComponentCensus(len(inputs), len(modules), len(outputs), k_in, k_mod, k_out)


def coupler_loss_db(k: int) -> float:
    """Ideal splitting loss of a ``1 x k`` optical coupler."""
    if k < 1:
        raise ValueError(f"coupler needs at least one port, got {k}")
    return 10.0 * math.log10(k)


@dataclass(frozen=True)
class LossBudget:
    fabric_kind: str
    elements: tuple[tuple[str, float], ...]
    per_wss_loss_db: float = WSS_LOSS_DB
    fiber_loss_db: float = 0.0
    derived: bool = False  # figure implied, not reported, for this fabric
    notes: tuple[str, ...] = field(default=())

    @property
    def stages_traversed(self) -> int:
        return len(self.elements)

    @property
    def total_db(self) -> float:
        return sum(db for _, db in self.elements) + self.fiber_loss_db

    def as_dict(self) -> dict:
        return {
            "fabricKind": self.fabric_kind,
            "elements": [{"element": name, "lossDb": db} for name, db in self.elements],
            "stagesTraversed": self.stages_traversed,
            "perWssLossDb": self.per_wss_loss_db,
            "fiberLossDb": self.fiber_loss_db,
            "totalDb": self.total_db,
            "derived": self.derived,
            "notes": list(self.notes),
        }


def loss_budget(fabric_kind: str, n: int, r: int, coupler_input: bool = False,
                per_wss_loss_db: float = WSS_LOSS_DB,
                fiber_loss_db: float = 0.0) -> LossBudget:
    """dB sum over the switching elements a connection crosses.

    The modular path crosses ``1 x n``, ``1 x r``, ``r x 1`` and ``n x 1``
    devices; WSS loss does not depend on port count. With ``coupler_input``
    the first device is a ``1 x n`` coupler at ``10*log10(n)`` dB.
    """
    if fabric_kind == "classical":
        N = n * r
        elements = ((f"1x{N} WSS", per_wss_loss_db), (f"{N}x1 WSS", per_wss_loss_db))
        return LossBudget("classical", elements, per_wss_loss_db, fiber_loss_db,
                          derived=True, notes=("two WSS stages; implied comparison figure",))
    if fabric_kind != "modular":
        raise ValueError(f"unknown fabric kind {fabric_kind!r}")
    first = (f"1x{n} OC", coupler_loss_db(n)) if coupler_input \
        else (f"1x{n} WSS", per_wss_loss_db)
    elements = (
        first,
        (f"1x{r} WSS", per_wss_loss_db),
        (f"{r}x1 WSS", per_wss_loss_db),
        (f"{n}x1 WSS", per_wss_loss_db),
    )
    notes = ()
    if coupler_input:
        delta = coupler_loss_db(n) - per_wss_loss_db
        notes = (f"coupler adds {delta:+.2f} dB over the WSS-only path",)
    return LossBudget("modular", elements, per_wss_loss_db, fiber_loss_db, notes=notes)


def path_loss_db(t: FabricTopology, path, per_wss_loss_db: float = WSS_LOSS_DB,
                 fiber_loss_db: float = 0.0) -> float:
    """Loss measured by walking a routed path's switching elements.

    A sealed ``r x r`` module counts as its two internal WSS stages.
    """
    total = fiber_loss_db
    for hop in path.hops + path.inner_hops:
        kind = hop.node.kind
        if kind in (NodeKind.INPUT_WSS, NodeKind.OUTPUT_WSS):
            total += per_wss_loss_db
        elif kind is NodeKind.INPUT_COUPLER:
            total += coupler_loss_db(t.nodes[hop.node].fan_out)
        elif kind is NodeKind.OXC_MODULE and t.sealed:
            total += 2 * per_wss_loss_db
    return total
