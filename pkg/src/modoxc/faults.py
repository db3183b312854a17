"""Single-fiber fault injection for fabrics and shuffle networks."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .core import FabricTopology, FiberEdge, NodeId
from .shuffle import Flavor, ShuffleNetwork


@dataclass(frozen=True)
class Fault:
    kind: str  # "delete" or "rewire"
    target: str
    detail: str = ""


def delete_fiber(t: FabricTopology, eid: str) -> FabricTopology:
    if eid not in t.edges:
        raise KeyError(eid)
    return t.replace_edges({k: e for k, e in t.edges.items() if k != eid})


def rewire_fiber(t: FabricTopology, eid: str, dst: NodeId, dst_port: int) -> FabricTopology:
    edges = dict(t.edges)
    edges[eid] = replace(edges[eid], dst=dst, dst_port=dst_port)
    return t.replace_edges(edges)


def swap_fiber_destinations(t: FabricTopology, first: str, second: str) -> FabricTopology:
    """Cross-connect two fibers: each lands where the other used to."""
    e1, e2 = t.edges[first], t.edges[second]
    edges = dict(t.edges)
    edges[first] = replace(e1, dst=e2.dst, dst_port=e2.dst_port)
    edges[second] = replace(e2, dst=e1.dst, dst_port=e1.dst_port)
    return t.replace_edges(edges)


def random_fabric_fault(t: FabricTopology, rng: random.Random) -> tuple[FabricTopology, Fault]:
    ids = sorted(t.edges)
    eid = rng.choice(ids)
    if rng.random() < 0.5:
        return delete_fiber(t, eid), Fault("delete", eid)
    edge: FiberEdge = t.edges[eid]
    # rewire onto another fiber's landing port of the same role
    others = [k for k in ids if k != eid and t.edges[k].role is edge.role
              and (t.edges[k].dst, t.edges[k].dst_port) != (edge.dst, edge.dst_port)]
    if not others:
        return delete_fiber(t, eid), Fault("delete", eid)
    other = rng.choice(others)
    return swap_fiber_destinations(t, eid, other), Fault("rewire", eid, f"swapped with {other}")


def random_shuffle_fault(net: ShuffleNetwork, rng: random.Random
                         ) -> tuple[ShuffleNetwork, Fault]:
    """Delete or cross-connect one fiber of a modular shuffle.

    The fiber may be an input link, an output link or a fiber inside one of
    the ``S_ab(r)`` sub-networks.
    """
    if net.flavor is not Flavor.FACTORIZED:
        fibers = dict(net.fibers)
        key = rng.choice(sorted(fibers))
        if rng.random() < 0.5 or len(fibers) < 2:
            del fibers[key]
            return replace(net, fibers=fibers), Fault("delete", f"fiber {key}")
        other = rng.choice([k for k in sorted(fibers) if k != key])
        fibers[key], fibers[other] = fibers[other], fibers[key]
        return replace(net, fibers=fibers), Fault("rewire", f"fiber {key}", f"with {other}")

    layer = rng.choice(["input", "sub", "output"])
    delete = rng.random() < 0.5
    if layer == "sub":
        sub_id = rng.choice(sorted(net.subnetworks))
        sub, fault = random_shuffle_fault(net.subnetworks[sub_id], rng)
        subs = dict(net.subnetworks)
        subs[sub_id] = sub
        return replace(net, subnetworks=subs), Fault(
            fault.kind, f"S_{sub_id} {fault.target}", fault.detail)
    links = dict(net.input_links if layer == "input" else net.output_links)
    key = rng.choice(sorted(links))
    if delete or len(links) < 2:
        del links[key]
        fault = Fault("delete", f"{layer} link {key}")
    else:
        other = rng.choice([k for k in sorted(links) if k != key])
        links[key], links[other] = links[other], links[key]
        fault = Fault("rewire", f"{layer} link {key}", f"with {other}")
    field_name = "input_links" if layer == "input" else "output_links"
    return replace(net, **{field_name: links}), fault
