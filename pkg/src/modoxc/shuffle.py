"""Shuffle networks, connectivity tables and the modular factorization.

A monolithic shuffle ``S(N)`` wires input ``(p, q)`` to output ``(q, p)``.
The modular shuffle ``S^(n x r)`` realises the same connectivity with
``n**2`` copies of ``S(r)``: input ``(a, p', b, q')`` enters sub-network
``(a, b)`` at ``(p', q')``, crosses it to ``(q', p')`` and leaves on output
``(b, q', a, p')``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from .core import swap_halves

Address = tuple[int, ...]


class Flavor(str, enum.Enum):
    MONOLITHIC = "monolithic"
    FACTORIZED = "factorized"


@dataclass(frozen=True)
class ConnectivityTable:
    """Rows are input groups, columns output groups.

    ``entries[(row, col)]`` holds the fiber tag ``(input, output)``.
    Monolithic rows/cols are ``(p,)``; factorized ones are ``(a, p')``.
    """

    rows: tuple[Address, ...]
    cols: tuple[Address, ...]
    entries: dict[tuple[Address, Address], tuple[Address, Address]]
    flavor: Flavor = Flavor.MONOLITHIC
    n: int = 1
    r: int = 1

    @property
    def size(self) -> int:
        return len(self.rows)

    def entry(self, row: Address, col: Address) -> tuple[Address, Address]:
        return self.entries[(tuple(row), tuple(col))]

    def subtable(self, a: int, b: int) -> ConnectivityTable:
        """Sub-table ``T_ab`` with the ``(a, b)`` period prefixes erased."""
        if self.flavor is not Flavor.FACTORIZED:
            raise ValueError("only factorized tables have sub-tables")
        entries = {}
        for p_prime, q_prime in itertools.product(range(self.r), repeat=2):
            src, dst = self.entries[((a, p_prime), (b, q_prime))]
            entries[((p_prime,), (q_prime,))] = (
                (src[1], src[3]),
                (dst[1], dst[3]),
            )
        labels = tuple((i,) for i in range(self.r))
        return ConnectivityTable(labels, labels, entries, Flavor.MONOLITHIC, 1, self.r)


def build_table(N: int) -> ConnectivityTable:
    if N < 1:
        raise ValueError(f"table size must be positive, got {N}")
    labels = tuple((i,) for i in range(N))
    entries = {
        ((p,), (q,)): ((p, q), (q, p))
        for p, q in itertools.product(range(N), repeat=2)
    }
    return ConnectivityTable(labels, labels, entries, Flavor.MONOLITHIC, 1, N)


def factorize_table(table: ConnectivityTable, n: int, r: int) -> ConnectivityTable:
    """Apply modulo-r to every number of ``table`` and add period prefixes."""
    if table.flavor is not Flavor.MONOLITHIC:
        raise ValueError("factorize_table expects a monolithic table")
    if n < 1 or r < 1 or table.size != n * r:
        raise ValueError(f"table of size {table.size} cannot be factorized as {n} x {r}")

    def split(x: int) -> tuple[int, int]:
        return divmod(x, r)

    entries = {}
    for (row, col), (src, dst) in table.entries.items():
        new_row, new_col = split(row[0]), split(col[0])
        new_src = split(src[0]) + split(src[1])
        new_dst = split(dst[0]) + split(dst[1])
        entries[(new_row, new_col)] = (new_src, new_dst)
    rows = tuple(divmod(p, r) for p in range(n * r))
    return ConnectivityTable(rows, rows, entries, Flavor.FACTORIZED, n, r)


def unfactorize_table(table: ConnectivityTable) -> ConnectivityTable:
    """Strip period prefixes and recompose flat indices ``a*r + p'``."""
    if table.flavor is not Flavor.FACTORIZED:
        raise ValueError("table is not factorized")
    r = table.r

    def flat(pair: Address) -> int:
        return pair[0] * r + pair[1]

    entries = {}
    for (row, col), (src, dst) in table.entries.items():
        entries[((flat(row),), (flat(col),))] = (
            (flat(src[:2]), flat(src[2:])),
            (flat(dst[:2]), flat(dst[2:])),
        )
    labels = tuple((i,) for i in range(table.size))
    return ConnectivityTable(labels, labels, entries, Flavor.MONOLITHIC, 1, table.size)


def check_requirements(table: ConnectivityTable) -> list[str]:
    """Check R1 (one fiber per row/col), R2 (swap), R3 (identical sub-tables)."""
    problems = []
    for row, col in itertools.product(table.rows, table.cols):
        if (row, col) not in table.entries:
            problems.append(f"R1: no entry at {row},{col}")
            continue
        src, dst = table.entries[(row, col)]
        half = len(src) // 2
        if src[:half] != row or src[half:] != col:
            problems.append(f"R1: entry {row},{col} names fiber {src} of another group pair")
        if dst != swap_halves(src):
            problems.append(f"R2: entry {row},{col} output {dst} is not the swap of {src}")
    extra = set(table.entries) - set(itertools.product(table.rows, table.cols))
    problems.extend(f"R1: stray entry at {k}" for k in sorted(extra))
    if table.flavor is Flavor.FACTORIZED and not problems:
        reference = build_table(table.r).entries
        for a, b in itertools.product(range(table.n), repeat=2):
            if table.subtable(a, b).entries != reference:
                problems.append(f"R3: sub-table ({a},{b}) differs from S({table.r})")
    return problems


@dataclass(frozen=True)
class ShuffleNetwork:
    """Fiber-level description of a shuffle network.

    Monolithic: ``fibers`` maps input ``(p, q)`` to output ``(q, p)``.
    Factorized: ``input_links`` maps input ``(a, p', b, q')`` to
    ``((a, b), (p', q'))``, the port of an embedded ``S_ab(r)`` in
    ``subnetworks``; ``output_links`` maps ``((a, b), (q', p'))`` to the
    output ``(b, q', a, p')``.
    """

    n: int
    r: int
    flavor: Flavor
    fibers: dict[Address, Address] = field(default_factory=dict)
    input_links: dict[Address, tuple[tuple[int, int], Address]] = field(default_factory=dict)
    subnetworks: dict[tuple[int, int], ShuffleNetwork] = field(default_factory=dict)
    output_links: dict[tuple[tuple[int, int], Address], Address] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.n * self.r

    def inputs(self) -> list[Address]:
        if self.flavor is Flavor.MONOLITHIC:
            return sorted(self.fibers)
        return sorted(self.input_links)

    def trace(self, src: Address) -> Address | None:
        """Follow input ``src`` to the output it reaches, or ``None``."""
        if self.flavor is Flavor.MONOLITHIC:
            return self.fibers.get(tuple(src))
        link = self.input_links.get(tuple(src))
        if link is None:
            return None
        sub_id, local_in = link
        sub = self.subnetworks.get(sub_id)
        if sub is None:
            return None
        local_out = sub.trace(local_in)
        if local_out is None:
            return None
        return self.output_links.get((sub_id, local_out))

    def connections(self) -> dict[Address, Address | None]:
        return {src: self.trace(src) for src in self.inputs()}

    def fiber_tags(self) -> list[tuple[Address, Address]]:
        return sorted((s, d) for s, d in self.connections().items() if d is not None)


def build_shuffle(N: int) -> ShuffleNetwork:
    if N < 1:
        raise ValueError(f"shuffle size must be positive, got {N}")
    fibers = {(p, q): (q, p) for p, q in itertools.product(range(N), repeat=2)}
    return ShuffleNetwork(1, N, Flavor.MONOLITHIC, fibers=fibers)


def build_modular_shuffle(n: int, r: int) -> ShuffleNetwork:
    if n < 1 or r < 1:
        raise ValueError(f"factors must be positive, got n={n}, r={r}")
    subnetworks = {}
    input_links = {}
    output_links = {}
    # sub-network k = a*n + b; dict order follows k
    for a, b in itertools.product(range(n), repeat=2):
        subnetworks[(a, b)] = build_shuffle(r)
    for a, p_prime, b, q_prime in itertools.product(range(n), range(r), range(n), range(r)):
        # subgroup (a, p', b) -> input group p' of S_ab
        input_links[(a, p_prime, b, q_prime)] = ((a, b), (p_prime, q_prime))
        # output group q' of S_ab -> subgroup (b, q', a)
        output_links[((a, b), (q_prime, p_prime))] = (b, q_prime, a, p_prime)
    return ShuffleNetwork(
        n, r, Flavor.FACTORIZED,
        input_links=input_links, subnetworks=subnetworks, output_links=output_links,
    )


def check_shuffle_properties(net: ShuffleNetwork) -> list[str]:
    """P1 (one fiber per group pair) and P2 (output = swapped input)."""
    if net.flavor is not Flavor.MONOLITHIC:
        raise ValueError("P1/P2 are stated on monolithic inputs; use check_equivalence")
    N = net.N
    problems = []
    pair_count: dict[tuple[int, int], int] = {}
    for src, dst in net.fibers.items():
        if dst is None or len(dst) != 2:
            problems.append(f"P1: input {src} dangling")
            continue
        pair_count[(src[0], dst[0])] = pair_count.get((src[0], dst[0]), 0) + 1
        if dst != swap_halves(src):
            problems.append(f"P2: input {src} reaches {dst}")
    for p, q in itertools.product(range(N), repeat=2):
        if pair_count.get((p, q), 0) != 1:
            problems.append(f"P1: {pair_count.get((p, q), 0)} fibers between group {p} and {q}")
    return problems


@dataclass(frozen=True)
class EquivalenceWitness:
    kind: str  # "dangling", "misrouted", "missing", "duplicate"
    fiber: Address | None
    detail: str


@dataclass(frozen=True)
class EquivalenceResult:
    ok: bool
    witness: EquivalenceWitness | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_equivalence(net: ShuffleNetwork, n: int, r: int) -> EquivalenceResult:
    """Check that ``(a, p', b, q') -> (a*r+p', b*r+q')`` maps the fibers of
    ``net`` one-to-one onto ``{f(pq, qp)}`` of ``S(n*r)``.

    The first failure is returned as a witness; the fiber is named by its
    input-side address.
    """
    N = n * r
    covered: dict[tuple[int, int], Address] = {}
    checked = 0
    expected_inputs = list(itertools.product(range(n), range(r), range(n), range(r)))
    present = set(net.inputs()) if net.flavor is Flavor.FACTORIZED else set()
    if net.flavor is Flavor.MONOLITHIC:
        # an unfactorized network is compared on flat addresses directly
        expected_inputs = [divmod(p, r) + divmod(q, r)
                           for p, q in itertools.product(range(N), repeat=2)]
        present = {divmod(s[0], r) + divmod(s[1], r) for s in net.inputs()}

    for src in expected_inputs:
        checked += 1
        if src not in present:
            return EquivalenceResult(False, EquivalenceWitness(
                "dangling", src, "input has no fiber"), checked)
        if net.flavor is Flavor.MONOLITHIC:
            raw = net.trace((src[0] * r + src[1], src[2] * r + src[3]))
            dst = None if raw is None else divmod(raw[0], r) + divmod(raw[1], r)
        else:
            dst = net.trace(src)
        if dst is None:
            return EquivalenceResult(False, EquivalenceWitness(
                "dangling", src, "fiber does not reach an output"), checked)
        a, p_prime, b, q_prime = src
        p, q = a * r + p_prime, b * r + q_prime
        if len(dst) != 4:
            return EquivalenceResult(False, EquivalenceWitness(
                "misrouted", src, f"reaches malformed output {dst}"), checked)
        out_group = dst[0] * r + dst[1]
        out_port = dst[2] * r + dst[3]
        if (out_group, out_port) != (q, p):
            return EquivalenceResult(False, EquivalenceWitness(
                "misrouted", src,
                f"f({p},{q}) should reach output ({q},{p}) but reaches ({out_group},{out_port})"),
                checked)
        if (p, q) in covered:
            return EquivalenceResult(False, EquivalenceWitness(
                "duplicate", src, f"pair ({p},{q}) already realised by {covered[(p, q)]}"),
                checked)
        covered[(p, q)] = src
    stray = present - set(expected_inputs)
    if stray:
        src = min(stray)
        return EquivalenceResult(False, EquivalenceWitness(
            "duplicate", src, "input outside the address space"), checked)
    if len(covered) != N * N:
        missing = min(set(itertools.product(range(N), repeat=2)) - set(covered))
        return EquivalenceResult(False, EquivalenceWitness(
            "missing", None, f"pair {missing} not realised"), checked)
    return EquivalenceResult(True, None, checked)
