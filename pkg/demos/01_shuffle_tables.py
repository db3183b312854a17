"""
Shuffle networks and their connectivity tables
==============================================

Build S(6), print its table, then factor it as 2 x 3 and check that the
modular shuffle made of four S(3) copies wires exactly the same fibers.
"""

import numpy as np

from modoxc.serialize import render_table
from modoxc.shuffle import (
    build_modular_shuffle,
    build_shuffle,
    build_table,
    check_equivalence,
    factorize_table,
)

# %%
# Input pq of S(N) is wired to output qp. Fiber 32 is a good spot check.
net = build_shuffle(6)
print("fiber leaving input 32 lands on output", net.trace((3, 2)))

# %%
# Every input group meets every output group through exactly one fiber.
counts = np.zeros((6, 6), dtype=int)
for (p, _), (q, _) in net.fibers.items():
    counts[p, q] += 1
print(counts)

# %%
# The monolithic table, then the same table with 2-digit group addresses.
table = build_table(6)
print(render_table(table))
factored = factorize_table(table, 2, 3)
print(render_table(factored))

# %%
# The modular shuffle routes input 1002 through sub-network S_10(3).
modular = build_modular_shuffle(2, 3)
print("input 1002 ->", modular.trace((1, 0, 0, 2)))
print("equivalent to S(6):", bool(check_equivalence(modular, 2, 3)))
