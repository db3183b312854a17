"""
Cabling and insertion loss
==========================

Compare fiber counts and per-path loss of the classical and modular OXCs
for a few factorizations.
"""

import math

import numpy as np

from modoxc.core import FabricParams
from modoxc.metrics import cabling_report, coupler_loss_db, loss_budget

# %%
# The 160-port case: 8 x 20.
params = FabricParams(160, 8, 20)
classical = cabling_report(params, fabric_kind="classical")
modular = cabling_report(params)
print(f"classical {classical.stage_fibers} fibers, modular {modular.stage_fibers}, "
      f"ratio {modular.ratio_to_classical}")

# %%
# Square factorizations need 2 N^1.5 cables.
for N in (4, 16, 64, 256, 1024):
    root = math.isqrt(N)
    report = cabling_report(FabricParams(N, root, root))
    print(f"N={N:5d} modular={report.stage_fibers:6d} classical={N * N:8d}")

# %%
# WSS loss does not depend on port count, so the four-stage path is flat
# in N. A coupler in front pays 10 log10(n) instead of a WSS's 5 dB.
print("WSS-only path:", loss_budget("modular", 8, 20).total_db, "dB")
ns = np.array([2, 4, 8, 16, 32])
deltas = np.array([coupler_loss_db(int(n)) - 5.0 for n in ns])
for n, d in zip(ns, deltas):
    print(f"n={n:2d} coupler delta {d:+.2f} dB")
