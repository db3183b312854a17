"""
From a classical OXC to a modular one
=====================================

Walk a 6-port fabric through the shuffle substitution, the WSS cascade
split and the module merge, watching the fiber counts as we go.
"""

from modoxc.core import NodeKind, Stage, validate_topology
from modoxc.fabric import build_stage, path_count_matrix

n, r, w = 2, 3, 4

# %%
# Each stage keeps the same external behaviour. The path-count matrix is
# all ones when every input reaches every output along exactly one path.
for stage in Stage:
    t = build_stage(stage, n, r, w)
    ones = (path_count_matrix(t) == 1).all()
    print(f"{stage.value:13s} stage fibers={t.stage_fiber_count:3d} "
          f"internal={t.internal_fiber_count:3d} "
          f"violations={len(validate_topology(t))} single-path={ones}")

# %%
# The finished fabric: N input WSSs of size 1 x n, n^2 modules of size
# r x r and N output WSSs of size n x 1.
modular = build_stage(Stage.MODULAR, n, r, w, sealed=True)
for (kind, fan_in, fan_out), count in sorted(modular.census().items()):
    if kind is NodeKind.EXTERNAL_PORT:
        continue
    print(f"{count:3d} x {kind.value:10s} {fan_in}x{fan_out}")
