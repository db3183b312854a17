"""Classical and modular WSS-based optical cross-connects.

Build fabrics, self-route wavelength connections through them and check
the structural claims (shuffle equivalence, per-wavelength nonblocking,
cabling and loss figures).
"""

from .core import (
    AddressError,
    EdgeRole,
    FabricParams,
    FabricTopology,
    FiberEdge,
    GroupPortAddress,
    ModularAddress,
    Node,
    NodeId,
    NodeKind,
    Side,
    Stage,
    Wavelength,
    flatten_address,
    format_label,
    split_address,
    validate_topology,
)
from .fabric import (
    build_classical,
    build_modular,
    build_stage,
    path_count_matrix,
    phase1_substitute,
    phase2_decompose,
    phase3_merge,
)
from .metrics import (
    cabling_from_topology,
    cabling_report,
    census_from_topology,
    component_census,
    coupler_loss_db,
    loss_budget,
    path_loss_db,
)
from .routing import (
    ConnectionRequest,
    InternalContention,
    RoutedPath,
    WavelengthBusyAtEndpoint,
    WavelengthState,
    compare_fabrics,
    resolve_path,
    verify_nonblocking,
)
from .shuffle import (
    ConnectivityTable,
    ShuffleNetwork,
    build_modular_shuffle,
    build_shuffle,
    build_table,
    check_equivalence,
    factorize_table,
)

__version__ = "0.1.0"
