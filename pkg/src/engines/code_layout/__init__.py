# hexinject - Code Layout Engine Package
# Patch geometry, flag routing and logical operators

from .builder import (
    LEG_ORDER,
    build_layout,
    logical_supports,
    diagonal_reflect,
    anticommutes,
    is_primal,
    grid_point,
    validate_distance,
)
from .analysis import (
    interaction_graph,
    interaction_degrees,
    max_interaction_degree,
    commutation_violations,
    stabilizer_rank,
    route_asymmetry,
    layouts_isomorphic,
    dump_layout,
    role_counts,
)

__all__ = [
    "LEG_ORDER",
    "build_layout",
    "logical_supports",
    "diagonal_reflect",
    "anticommutes",
    "is_primal",
    "grid_point",
    "validate_distance",
    "interaction_graph",
    "interaction_degrees",
    "max_interaction_degree",
    "commutation_violations",
    "stabilizer_rank",
    "route_asymmetry",
    "layouts_isomorphic",
    "dump_layout",
    "role_counts",
]
