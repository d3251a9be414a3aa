from .legal import (
    CenteredGraph,
    LegalGraph,
    NodeRecord,
    ValidationReport,
    Violation,
    default_cap,
    is_legal,
    require_legal,
    validate_legal,
)
from .transforms import (
    cantor_pair,
    connected_component_of,
    d_radius_identical,
    disjoint_union,
    id_isomorphic,
    id_signature,
    induced_subgraph,
    line_graph,
    pad_isolated,
    permute_names,
    power_graph,
    radius_ball,
    relabel_indices,
    with_ids,
)
from .generators import atlas, from_networkx, generate, labeled_paths, parse_family, to_networkx
from .textio import from_text, read_graph, to_text, write_graph
