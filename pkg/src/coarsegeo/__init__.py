"""coarsegeo: desk-scale computational toolkit for the coarse geometry of
split abelian-by-abelian solvable groups.

Core pieces: root-system group models, rank-one weight spaces and their
coarse metric, the embedded metric on G, subdivision and the
efficiency/monotone scale ladders, boxes with Folner statistics and
tilings, quadrilateral checks, and combinatorial lemma verifiers.
"""

__version__ = "0.1.0"

from .groups import (  # noqa: F401
    GroupPoint,
    Root,
    RootSystem,
    act,
    identity,
    inverse,
    load_root_system,
    multiply,
    point,
    rank2_group,
    root_classes,
    sol_group,
    validate_root_system,
)
from .weightspace import (  # noqa: F401
    MetricPolynomial,
    VerticalGeodesic,
    WeightPoint,
    approximate_by_vertical,
    dist_to_vertical,
    u_inverse,
    weight_distance,
)
from .embed import (  # noqa: F401
    HalfspaceRegion,
    LinearNeighborhoodSpec,
    common_flat_fraction,
    embedded_distance,
    flat_overlap_region,
    linear_neighborhood_contains,
    project_to_base,
    project_to_weight,
)
from .paths import (  # noqa: F401
    APath,
    Path,
    Subdivision,
    chord_hausdorff,
    confinement_check,
    default_hbar,
    find_efficiency_scale,
    find_efficiency_scale_family,
    is_efficient,
    subdivide,
)
from .monotone import (  # noqa: F401
    MonotoneVerdict,
    find_monotone_scale,
    find_monotone_scale_family,
    geodesic_approximation,
    is_delta_monotone,
    is_weakly_monotone,
    uniform_points,
)
from .boxes import (  # noqa: F401
    Box,
    Tiling,
    build_box,
    folner_stats,
    good_box_experiment,
    sample_geodesic_family,
    standard_map_fit,
    tile_box,
)
from .quadrilaterals import (  # noqa: F401
    Quadrilateral,
    build_commutator_quadrilateral,
    check_quadrilateral,
    orientation_pattern,
    structure_report,
    word_residual,
)
from .combinatorics import (  # noqa: F401
    IncidenceStructure,
    mediant_dominance,
    pingpong_bound_check,
    spread_points,
    thin_triangle_check,
)
