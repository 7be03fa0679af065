"""Certified construction of n-saturated profinite graphs.

The library builds towers of finite reflexive graphs connected by quotient
maps, each level exhaustively verified n-saturated, whose inverse limit is
an n-saturated closed graph on a Cantor-like space.  Extensions come from a
randomized product construction with exact rational failure bounds, so the
rejection sampling loop has certified positive success probability.
"""

from .builder import (
    AttemptsExhausted,
    BuildParams,
    ProductVertex,
    attempt_seed,
    build_extension,
    check_product_lifting,
    lifting_failure_bound,
    minimal_certified_m,
    product_coords,
    product_index,
    sample_product_graph,
    saturation_failure_bound,
)
from .graphs import (
    FiniteGraph,
    SaturationReport,
    TypeSpec,
    find_realizer,
    is_n_saturated,
    is_weakly_n_saturated,
    oracle_is_n_saturated,
    random_graph,
    realizes,
)
from .morphisms import (
    GraphMap,
    LiftingReport,
    check_lifting_property,
    compose,
    is_homomorphism,
    is_quotient_map,
    is_strict,
    is_surjective,
)
from .serialize import (
    FormatError,
    decode_graph,
    decode_tower,
    encode_graph,
    encode_tower,
    level_to_dot,
    load_tower,
    save_tower,
)
from .towers import (
    AdjacencyStatus,
    NotSeparated,
    RealizerHandle,
    ThreadPrefix,
    TooManyConstraints,
    Tower,
    TowerReport,
    adjacency_status,
    canonical_extension,
    canonical_thread,
    check_realization,
    extend_realizer,
    extend_tower,
    new_tower,
    project,
    random_thread,
    realize_type,
    rebuild_tower,
    validate_prefix,
    verify_tower,
)

__all__ = [
    "AdjacencyStatus",
    "AttemptsExhausted",
    "BuildParams",
    "FiniteGraph",
    "FormatError",
    "GraphMap",
    "LiftingReport",
    "NotSeparated",
    "ProductVertex",
    "RealizerHandle",
    "SaturationReport",
    "ThreadPrefix",
    "TooManyConstraints",
    "Tower",
    "TowerReport",
    "TypeSpec",
    "adjacency_status",
    "attempt_seed",
    "build_extension",
    "canonical_extension",
    "canonical_thread",
    "check_lifting_property",
    "check_product_lifting",
    "check_realization",
    "compose",
    "decode_graph",
    "decode_tower",
    "encode_graph",
    "encode_tower",
    "extend_realizer",
    "extend_tower",
    "find_realizer",
    "is_homomorphism",
    "is_n_saturated",
    "is_quotient_map",
    "is_strict",
    "is_surjective",
    "is_weakly_n_saturated",
    "level_to_dot",
    "lifting_failure_bound",
    "load_tower",
    "minimal_certified_m",
    "new_tower",
    "oracle_is_n_saturated",
    "product_coords",
    "product_index",
    "project",
    "random_graph",
    "random_thread",
    "realize_type",
    "realizes",
    "rebuild_tower",
    "sample_product_graph",
    "saturation_failure_bound",
    "save_tower",
    "validate_prefix",
    "verify_tower",
]
