"""Shadowing for hyperbolic group boundary actions, at desk scale."""

from .boundary import (
    BoundaryPoint,
    CanonicalDSG,
    Cover,
    TableDSG,
    act,
    cover_for_l,
    dsg_from_ray,
    lebesgue_l,
    neighborhood_contains,
    ray_from_dsg,
    shift,
    translated_membership,
    verify_dsg,
)
from .geometry import (
    DivergenceConstants,
    HyperbolicityCertificate,
    MorseConstant,
    QuasiGeodesicParams,
    certify_delta,
    certify_morse,
    check_closeness,
    divergence_constants,
    fellow_travel_upgrade,
    glue,
    is_quasi_geodesic,
    local_to_global,
    validate_fellow_travel,
)
from .group import (
    GeneratorAlphabet,
    GroupContext,
    GroupElement,
    Segment,
    ball,
    distinguished_structure,
    enumerate_geodesics,
    normal_form,
    word_metric,
)
from .shadowing import (
    PseudoOrbit,
    ShadowingConstants,
    check_claim,
    check_consistency,
    check_pseudo_orbit,
    construct_path,
    derive_constants,
    make_pseudo_orbit,
    shadow,
    straighten,
    verify_shadowing,
)

__all__ = [
    "BoundaryPoint", "CanonicalDSG", "Cover", "TableDSG", "act", "cover_for_l",
    "dsg_from_ray", "lebesgue_l", "neighborhood_contains", "ray_from_dsg", "shift",
    "translated_membership", "verify_dsg",
    "DivergenceConstants", "HyperbolicityCertificate", "MorseConstant",
    "QuasiGeodesicParams", "certify_delta", "certify_morse", "check_closeness",
    "divergence_constants", "fellow_travel_upgrade", "glue", "is_quasi_geodesic",
    "local_to_global", "validate_fellow_travel",
    "GeneratorAlphabet", "GroupContext", "GroupElement", "Segment", "ball",
    "distinguished_structure", "enumerate_geodesics", "normal_form", "word_metric",
    "PseudoOrbit", "ShadowingConstants", "check_claim", "check_consistency",
    "check_pseudo_orbit", "construct_path", "derive_constants", "make_pseudo_orbit",
    "shadow", "straighten", "verify_shadowing",
]
