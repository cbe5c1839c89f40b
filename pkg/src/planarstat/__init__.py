"""Planar section statistics of Platonic solid vertex subsets."""

from .field import PHI, FieldElement, FieldVec3
from .geometry import PAIR_S, PAIR_T, SOLID_IDS, are_congruent, build_solid, canonical_subset, mask_of
from .planes import classify_plane_types, enumerate_planes
from .search import find_homometric_pairs, full_sweep, orbit_representatives
from .stats import PlanarStatistic, StatEngine, class_key, planar_statistic, statistics_equal

__all__ = [
    "PHI", "FieldElement", "FieldVec3",
    "PAIR_S", "PAIR_T", "SOLID_IDS", "are_congruent", "build_solid", "canonical_subset", "mask_of",
    "classify_plane_types", "enumerate_planes",
    "find_homometric_pairs", "full_sweep", "orbit_representatives",
    "PlanarStatistic", "StatEngine", "class_key", "planar_statistic", "statistics_equal",
]

__version__ = "0.1.0"
