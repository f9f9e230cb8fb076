"""Pancake-cut districting, metric zones and map projection distortion."""

from ._core import (
    Districting,
    InvariantViolation,
    SizeError,
    clip_polygon,
    count_outcomes,
    distortion,
    district,
    find_cut,
    l1_distance,
    l2_distance,
    polygon_area,
    project,
    region_map_area,
    spherical_triangle_angle_sum,
    zone_contains,
)

__all__ = [
    "Districting",
    "InvariantViolation",
    "SizeError",
    "clip_polygon",
    "count_outcomes",
    "distortion",
    "district",
    "find_cut",
    "l1_distance",
    "l2_distance",
    "polygon_area",
    "project",
    "region_map_area",
    "spherical_triangle_angle_sum",
    "zone_contains",
]
