"""Convex polytope geometry: hulls, intersections, moments, support and distances."""
from .core import BodyMoments, Halfspace, Polytope, contains, inradius_at, support
from .distance import hausdorff, min_norm_point, point_distance
from .hull import convex_hull, halfspace_intersection, polytope_from_representations
from .io import body_from_dict, body_to_dict, dump_body, load_body
from .moments import moments, simplex_moments


def cube(n, half_width=1.0):
    """The cube ``[-w, w]^n``."""
    import itertools

    import numpy as np

    pts = np.array(list(itertools.product([-half_width, half_width], repeat=n)))
    return convex_hull(pts)


__all__ = [
    "BodyMoments",
    "Halfspace",
    "Polytope",
    "body_from_dict",
    "body_to_dict",
    "contains",
    "convex_hull",
    "cube",
    "dump_body",
    "halfspace_intersection",
    "hausdorff",
    "inradius_at",
    "load_body",
    "min_norm_point",
    "moments",
    "point_distance",
    "polytope_from_representations",
    "simplex_moments",
    "support",
]
