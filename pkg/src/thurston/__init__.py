"""Numerical geometry of S2xR, H2xR, Nil, SL2R and Sol in the projective model."""

from .model import SpaceId, affine, hpoint
from .geodesics import GeodesicParams, distance, distance_value, exp_origin

__version__ = "0.1.0"

__all__ = ["SpaceId", "hpoint", "affine", "GeodesicParams", "exp_origin", "distance", "distance_value"]
