"""Geodesics, metrics, angles and distances of the five geometries."""

from .metric import (MetricAtPoint, angle, cartesian_metric, from_chart, metric_tensor,
                     sl2r_chart, sl2r_from_chart, to_chart, volume_element)
from .exp import (GeodesicParams, exp_origin, exp_origin_many, initial_tangent, nil_exp,
                  sl2r_closed_form)
from .ode import GeodesicArc, christoffel_fd, geodesic_ode
from .nil import (NilProjection, fibre_projection_nil, nil_cylinder_radius,
                  nil_radius_from_cylinder, nil_sphere_cross_section)
from .solve import (AmbiguousGeodesicError, DistanceError, distance, distance_value,
                    h2xr_distance, inverse_origin, s2xr_distance)
