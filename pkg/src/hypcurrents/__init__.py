"""Computational toolkit for hyperbolic surfaces and geodesic currents."""

from .config import RunConfig, Tolerances, tolerance_context, tolerances
from .errors import *  # noqa: F401,F403
from .halfplane import (BoundaryPoint, GeodesicLine, Isometry, Point, axis,
                        axis_oriented, cross, crossing_param, distance,
                        fixed_points, is_hyperbolic, line_normalizer,
                        perpendicular_distance, perpendicular_foot_params,
                        point_line_distance, point_on_line, segment_distance,
                        translation_length)
from .trig import (CollarAngles, SurgeryProfile, bridge_arc_length,
                   collar_angle_identities, collar_width_arc,
                   collar_width_closed, cylinder_width, ell_min, epsilon_max,
                   length_saving_constant, mixed_collar_D, mixed_collar_delta,
                   pentagon_orthogonal_arc, solve_epsilon_for_length,
                   strip_angle, strip_half_width, surgered_alpha_length)
from .surface import (FNCoordinates, MarkedSurface, PantsGraph,
                      build_holonomy, theta_graph)
from .curves import (ArcSystem, Marking, OrthogonalArc, ThickComponent,
                     arc_intersection, bers_pants, component_contains,
                     component_systole, enumerate_classes,
                     geometric_intersection, is_simple, orthogonal_arc_system,
                     same_class, self_intersection, shortest_marking,
                     simple_classes, thick_components, twisting_number)

__version__ = "1.0.0"
