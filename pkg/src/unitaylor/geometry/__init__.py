"""Planar domains, boundary portions, sampled compacts and their certificates."""
from .compacts import (Annulus, Ball, Box, Descriptor, Empty, ExhaustionCell, PlanarCompact, PointSet, Polyline,
                       ProductCompact, Segment, Shrunk, Union, descriptor_from_json)
from .connectivity import ConnectivityCertificate, complement_connected, domain_complement_connected
from .domains import (Arc, BoundaryPortion, DenseMarks, Disk, DomainSpec, HalfPlane, Polygon, PortionClosure, Strip,
                      complement_pieces, dist_to_boundary_minus, domain_from_json, portion_from_json)
from .enumeration import ENUMERATION_RULE, HorizonExceeded, decode_tau, enumerate_K_tau, enumeration_horizon
from .exhaustion import FeasibilityReport, absorbing_family_check, absorption_level, exhaustion_set, shrink_from_portion
from .scene import DomainScene, EnumerationConfig, GridConfig, Mu, default_outside_compacts, distance_to_closed_domain

__all__ = [name for name in dir() if not name.startswith("_")]
