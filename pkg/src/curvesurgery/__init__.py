"""Certified surgery decompositions of closed piecewise-geodesic curves.

The package splits closed curves over geodesic metric spaces into closed
pieces with certified Morrey-norm bounds and near-minimal total length,
and decomposes divergence-free edge flows into normalized curve atoms.
"""

from .spaces import (EuclideanSpace, GeodesicEdge, GeodesicSpace, Point,
                     TaxicabPlane, geodesic, space_from_descriptor)
from .curves import (PiecewiseGeodesicCurve, circle_distance,
                     close_with_geodesic, concatenate, from_vertices,
                     geodesic_sampling, point_curve, restrict,
                     small_edge_count)
from .morrey import MorreyEstimate, ball_mass, morrey_norm, morrey_upper_bound_edges
from .regularity import (DenVerdict, LsiVerdict, ViolatingInterval,
                         is_den_curve, is_lsi, minimal_violating_interval)
from .cuts import CutOutcome, CutVerificationError, basic_cut, type1_cut, type2_cut
from .surgery import (ETA_COEFF, ETA_CPRIME, THEOREM_CONSTANT, SurgeryCertificate,
                      SurgeryParams, SurgeryResult, eta_params,
                      lemma_length_factor, lemma_morrey_threshold, surgery,
                      surgery_eta, validate_eta_constants)
from .currents import (TestForm, WeightedCurrent, boundary_residual,
                       cone_form_battery, cone_function, coordinate_form,
                       evaluate, evaluate_battery, mass_upper_bound,
                       standard_battery)
from .flows import (AtomicDecomposition, EdgeFlow, FlowError,
                    atomic_decomposition, cycle_decompose,
                    cycles_reproduce_flow)
from .certify import Check, verify_atoms, verify_document, verify_surgery

__version__ = "0.1.0"

__all__ = [
    "AtomicDecomposition", "Check", "CutOutcome", "CutVerificationError",
    "DenVerdict", "ETA_COEFF", "ETA_CPRIME", "EdgeFlow", "EuclideanSpace",
    "FlowError", "GeodesicEdge", "GeodesicSpace", "LsiVerdict",
    "MorreyEstimate", "PiecewiseGeodesicCurve", "Point", "SurgeryCertificate",
    "SurgeryParams", "SurgeryResult", "THEOREM_CONSTANT", "TaxicabPlane",
    "TestForm", "ViolatingInterval", "WeightedCurrent",
    "atomic_decomposition", "ball_mass", "basic_cut", "boundary_residual",
    "circle_distance", "close_with_geodesic", "concatenate",
    "cone_form_battery", "cone_function", "coordinate_form",
    "cycle_decompose", "cycles_reproduce_flow", "eta_params", "evaluate",
    "evaluate_battery", "from_vertices", "geodesic", "geodesic_sampling",
    "is_den_curve", "is_lsi", "lemma_length_factor", "lemma_morrey_threshold",
    "mass_upper_bound", "minimal_violating_interval", "morrey_norm",
    "morrey_upper_bound_edges", "point_curve", "restrict", "small_edge_count",
    "space_from_descriptor", "standard_battery", "surgery", "surgery_eta",
    "type1_cut", "type2_cut", "validate_eta_constants", "verify_atoms",
    "verify_document", "verify_surgery",
]
