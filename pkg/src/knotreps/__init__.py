"""SU(2) representations of knot groups in pillowcase coordinates, Dehn-surgery
certificates and holonomy-perturbation curves."""

__version__ = "0.1.0"

from .su2 import (SU2Element, ClassFunction, NonCommuting, AnglePair, su2_mul,
                  su2_from_axis_angle, commuting_pair_angles, classfn_from_g, classfn_eval)
from .pillowcase import (PillowcasePoint, Slope, FillingLine, ArcS, Tube, InvalidSlope,
                         SlopeOutOfRange, canonicalize, pc_distance, shift_alpha_pi,
                         filling_lines, reducible_locus, reducible_points_for_slope,
                         build_arc_S, tube_contains)
from .knots import (KnotPresentation, ParseError, MultiComponentLink, InconsistentPD,
                    NotCoprime, parse_braid, parse_pd, torus_knot_presentation, mirror,
                    named_knot, evaluate_word)
from .solver import (RepPoint, PillowcaseImage, solve_at_alpha, pillowcase_image,
                     abelian_locus, intersect_with_line)
from .perturbation import (PerturbationFn, Infeasible, ConventionMismatch, construct_g,
                           perturbed_variety_is_empty, phi_from_g)
from .certify import (Certificate, PresentationMismatch, certify_surgery,
                      verify_certificate, proposition_pipeline)
