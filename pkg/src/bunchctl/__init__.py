"""Exact computations with bunched rings, their varieties and Cox ring modifications."""

from .bunch import BunchedRing, ChamberFan, bunch_from_chamber, chamber_fan, git_cone, image_fan, orbit_cones
from .cones import Cone, Fan, gale_transform, stellar_subdivide, unimodular_equivalence
from .errors import (
    BunchError,
    InadmissibleError,
    ParseError,
    SizeLimitError,
    UnsupportedError,
    ValidationError,
)
from .geometry import VarietyReport, variety_report
from .groups import AbelianGroup, GradingMap, Subgroup, hermite_normal_form, smith_normal_form
from .modify import ModelState, blow_up, contract, find_contractions, reduce_to_minimal
from .polynomials import Attestations, CoxPresentation, GradedPoly

__version__ = "0.1.0"

__all__ = [
    "AbelianGroup",
    "Attestations",
    "BunchError",
    "BunchedRing",
    "ChamberFan",
    "Cone",
    "CoxPresentation",
    "Fan",
    "GradedPoly",
    "GradingMap",
    "InadmissibleError",
    "ModelState",
    "ParseError",
    "SizeLimitError",
    "Subgroup",
    "UnsupportedError",
    "ValidationError",
    "VarietyReport",
    "blow_up",
    "bunch_from_chamber",
    "chamber_fan",
    "contract",
    "find_contractions",
    "gale_transform",
    "git_cone",
    "hermite_normal_form",
    "image_fan",
    "orbit_cones",
    "reduce_to_minimal",
    "smith_normal_form",
    "stellar_subdivide",
    "unimodular_equivalence",
    "variety_report",
]
