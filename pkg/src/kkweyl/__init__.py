"""Conformal tensors, Kaluza-Klein reductions and Einstein-Weyl checks."""

from ._backend import BACKEND
from .conformal import conformal_residual, cotton, schouten, weyl
from .curvature import build_frame, christoffel, ricci, riemann
from .dsl import MetricSpec, ParseError, load_metric_file, parse_metric_file
from .einstein_weyl import WeylStructure, ew_residual, from_reduction
from .jets import Jet, JetSpace, jet_apply, jet_coordinate, space
from .kaluza_klein import KKData, lift_metric, reduced_cotton_3to2, reduced_weyl_4to3, validate_reduction
from .solutions import load_fixture

__version__ = "0.1.0"
__all__ = ["BACKEND", "Jet", "JetSpace", "KKData", "MetricSpec", "ParseError", "WeylStructure",
           "build_frame", "christoffel", "conformal_residual", "cotton", "ew_residual", "from_reduction",
           "jet_apply", "jet_coordinate", "lift_metric", "load_fixture", "load_metric_file",
           "parse_metric_file", "reduced_cotton_3to2", "reduced_weyl_4to3", "ricci", "riemann",
           "schouten", "space", "validate_reduction", "weyl"]
