"""Workbench for the affine fragment of continuous logic on finite metric structures."""

from .convex import (
    FaceVerdict, LinearConstraint, extreme_subset, in_hull, is_face_region, lp_solve,
    supporting_functional, verify_face_verdict,
)
from .corpus import load_corpus
from .extremal import (
    SubmodelCandidate, SuiteReport, is_elementary_submodel, is_extremal, maximizer_closure,
    minimal_submodel,
)
from .fileformat import format_structure, load_structure, parse_structure_text
from .parser import parse_condition, parse_conditions, parse_formula, print_formula
from .structures import (
    FiniteStructure, eval_formula, make_structure, tuple_metric, validate_structure,
)
from .syntax import Signature
from .typespace import (
    Fragment, FragmentParams, TypeSpace, TypeVector, compile_partial_type, extreme_types,
    generate_fragment, is_extreme_over, is_face_partial_type, realized_types, restrict_type,
    sigma_face, term_closure, tp_over, type_metric,
)
from .ultramean import Charge, build_ultramean, check_los

__version__ = "0.1.0"
