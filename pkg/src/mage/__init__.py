"""Exact computer algebra for second-order PDEs on the Lagrangian Grassmannian chart.

Everything is computed over arbitrary-precision rationals: symbols and
iterated symbols of chart functions, Monge-Ampere / complete-exceptionality
tests, Plucker minors and rank-one lines, fundamental forms of graph
hypersurfaces, the conformal symmetries of the determinant cubic, and the
polynomial kernel of the first invariant operator on sections.
"""

from .poly import (
    CapExceededError,
    DegenerateError,
    MageError,
    MultiPoly,
    PoleError,
    RationalFunction,
    poly_gcd,
    second_jet_vars,
)
from .linalg import QMatrix, nullspace_dense, sparse_nullspace
from .exprparse import ParseError, format_rf, parse, lower, parse_expression, point_from_string
from .symbols import (
    ClassificationResult,
    ExceptionalityReport,
    PDEFunction,
    SymbolForm,
    check_quasilinear_system,
    classify,
    exceptionality_at_roots,
    is_completely_exceptional,
    iterated_symbol,
    symbol,
)
from .lgrass import (
    HyperplaneCoefficients,
    LagrangianPlane,
    PlueckerVector,
    hyperplane_section,
    ma_coefficients_n2,
    minor_relations,
    minors_chart,
    rank_one_line,
    rational_inverse,
    tangent_rank,
)
from .conformal import (
    FundamentalForm,
    PhiReport,
    VectorFieldPoly,
    conformal_check,
    det_I_discriminant,
    fundamental_forms,
    graph_fundamental_forms,
    hyperplane_test,
    phi_obstruction,
    s2tn_dimension,
    s2tn_membership,
    sp6_generators,
    stretching_field,
    tn_form,
)
from .bgg import KernelBasis, XiPolynomial, bgg_apply, in_kernel_span, kernel_basis, section_function

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
