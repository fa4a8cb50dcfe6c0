"""Abel-Jacobi images of explicit Heegner cycles on Kuga-Sato varieties over X_0(N)."""

__version__ = "0.1.0"

from .aj import AJResult, ExactScalar, aj_constant, aj_representative, heegner_line_integral, kernel_integral
from .asym import AsymptoticDatum, I_closed, P_polynomial, datum, lem_est_bound, ratio_J, sweep_row
from .errors import (
    DomainError,
    HeegnerError,
    InsufficientCoefficients,
    NewformParseError,
    PrecisionExhausted,
    ToleranceNotMet,
    ValidationError,
)
from .isogeny import INF, CMPoint, LevelStructure, enumerate_isogeny_classes, level_structure_from_t, tau_pq_t, tau_q_beta, tau_t
from .modforms import Newform, cusp_constant, parse_newform
from .numerics import BallComplex, PrecisionContext
from .periods import j_functional
from .primes import index_stream, theorem_q_search
from .quadfield import FieldElement, ImagQuadField

__all__ = [name for name in dir() if not name.startswith("_")]
