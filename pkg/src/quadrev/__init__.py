"""Quadratic reverses of the generalized triangle inequality in inner product spaces.

Detect hypotheses on a finite family of vectors, evaluate and certify the
corresponding bounds, construct equality cases, confirm best constants
numerically, and carry the band bounds over to weighted integrals.
"""
__version__ = "0.1.0"

from .core import VectorFamily, GramSummary, gram_summary, inner, norm, schwarz_gap, defect  # noqa: E402
from .bounds import TheoremId, BoundReport, evaluate, tightest  # noqa: E402

__all__ = [
    "__version__", "VectorFamily", "GramSummary", "gram_summary", "inner", "norm",
    "schwarz_gap", "defect", "TheoremId", "BoundReport", "evaluate", "tightest",
]
