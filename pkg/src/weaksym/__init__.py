"""weaksym: weak-symmetry certification and unravelling toolkit for
Markovian open quantum dynamics."""

__version__ = "0.1.0"

from .lindblad import Representation  # noqa: E402,F401
from .sjed import SjedPartition, build_sjeds  # noqa: E402,F401
from .symmetry import (  # noqa: E402,F401
    SymmetryOperator,
    SymmetryReport,
    build_symmetry_report,
)
