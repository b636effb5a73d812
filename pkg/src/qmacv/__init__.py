"""Exact verification toolkit for a family of commuting q-difference and
integral operators on formal power series in zeta_{i+1}/zeta_i.

Modules: scalar/qadic/rings (coefficients), series, qhyper, operators,
spectral, quasi, fock; checks and cli drive the verification suite.
"""

from .report import CheckReport
from .scalar import ParamScalar
from .series import RatioSeries

__version__ = "0.1.0"

__all__ = ["CheckReport", "ParamScalar", "RatioSeries", "__version__"]
