"""Numerical homogenization of oscillatory systems dX/dt = F(X/eps).

Modules: ``field`` (periodic fields and builtins), ``integrate`` (adaptive
and oracle solvers), ``averaging`` (delta(eps) and the Bogolyubov
comparison), ``homog1d``, ``shear``, ``planar``, ``transport``, and the
experiment plumbing in ``experiments``, ``config`` and ``runner``.
"""

__version__ = "0.1.0"

from .averaging import bogolyubov_compare, delta_of_eps, g0_limit, time_average
from .field import (FourierSeries, PeriodicScalarField, PeriodicVectorField, ScalarField, builtin,
                    describe_builtins)
from .homog1d import homogenized_1d, invert_trajectory, rate_1d, solve_eps_1d
from .integrate import Trajectory, oracle_solve, solve_ivp, solve_oscillatory
from .planar import build_tassa_chart, effective_drift, planar_convergence, solve_liouville
from .report import ConvergenceReport, fit_rate
from .shear import ResonanceError, build_corrector, diophantine_badness, shear_convergence
from .transport import TransportProblem, transport_error, transport_solve_eps

__all__ = [
    "__version__", "bogolyubov_compare", "delta_of_eps", "g0_limit", "time_average",
    "FourierSeries", "PeriodicScalarField", "PeriodicVectorField", "ScalarField", "builtin",
    "describe_builtins", "homogenized_1d", "invert_trajectory", "rate_1d", "solve_eps_1d",
    "Trajectory", "oracle_solve", "solve_ivp", "solve_oscillatory", "build_tassa_chart",
    "effective_drift", "planar_convergence", "solve_liouville", "ConvergenceReport", "fit_rate",
    "ResonanceError", "build_corrector", "diophantine_badness", "shear_convergence",
    "TransportProblem", "transport_error", "transport_solve_eps",
]
