"""Axisymmetric swirl-free incompressible flow in the unit cylinder.

The solver advances Omega = omega^theta / r on a z-periodic slab of the
cylinder and recovers the velocity through a Dirichlet stream-function
solve. See the README for the command-line interface.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BlowUpError, ConfigurationError, CylflowError, FitError, NumericalInputError, ParityError,
    SupportMarginWarning, UndefinedRatioError,
)
from .grid import (  # noqa: E402
    Grid, Parity, ScalarField, VelocityField, apply_L5, apply_Lstream, build_grid, quadrature, support_margin,
)
from .elliptic import (  # noqa: E402
    StreamSolver, biot_savart, solve_stream, solve_stream_dense, velocity_from_stream, vorticity_from_velocity,
)
from .transport import (  # noqa: E402
    InitialDataSpec, SimConfig, SimState, compute_dt, make_initial_data, rhs, run, step,
)
from .diagnostics import (  # noqa: E402
    DiagnosticsRow, divergence_residual, energy_equality_residual, grad_u_lq_norm, kinetic_energy, lq_norm,
    poincare_ratio, yudovich_ratio_scan,
)
from .experiments import (  # noqa: E402
    PowerLawFit, SweepReport, decay_rate_check, fit_power_law, grid_convergence_study, viscosity_sweep,
)
from ._threads import set_threads  # noqa: E402
