"""Hot stencil kernels.

Two interchangeable implementations exist: loop kernels compiled with numba
(default) and a vectorized numpy path. Set ``CYLFLOW_NUMBA=0`` before import
to force the numpy path; it is also used automatically when numba is missing.
Results agree to rounding, not bitwise, so a run is reproducible only within
one backend.
"""

import os

from . import _numpy

CENTERED, HYBRID, UPWIND = _numpy.CENTERED, _numpy.HYBRID, _numpy.UPWIND

_want_numba = os.environ.get("CYLFLOW_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

if _want_numba:
    try:
        from . import _numba as _impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy
else:
    _impl = _numpy

BACKEND = "numba" if _impl is not _numpy else "numpy"

radial_operator = _impl.radial_operator
face_fluxes = _impl.face_fluxes
advection_divergence = _impl.advection_divergence
transport_rhs = _impl.transport_rhs
ssp_combine = _impl.ssp_combine
velocity_from_stream = _impl.velocity_from_stream
divergence = _impl.divergence
tridiag_solve = _impl.tridiag_solve

__all__ = [
    "BACKEND", "CENTERED", "HYBRID", "UPWIND",
    "radial_operator", "face_fluxes", "advection_divergence", "transport_rhs", "ssp_combine",
    "velocity_from_stream", "divergence", "tridiag_solve",
]
