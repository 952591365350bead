"""Stream-function solve and the cylinder Biot-Savart law.

For axisymmetric flow without swirl the vector potential is the azimuthal
field phi e_theta with psi = r*phi the classical Stokes stream function, and

    -(d_rr + (1/r) d_r - 1/r^2 + d_zz) phi = omega^theta,   phi(1, z) = 0,
    u^r = -d_z phi,   u^z = d_r phi + phi / r.

The solve is a real FFT in the periodic z direction followed by one
tridiagonal solve per axial mode in r.
"""

from __future__ import annotations

import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from ._threads import fft_workers
from .errors import NumericalInputError
from .grid import Grid, Parity, ScalarField, VelocityField, _require, d_r, d_z


class StreamSolver:
    """Prefactored Dirichlet solver for the azimuthal stream component.

    ``wavenumbers`` are the continuous axial wavenumbers k_m = 2*pi*m/z_len of
    the real-FFT modes m = 0..nz//2. The factorizations use the symbol of the
    discrete second difference, ``kappa2 = (2 sin(pi m / nz) / hz)^2``, so
    that the solve inverts ``apply_Lstream`` to rounding.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        nr, nz = grid.shape
        hr, hz = grid.hr, grid.hz
        r = grid.r_nodes
        m = np.arange(nz // 2 + 1)
        self.wavenumbers = 2.0 * np.pi * m / grid.z_len
        self.kappa2 = (2.0 * np.sin(np.pi * m / nz) / hz) ** 2

        # -Lstream rows: lower*phi[i-1] + diag*phi[i] + upper*phi[i+1]
        lower = -(1.0 / hr**2 - 1.0 / (2.0 * r * hr))
        upper = -(1.0 / hr**2 + 1.0 / (2.0 * r * hr))
        diag0 = 2.0 / hr**2 + 1.0 / r**2
        diag0[0] -= lower[0]        # odd axis ghost: phi[-1] = -phi[0]
        # quadratic wall ghost: phi[nr] = -2 phi[nr-1] + phi[nr-2] / 3
        diag0[-1] -= 2.0 * upper[-1]
        lower[-1] += upper[-1] / 3.0
        lower[0] = 0.0
        upper[-1] = 0.0
        self.lower, self.upper, self.radial_diag = lower, upper, diag0

        diag = diag0[:, None] + self.kappa2[None, :]
        cp = np.empty_like(diag)
        inv_den = np.empty_like(diag)
        inv_den[0] = 1.0 / diag[0]
        cp[0] = upper[0] * inv_den[0]
        for i in range(1, nr):
            den = diag[i] - lower[i] * cp[i - 1]
            inv_den[i] = 1.0 / den
            cp[i] = upper[i] * inv_den[i]
        for a in (lower, upper, diag0, cp, inv_den, self.wavenumbers, self.kappa2):
            a.flags.writeable = False
        self._cp, self._inv_den = cp, inv_den

    @property
    def n_modes(self):
        return self.kappa2.size

    def mode_matrix(self, m: int) -> np.ndarray:
        """Dense radial matrix -(Lstream) for axial mode m, as factorized."""
        a = np.diag(self.radial_diag + self.kappa2[m])
        a += np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)
        return a

    def solve_array(self, rhs: np.ndarray) -> np.ndarray:
        nz = self.grid.nz
        w = fft_workers()
        hat = scipy.fft.rfft(rhs, axis=1, workers=w)
        sol = kernels.tridiag_solve(self.lower, self._cp, self._inv_den, hat)
        return scipy.fft.irfft(sol, n=nz, axis=1, workers=w)


def solve_stream(omega_theta: ScalarField, solver: StreamSolver) -> ScalarField:
    _require(omega_theta, Parity.ODD, "solve_stream")
    if not np.all(np.isfinite(omega_theta.values)):
        raise NumericalInputError("omega_theta contains non-finite values")
    return ScalarField(solver.grid, solver.solve_array(omega_theta.values), Parity.ODD)


def solve_stream_dense(omega_theta: ScalarField) -> ScalarField:
    """Reference solve of the same discrete system by sparse LU on the full grid.

    Only for cross-validating ``solve_stream``; cost grows much faster.
    """
    _require(omega_theta, Parity.ODD, "solve_stream_dense")
    g = omega_theta.grid
    nr, nz = g.shape
    r = g.r_nodes
    idx = np.arange(nr * nz).reshape(nr, nz)
    rows, cols, vals = [], [], []

    def add(i, j, ii, jj, v):
        rows.append(idx[i, j])
        cols.append(idx[ii, jj % nz])
        vals.append(v)

    for i in range(nr):
        a = 1.0 / g.hr**2 - 1.0 / (2.0 * r[i] * g.hr)
        c = 1.0 / g.hr**2 + 1.0 / (2.0 * r[i] * g.hr)
        for j in range(nz):
            centre = -2.0 / g.hr**2 - 1.0 / r[i] ** 2 - 2.0 / g.hz**2
            if i == 0:
                centre -= a
            else:
                add(i, j, i - 1, j, -a)
            if i == nr - 1:
                centre -= 2.0 * c
                add(i, j, i - 1, j, -c / 3.0)
            else:
                add(i, j, i + 1, j, -c)
            add(i, j, i, j + 1, -1.0 / g.hz**2)
            add(i, j, i, j - 1, -1.0 / g.hz**2)
            add(i, j, i, j, -centre)
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(nr * nz, nr * nz))
    phi = spla.spsolve(mat, omega_theta.values.ravel())
    return ScalarField(g, phi.reshape(nr, nz), Parity.ODD)


def velocity_from_stream(phi: ScalarField) -> VelocityField:
    """Collocated velocity u^r = -d_z phi, u^z = (1/r) d_r(r phi).

    Central differences throughout; the wall ghost of phi is the quadratic
    extrapolation through phi(1) = 0. ``divergence_residual`` uses the same
    ghosts on u^r, so div(u) vanishes to rounding for any phi.
    """
    _require(phi, Parity.ODD, "velocity_from_stream")
    g = phi.grid
    ur, uz = kernels.velocity_from_stream(phi.values, g.r_nodes, g.hr, g.hz)
    return VelocityField.from_arrays(g, ur, uz)


def face_transport(phi: ScalarField | np.ndarray, grid: Grid | None = None):
    """Face transports (r u^r on radial faces, u^z on axial faces) from corner psi.

    These are what the advection scheme uses; their finite-volume divergence
    is zero to rounding.
    """
    if isinstance(phi, ScalarField):
        grid, phi = phi.grid, phi.values
    return kernels.face_fluxes(phi, grid.r_nodes, grid.hr, grid.hz)


def biot_savart(Omega: ScalarField, solver: StreamSolver) -> VelocityField:
    """u = curl (-Delta_D)^{-1} curl u, fed with Omega = omega^theta / r."""
    _require(Omega, Parity.EVEN, "biot_savart")
    g = Omega.grid
    omega_theta = ScalarField(g, g.r * Omega.values, Parity.ODD)
    return velocity_from_stream(solve_stream(omega_theta, solver))


def vorticity_from_velocity(u: VelocityField) -> ScalarField:
    """omega^theta = d_z u^r - d_r u^z."""
    g = u.grid
    w = d_z(u.ur.values, g) - d_r(u.uz.values, g, Parity.EVEN)
    return ScalarField(g, w, Parity.ODD)
