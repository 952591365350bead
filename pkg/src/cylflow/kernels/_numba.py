"""Loop kernels compiled with numba; same contracts as ``_numpy``."""

import numpy as np
from numba import njit

CENTERED, HYBRID, UPWIND = 0, 1, 2

_opts = dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


@njit(**_opts)
def radial_operator(f, r, hr, hz, c1, c0, axis_sign, wall):
    nr, nz = f.shape
    out = np.empty((nr, nz))
    ihr2 = 1.0 / (hr * hr)
    ihz2 = 1.0 / (hz * hz)
    for i in range(nr):
        a = c1 / (r[i] * 2.0 * hr)
        s = c0 / (r[i] * r[i])
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            jm = j - 1 if j > 0 else nz - 1
            mid = f[i, j]
            dn = f[i - 1, j] if i > 0 else axis_sign * f[0, j]
            if i < nr - 1:
                up = f[i + 1, j]
            elif wall == 1:
                up = -f[nr - 1, j]
            else:
                up = -2.0 * f[nr - 1, j] + f[nr - 2, j] / 3.0
            out[i, j] = ((up - 2.0 * mid + dn) * ihr2 + a * (up - dn) - s * mid
                         + (f[i, jp] - 2.0 * mid + f[i, jm]) * ihz2)
    return out


@njit(**_opts)
def face_fluxes(phi, r, hr, hz):
    nr, nz = phi.shape
    psi = np.zeros((nr + 1, nz))
    for k in range(1, nr):
        rf = k * hr
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            psi[k, j] = rf * 0.25 * (phi[k - 1, j] + phi[k, j] + phi[k - 1, jp] + phi[k, jp])
    fr = np.empty((nr + 1, nz))
    for k in range(nr + 1):
        for j in range(nz):
            jm = j - 1 if j > 0 else nz - 1
            fr[k, j] = -(psi[k, j] - psi[k, jm]) / hz
    fz = np.empty((nr, nz))
    for i in range(nr):
        c = 1.0 / (hr * r[i])
        for j in range(nz):
            fz[i, j] = (psi[i + 1, j] - psi[i, j]) * c
    return fr, fz


@njit(**_opts)
def advection_divergence(q, fr, fz, r, hr, hz, nu, scheme):
    nr, nz = q.shape
    out = np.zeros((nr, nz))
    ihr2 = 1.0 / (hr * hr)
    zlim = 2.0 * nu / hz
    # radial faces k = 1..nr-1 between rows k-1 and k
    for k in range(1, nr):
        rl, rr = r[k - 1], r[k]
        cl = 1.0 / (rl * hr)
        cr = 1.0 / (rr * hr)
        dl = nu * (ihr2 + 1.5 * cl)
        dr = nu * (ihr2 - 1.5 * cr)
        for j in range(nz):
            F = fr[k, j]
            if scheme == 0:
                w = 0.5
            else:
                w = 1.0 if F > 0.0 else 0.0
                if scheme == 1 and dl - 0.5 * F * cl >= 0.0 and dr + 0.5 * F * cr >= 0.0:
                    w = 0.5
            flux = F * (w * q[k - 1, j] + (1.0 - w) * q[k, j])
            out[k - 1, j] += flux * cl
            out[k, j] -= flux * cr
    # axial faces j+1/2 between columns j and j+1
    ihz = 1.0 / hz
    for i in range(nr):
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            F = fz[i, j]
            if scheme == 0:
                w = 0.5
            else:
                w = 1.0 if F > 0.0 else 0.0
                if scheme == 1 and abs(F) <= zlim:
                    w = 0.5
            flux = F * (w * q[i, j] + (1.0 - w) * q[i, jp]) * ihz
            out[i, j] += flux
            out[i, jp] -= flux
    return out


@njit(**_opts)
def transport_rhs(q, phi, r, hr, hz, nu, scheme):
    """-div(u q) + nu * (d_rr + (3/r) d_r + d_zz) q with u from phi, linear wall ghost."""
    nr, nz = q.shape
    psi = np.zeros((nr + 1, nz))
    for k in range(1, nr):
        rf = k * hr
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            psi[k, j] = rf * 0.25 * (phi[k - 1, j] + phi[k, j] + phi[k - 1, jp] + phi[k, jp])
    out = np.zeros((nr, nz))
    ihr2 = 1.0 / (hr * hr)
    ihz = 1.0 / hz
    ihz2 = ihz * ihz
    zlim = 2.0 * nu / hz
    for k in range(1, nr):
        cl = 1.0 / (r[k - 1] * hr)
        cr = 1.0 / (r[k] * hr)
        dl = nu * (ihr2 + 1.5 * cl)
        dr = nu * (ihr2 - 1.5 * cr)
        for j in range(nz):
            jm = j - 1 if j > 0 else nz - 1
            F = -(psi[k, j] - psi[k, jm]) * ihz
            if scheme == 0:
                w = 0.5
            else:
                w = 1.0 if F > 0.0 else 0.0
                if scheme == 1 and dl - 0.5 * F * cl >= 0.0 and dr + 0.5 * F * cr >= 0.0:
                    w = 0.5
            flux = F * (w * q[k - 1, j] + (1.0 - w) * q[k, j])
            out[k - 1, j] -= flux * cl
            out[k, j] += flux * cr
    for i in range(nr):
        c = 1.0 / (hr * r[i])
        a = 3.0 / (r[i] * 2.0 * hr)
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            F = (psi[i + 1, j] - psi[i, j]) * c
            if scheme == 0:
                w = 0.5
            else:
                w = 1.0 if F > 0.0 else 0.0
                if scheme == 1 and abs(F) <= zlim:
                    w = 0.5
            flux = F * (w * q[i, j] + (1.0 - w) * q[i, jp]) * ihz
            out[i, j] -= flux
            out[i, jp] += flux
            if nu != 0.0:
                mid = q[i, j]
                dn = q[i - 1, j] if i > 0 else mid
                up = q[i + 1, j] if i < nr - 1 else -mid
                jm = j - 1 if j > 0 else nz - 1
                out[i, j] += nu * ((up - 2.0 * mid + dn) * ihr2 + a * (up - dn)
                                   + (q[i, jp] - 2.0 * mid + q[i, jm]) * ihz2)
    return out


@njit(**_opts)
def ssp_combine(a, x, b, y, dt, k):
    """a*x + b*(y + dt*k), elementwise."""
    nr, nz = x.shape
    out = np.empty((nr, nz))
    for i in range(nr):
        for j in range(nz):
            out[i, j] = a * x[i, j] + b * (y[i, j] + dt * k[i, j])
    return out


@njit(**_opts)
def velocity_from_stream(phi, r, hr, hz):
    nr, nz = phi.shape
    ur = np.empty((nr, nz))
    uz = np.empty((nr, nz))
    rw = r[nr - 1] + hr
    for i in range(nr):
        c = 1.0 / (2.0 * hr * r[i])
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            jm = j - 1 if j > 0 else nz - 1
            ur[i, j] = -(phi[i, jp] - phi[i, jm]) / (2.0 * hz)
            if i > 0:
                lo = r[i - 1] * phi[i - 1, j]
            else:
                lo = r[0] * phi[0, j]
            if i < nr - 1:
                hi = r[i + 1] * phi[i + 1, j]
            else:
                hi = rw * (-2.0 * phi[nr - 1, j] + phi[nr - 2, j] / 3.0)
            uz[i, j] = (hi - lo) * c
    return ur, uz


@njit(**_opts)
def divergence(ur, uz, r, hr, hz):
    nr, nz = ur.shape
    out = np.empty((nr, nz))
    rw = r[nr - 1] + hr
    for i in range(nr):
        c = 1.0 / (2.0 * hr * r[i])
        for j in range(nz):
            jp = j + 1 if j + 1 < nz else 0
            jm = j - 1 if j > 0 else nz - 1
            if i > 0:
                lo = r[i - 1] * ur[i - 1, j]
            else:
                lo = r[0] * ur[0, j]
            if i < nr - 1:
                hi = r[i + 1] * ur[i + 1, j]
            else:
                hi = rw * (-2.0 * ur[nr - 1, j] + ur[nr - 2, j] / 3.0)
            out[i, j] = (hi - lo) * c + (uz[i, jp] - uz[i, jm]) / (2.0 * hz)
    return out


@njit(**_opts)
def tridiag_solve(lower, cp, inv_den, rhs):
    nr, nm = rhs.shape
    d = np.empty_like(rhs)
    for m in range(nm):
        d[0, m] = rhs[0, m] * inv_den[0, m]
    for i in range(1, nr):
        li = lower[i]
        for m in range(nm):
            d[i, m] = (rhs[i, m] - li * d[i - 1, m]) * inv_den[i, m]
    for i in range(nr - 2, -1, -1):
        for m in range(nm):
            d[i, m] -= cp[i, m] * d[i + 1, m]
    return d
