"""Vectorized numpy implementations of the stencil kernels.

Array layout everywhere: axis 0 is radial (``nr`` cell-centred nodes),
axis 1 is axial (``nz`` periodic nodes). ``r`` is the 1-D array of radial
node positions.
"""

import numpy as np

CENTERED, HYBRID, UPWIND = 0, 1, 2


def _pad_r(f, axis_sign, wall):
    """Return f with one ghost row on each radial side.

    wall == 1: linear Dirichlet ghost (-f[n-1]);
    wall == 2: quadratic Dirichlet ghost through a zero wall value.
    """
    nr, nz = f.shape
    g = np.empty((nr + 2, nz))
    g[1:-1] = f
    g[0] = axis_sign * f[0]
    if wall == 1:
        g[-1] = -f[-1]
    else:
        g[-1] = -2.0 * f[-1] + f[-2] / 3.0
    return g


def radial_operator(f, r, hr, hz, c1, c0, axis_sign, wall):
    """(d_rr + (c1/r) d_r - c0/r^2 + d_zz) f with parity/Dirichlet ghosts.

    ``wall`` selects the wall ghost as in ``_pad_r``.
    """
    g = _pad_r(f, axis_sign, wall)
    rc = r[:, None]
    up, mid, dn = g[2:], g[1:-1], g[:-2]
    out = (up - 2.0 * mid + dn) / hr**2
    out += (c1 / rc) * (up - dn) / (2.0 * hr)
    if c0 != 0.0:
        out -= (c0 / rc**2) * mid
    out += (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / hz**2
    return out


def face_fluxes(phi, r, hr, hz):
    """Face transports derived from corner values of psi = r*phi.

    Returns ``fr`` of shape (nr+1, nz) holding r*u^r on radial faces
    (row k sits at r = k*hr; rows 0 and nr are the axis and the wall, both
    zero) and ``fz`` of shape (nr, nz) holding u^z on the axial face between
    z-nodes j and j+1.
    """
    nr, nz = phi.shape
    rf = np.arange(nr + 1) * hr
    s = phi + np.roll(phi, -1, axis=1)
    psi = np.zeros((nr + 1, nz))
    psi[1:nr] = rf[1:nr, None] * 0.25 * (s[:-1] + s[1:])
    fr = -(psi - np.roll(psi, 1, axis=1)) / hz
    fz = (psi[1:] - psi[:-1]) / (hr * r[:, None])
    return fr, fz


def advection_divergence(q, fr, fz, r, hr, hz, nu, scheme):
    """Conservative flux divergence (1/r) d_r(r u^r q) + d_z(u^z q)."""
    nr, nz = q.shape
    rc = r[:, None]

    # radial faces 1..nr-1 between rows k-1 (L) and k (R)
    ql, qr_ = q[:-1], q[1:]
    F = fr[1:nr]
    if scheme == CENTERED:
        wl = np.full(F.shape, 0.5)
    else:
        up = np.where(F > 0.0, 1.0, 0.0)
        if scheme == UPWIND:
            wl = up
        else:
            rl, rr = rc[:-1], rc[1:]
            ok_l = nu * (1.0 / hr**2 + 1.5 / (rl * hr)) - F / (2.0 * rl * hr) >= 0.0
            ok_r = nu * (1.0 / hr**2 - 1.5 / (rr * hr)) + F / (2.0 * rr * hr) >= 0.0
            wl = np.where(ok_l & ok_r, 0.5, up)
    flux_r = np.zeros((nr + 1, nz))
    flux_r[1:nr] = F * (wl * ql + (1.0 - wl) * qr_)

    # axial faces j+1/2 between columns j (L) and j+1 (R)
    qn = np.roll(q, -1, axis=1)
    if scheme == CENTERED:
        wz = np.full(fz.shape, 0.5)
    else:
        upz = np.where(fz > 0.0, 1.0, 0.0)
        if scheme == UPWIND:
            wz = upz
        else:
            okz = np.abs(fz) <= 2.0 * nu / hz
            wz = np.where(okz, 0.5, upz)
    flux_z = fz * (wz * q + (1.0 - wz) * qn)

    out = (flux_r[1:] - flux_r[:-1]) / (rc * hr)
    out += (flux_z - np.roll(flux_z, 1, axis=1)) / hz
    return out


def transport_rhs(q, phi, r, hr, hz, nu, scheme):
    """-div(u q) + nu * (d_rr + (3/r) d_r + d_zz) q with u from phi, linear wall ghost."""
    fr, fz = face_fluxes(phi, r, hr, hz)
    out = -advection_divergence(q, fr, fz, r, hr, hz, nu, scheme)
    if nu != 0.0:
        out += nu * radial_operator(q, r, hr, hz, 3.0, 0.0, 1.0, 1)
    return out


def ssp_combine(a, x, b, y, dt, k):
    """a*x + b*(y + dt*k), elementwise."""
    return a * x + b * (y + dt * k)


def velocity_from_stream(phi, r, hr, hz):
    """Collocated (u^r, u^z) from the azimuthal stream component."""
    ur = -(np.roll(phi, -1, axis=1) - np.roll(phi, 1, axis=1)) / (2.0 * hz)
    g = _pad_r(phi, -1.0, 2)
    nr = phi.shape[0]
    rg = np.empty(nr + 2)
    rg[1:-1] = r
    rg[0] = -r[0]
    rg[-1] = r[-1] + hr
    psi = rg[:, None] * g
    uz = (psi[2:] - psi[:-2]) / (2.0 * hr * r[:, None])
    return ur, uz


def divergence(ur, uz, r, hr, hz):
    """Collocated (1/r) d_r(r u^r) + d_z u^z; ghosts paired with velocity_from_stream."""
    g = _pad_r(ur, -1.0, 2)
    nr = ur.shape[0]
    rg = np.empty(nr + 2)
    rg[1:-1] = r
    rg[0] = -r[0]
    rg[-1] = r[-1] + hr
    m = rg[:, None] * g
    out = (m[2:] - m[:-2]) / (2.0 * hr * r[:, None])
    out += (np.roll(uz, -1, axis=1) - np.roll(uz, 1, axis=1)) / (2.0 * hz)
    return out


def tridiag_solve(lower, cp, inv_den, rhs):
    """Thomas solve for every column of ``rhs`` with prefactored coefficients.

    ``lower`` has shape (nr,), ``cp`` and ``inv_den`` shape (nr, nm); ``rhs``
    is complex with shape (nr, nm).
    """
    nr = rhs.shape[0]
    d = np.empty_like(rhs)
    d[0] = rhs[0] * inv_den[0]
    for i in range(1, nr):
        d[i] = (rhs[i] - lower[i] * d[i - 1]) * inv_den[i]
    for i in range(nr - 2, -1, -1):
        d[i] -= cp[i] * d[i + 1]
    return d
