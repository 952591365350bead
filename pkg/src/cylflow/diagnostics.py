"""Norms, energy, dissipation and the empirical ratio diagnostics.

Every volume integral is the midpoint rule 2*pi sum f r_i hr hz and every
L^inf norm is the lattice maximum. Reductions are plain numpy sums over
C-ordered arrays, so a given input always produces the same bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, UndefinedRatioError
from .grid import Grid, Parity, ScalarField, VelocityField, d_r, d_z

OMEGA_Q = (1.0, 1.5, 2.0, 3.0, 4.0, math.inf)
U_P = (2.0, 3.0, 6.0)
GRAD_Q = (1.5, 2.0, 3.0)


def _qname(q):
    if math.isinf(q):
        return "inf"
    return f"{q:g}"


CSV_COLUMNS = (
    ["t"]
    + [f"Omega_L{_qname(q)}" for q in OMEGA_Q]
    + ["vorticity_L2", "kinetic_energy"]
    + [f"u_L{_qname(p)}" for p in U_P]
    + [f"grad_u_L{_qname(q)}" for q in GRAD_Q]
    + ["div_residual", "dissipation_integral"]
)


@dataclass
class DiagnosticsRow:
    t: float
    omega_over_r_norms: dict = field(default_factory=dict)
    vorticity_l2: float = 0.0
    kinetic_energy: float = 0.0
    u_lp: dict = field(default_factory=dict)
    grad_u_lq: dict = field(default_factory=dict)
    div_residual: float = 0.0
    dissipation_integral_so_far: float = 0.0

    def values(self):
        """Row values in ``CSV_COLUMNS`` order."""
        return ([self.t] + [self.omega_over_r_norms[q] for q in OMEGA_Q]
                + [self.vorticity_l2, self.kinetic_energy]
                + [self.u_lp[p] for p in U_P] + [self.grad_u_lq[q] for q in GRAD_Q]
                + [self.div_residual, self.dissipation_integral_so_far])

    @classmethod
    def from_values(cls, vals):
        vals = [float(v) for v in vals]
        if len(vals) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} values, got {len(vals)}")
        it = iter(vals)
        t = next(it)
        om = {q: next(it) for q in OMEGA_Q}
        w2, ke = next(it), next(it)
        up = {p: next(it) for p in U_P}
        gq = {q: next(it) for q in GRAD_Q}
        return cls(t, om, w2, ke, up, gq, next(it), next(it))


def _check_q(q):
    q = float(q)
    if not (q >= 1.0):
        raise ConfigurationError(f"q must be >= 1 or inf, got {q}", key="q")
    return q


def _lq_array(vals: np.ndarray, grid: Grid, q: float) -> float:
    q = _check_q(q)
    a = np.abs(vals)
    if math.isinf(q):
        return float(a.max())
    if q == 1.0:
        integrand = a
    elif q == 2.0:
        integrand = a * a
    else:
        integrand = a ** q
    s = float(np.sum(np.ascontiguousarray(integrand * grid.cell_weights())))
    return s ** (1.0 / q)


def lq_norm(f: ScalarField, q: float) -> float:
    return _lq_array(f.values, f.grid, q)


def kinetic_energy(u: VelocityField) -> float:
    """int |u|^2 dx (no factor 1/2)."""
    g = u.grid
    e = u.ur.values ** 2 + u.uz.values ** 2
    return float(np.sum(np.ascontiguousarray(e * g.cell_weights())))


def velocity_lp_norm(u: VelocityField, p: float) -> float:
    return _lq_array(u.magnitude(), u.grid, p)


def grad_u_magnitude(u: VelocityField) -> np.ndarray:
    """Pointwise Frobenius norm of (d_r u^r, u^r/r, d_z u^r, d_r u^z, d_z u^z)."""
    g = u.grid
    ur, uz = u.ur.values, u.uz.values
    comps = (d_r(ur, g, Parity.ODD), ur / g.r, d_z(ur, g), d_r(uz, g, Parity.EVEN), d_z(uz, g))
    return np.sqrt(sum(c * c for c in comps))


def grad_u_lq_norm(u: VelocityField, q: float) -> float:
    _check_q(q)
    return _lq_array(grad_u_magnitude(u), u.grid, q)


def divergence_field(u: VelocityField) -> np.ndarray:
    g = u.grid
    return kernels.divergence(u.ur.values, u.uz.values, g.r_nodes, g.hr, g.hz)


def divergence_residual(u: VelocityField, include_wall_row: bool = False) -> float:
    """Max |(1/r) d_r(r u^r) + d_z u^z| with the stencils paired to velocity_from_stream.

    By default the row next to the wall, whose stencil reads the wall ghost,
    is left out; for stream-derived velocities the identity holds there too.
    """
    div = divergence_field(u)
    if not include_wall_row:
        div = div[:-1]
    return float(np.abs(div).max())


def vorticity_l2(Omega: ScalarField) -> float:
    g = Omega.grid
    return _lq_array(g.r * Omega.values, g, 2.0)


def make_row(state, dissipation: float) -> DiagnosticsRow:
    """Diagnostics of a transport state; ``dissipation`` is nu * int_0^t ||omega||^2."""
    Om, u = state.Omega, state.u
    grad = grad_u_magnitude(u)
    speed = u.magnitude()
    g = Om.grid
    return DiagnosticsRow(
        t=float(state.t),
        omega_over_r_norms={q: lq_norm(Om, q) for q in OMEGA_Q},
        vorticity_l2=vorticity_l2(Om),
        kinetic_energy=kinetic_energy(u),
        u_lp={p: _lq_array(speed, g, p) for p in U_P},
        grad_u_lq={q: _lq_array(grad, g, q) for q in GRAD_Q},
        div_residual=divergence_residual(u, include_wall_row=True),
        dissipation_integral_so_far=float(dissipation),
    )


def energy_equality_residual(rows, nu: float | None = None) -> float:
    """max_t |E(t) + 2 nu int_0^t ||omega||^2 - E(0)| / E(0); 0 when E(0) = 0.

    The dissipation integral stored in the rows already carries the factor
    nu; ``nu`` is accepted for interface symmetry and only checked.
    """
    rows = list(rows)
    if not rows:
        raise ConfigurationError("no diagnostics rows", key="rows")
    if nu is not None and nu < 0.0:
        raise ConfigurationError("must be >= 0", key="nu")
    e0 = rows[0].kinetic_energy
    if e0 == 0.0:
        return 0.0
    return max(abs(r.kinetic_energy + 2.0 * r.dissipation_integral_so_far - e0) for r in rows) / e0


def poincare_ratio(u: VelocityField, s: float) -> float:
    den = grad_u_lq_norm(u, s)
    if den == 0.0:
        raise UndefinedRatioError("velocity gradient vanishes; ratio undefined")
    return velocity_lp_norm(u, s) / den


def biot_savart_ratio(u: VelocityField, omega_theta: ScalarField, q: float) -> float:
    """(||u||_p + ||grad u||_q) / ||omega||_q with 1/p = 1/q - 1/3, for 1 <= q < 3."""
    q = _check_q(q)
    if not q < 3.0:
        raise ConfigurationError("needs q < 3", key="q")
    p = 1.0 / (1.0 / q - 1.0 / 3.0)
    den = lq_norm(omega_theta, q)
    if den == 0.0:
        raise UndefinedRatioError("vorticity vanishes; ratio undefined")
    return (velocity_lp_norm(u, p) + grad_u_lq_norm(u, q)) / den


def yudovich_ratio_scan(u: VelocityField, r_list, r0: float, omega_theta: ScalarField | None = None) -> dict:
    """{r: ||grad u||_r / (r max(||omega||_r, ||omega||_r0))}; 0 where both vanish.

    ``r0`` must exceed 3 and not exceed the smallest r.
    """
    r_list = [float(r) for r in r_list]
    if not r_list or any(b <= a for a, b in zip(r_list, r_list[1:])):
        raise ConfigurationError("must be non-empty and strictly ascending", key="r_list")
    if not (3.0 < r0 <= r_list[0]):
        raise ConfigurationError(f"need 3 < r0 <= min(r_list), got {r0}", key="r0")
    if omega_theta is None:
        from .elliptic import vorticity_from_velocity
        omega_theta = vorticity_from_velocity(u)
    grad = grad_u_magnitude(u)
    w0 = lq_norm(omega_theta, r0)
    out = {}
    for r in r_list:
        num = _lq_array(grad, u.grid, r)
        den = r * max(lq_norm(omega_theta, r), w0)
        if den == 0.0:
            if num != 0.0:
                raise UndefinedRatioError("vorticity vanishes but the gradient does not")
            out[r] = 0.0
        else:
            out[r] = num / den
    return out
