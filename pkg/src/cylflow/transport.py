"""Time advance of Omega = omega^theta / r.

    d_t Omega + div(u Omega) = nu (d_rr + (3/r) d_r + d_zz) Omega,   Omega(1, z) = 0,

with u recovered from Omega by the Biot-Savart law at every Runge-Kutta
stage. Advection is in conservative flux form with face transports taken
from corner values of the Stokes stream function, so the discrete transport
field is exactly divergence free and carries no flux through the axis or
the wall.
"""

from __future__ import annotations

import contextlib
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import special

from . import kernels
from .elliptic import StreamSolver, velocity_from_stream
from .errors import BlowUpError, ConfigurationError, SupportMarginWarning
from .grid import Grid, Parity, ScalarField, VelocityField, build_grid, support_margin

log = logging.getLogger(__name__)

J11 = float(special.jn_zeros(1, 1)[0])
C_DIFF = 8.0
EPS_U = 1e-30
SUPPORT_MARGIN = 0.1

INITIAL_KINDS = ("gaussian_ring", "bessel_mode", "rough_power", "random_smooth")
ADVECTION_SCHEMES = {"centered": kernels.CENTERED, "hybrid": kernels.HYBRID, "upwind": kernels.UPWIND}

_DEFAULT_PARAMS = {
    "gaussian_ring": {"amplitude": 1.0, "r0": 0.5, "z0": None, "width": 0.1},
    "bessel_mode": {"amplitude": 1.0},
    "rough_power": {"amplitude": 1.0, "r0": 0.5, "z0": None, "beta": 1.25, "cap": 50.0, "radius": 0.3},
    "random_smooth": {"amplitude": 1.0, "z0": None, "half_width": 0.3, "modes": 4, "seed": 0},
}


@dataclass(frozen=True)
class InitialDataSpec:
    """Initial vorticity descriptor. ``params`` override the per-kind defaults.

    gaussian_ring: amplitude, r0, z0, width.
    bessel_mode: amplitude.
    rough_power: amplitude, r0, z0, beta, cap, radius (smooth cutoff radius).
    random_smooth: amplitude (target max |Omega|), z0, half_width, modes, seed.
    A ``z0`` of None centres the datum in the period.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigurationError(f"unknown kind {self.kind!r}; expected one of {INITIAL_KINDS}",
                                     key="initial_data.kind")
        allowed = _DEFAULT_PARAMS[self.kind]
        for k in self.params:
            if k not in allowed:
                raise ConfigurationError(f"not a parameter of {self.kind}", key=f"initial_data.{k}")
        p = self.resolved()
        if self.kind == "rough_power":
            if not p["beta"] < 2.0:
                raise ConfigurationError("beta must be < 2 (data must lie in L^{3/2})", key="initial_data.beta")
            if p["beta"] <= 0.0 or p["cap"] <= 0.0 or p["radius"] <= 0.0:
                raise ConfigurationError("beta, cap and radius must be positive", key="initial_data")
        if self.kind == "gaussian_ring" and p["width"] <= 0.0:
            raise ConfigurationError("must be positive", key="initial_data.width")
        if self.kind == "random_smooth":
            if int(p["modes"]) < 1 or p["half_width"] <= 0.0:
                raise ConfigurationError("modes >= 1 and half_width > 0 required", key="initial_data")

    def resolved(self) -> dict:
        p = dict(_DEFAULT_PARAMS[self.kind])
        p.update(self.params)
        return p

    def to_dict(self):
        return {"kind": self.kind, **self.resolved()}


@dataclass(frozen=True)
class SimConfig:
    nu: float
    t_end: float
    nr: int
    nz: int
    z_len: float
    initial_data: InitialDataSpec
    cfl: float = 0.4
    sample_every: float | None = None
    advection: str = "auto"

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ConfigurationError(f"must be >= 0, got {self.nu}", key="nu")
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ConfigurationError(f"must be > 0, got {self.t_end}", key="t_end")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigurationError(f"must lie in (0, 1], got {self.cfl}", key="cfl")
        if self.sample_every is None:
            object.__setattr__(self, "sample_every", self.t_end / 50.0)
        if not (self.sample_every > 0.0):
            raise ConfigurationError(f"must be > 0, got {self.sample_every}", key="sample_every")
        if self.advection != "auto" and self.advection not in ADVECTION_SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.advection!r}", key="advection")
        build_grid(self.nr, self.nz, self.z_len)

    @property
    def grid(self) -> Grid:
        return build_grid(self.nr, self.nz, self.z_len)

    @property
    def scheme(self) -> int:
        """Advection scheme id; ``auto`` is hybrid for nu > 0 and centered for nu = 0."""
        if self.advection == "auto":
            return kernels.HYBRID if self.nu > 0.0 else kernels.CENTERED
        return ADVECTION_SCHEMES[self.advection]

    def sample_times(self):
        n = int(math.floor(self.t_end / self.sample_every + 1e-9))
        ts = [k * self.sample_every for k in range(1, n + 1)]
        if not ts or ts[-1] < self.t_end * (1.0 - 1e-12):
            ts.append(self.t_end)
        else:
            ts[-1] = self.t_end
        return ts

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return {
            "nu": self.nu, "t_end": self.t_end, "cfl": self.cfl, "sample_every": self.sample_every,
            "advection": self.advection,
            "grid": {"nr": self.nr, "nz": self.nz, "z_len": self.z_len},
            "initial_data": self.initial_data.to_dict(),
        }


@dataclass
class SimState:
    t: float
    Omega: ScalarField
    u: VelocityField
    step_count: int = 0
    phi: ScalarField | None = field(default=None, repr=False)

    @property
    def grid(self):
        return self.Omega.grid


# -- initial data -----------------------------------------------------------

def _bump(s):
    """C-infinity bump exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; peak 1 at s = 0."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def make_initial_data(spec: InitialDataSpec, grid: Grid) -> ScalarField:
    p = spec.resolved()
    rr, zz = grid.mesh()
    z0 = 0.5 * grid.z_len if p.get("z0") is None else float(p["z0"])
    amp = float(p["amplitude"])

    if spec.kind == "gaussian_ring":
        d2 = (rr - p["r0"]) ** 2 + (zz - z0) ** 2
        vals = amp * np.exp(-d2 / p["width"] ** 2)
    elif spec.kind == "bessel_mode":
        vals = amp * special.j1(J11 * rr) / rr
    elif spec.kind == "rough_power":
        d = np.sqrt((rr - p["r0"]) ** 2 + (zz - z0) ** 2)
        with np.errstate(divide="ignore"):
            core = np.minimum(p["cap"], d ** (-p["beta"]))
        vals = amp * core * _bump(d / p["radius"])
    else:
        rng = np.random.default_rng(int(p["seed"]))
        modes = int(p["modes"])
        s = (zz - z0) / p["half_width"]
        acc = np.zeros(grid.shape)
        for m in range(1, modes + 1):
            radial = np.cos((m - 0.5) * np.pi * rr)
            for n in range(0, modes + 1):
                a, b = rng.standard_normal(2) / (m * m + n * n)
                acc += radial * (a * np.cos(np.pi * n * s) + b * np.sin(np.pi * n * s))
        acc *= _bump(s)
        peak = np.abs(acc).max()
        vals = amp * acc / peak if peak > 0.0 else acc
    return ScalarField(grid, vals, Parity.EVEN)


def _margin_violated(f: ScalarField) -> bool:
    """Support too close to the period boundary. A z-invariant field is exempt:
    the periodic slab represents it exactly."""
    v = f.values
    if np.ptp(v, axis=1).max() <= 1e-12 * max(np.abs(v).max(), 1e-300):
        return False
    return support_margin(f) < SUPPORT_MARGIN


def initial_state(config: SimConfig, solver: StreamSolver | None = None) -> SimState:
    grid = config.grid
    solver = solver or StreamSolver(grid)
    Omega = make_initial_data(config.initial_data, grid)
    phi = _stream(Omega.values, grid, solver)
    return SimState(0.0, Omega, _velocity(phi, grid), 0, ScalarField(grid, phi, Parity.ODD))


# -- right-hand side ----------------------------------------------------------

_fault = None


@contextlib.contextmanager
def fault_injection(kind: str = "broken_stencil"):
    """Test hook: deliberately corrupt the diffusion stencil inside the block.

    ``broken_stencil`` drops half the centre weight of the radial second
    difference, turning it into a growth term that violates the maximum
    principle.
    """
    global _fault
    if kind != "broken_stencil":
        raise ValueError(f"unknown fault {kind!r}")
    prev, _fault = _fault, kind
    try:
        yield
    finally:
        _fault = prev


def _stream(Om, grid, solver):
    return solver.solve_array(grid.r * Om)


def _velocity(phi, grid):
    return velocity_from_stream(ScalarField(grid, phi, Parity.ODD))


def _rhs_array(Om, grid, solver, nu, scheme, phi=None):
    if phi is None:
        phi = _stream(Om, grid, solver)
    out = kernels.transport_rhs(Om, phi, grid.r_nodes, grid.hr, grid.hz, nu, scheme)
    if _fault is not None and nu > 0.0:
        out += nu * Om / grid.hr**2
    return out


def rhs(state: SimState, nu: float, solver: StreamSolver | None = None, scheme: int | None = None) -> ScalarField:
    """-div(u Omega) + nu L5 Omega, with u rebuilt from ``state.Omega``."""
    grid = state.grid
    solver = solver or StreamSolver(grid)
    if scheme is None:
        scheme = kernels.HYBRID if nu > 0.0 else kernels.CENTERED
    return ScalarField(grid, _rhs_array(state.Omega.values, grid, solver, nu, scheme), Parity.EVEN)


# -- time stepping --------------------------------------------------------------

def stable_dt(umax: float, grid: Grid, nu: float, cfl: float) -> float:
    h = grid.hmin
    dt = h / (umax + EPS_U)
    if nu > 0.0:
        dt = min(dt, h * h / (nu * C_DIFF))
    return cfl * dt


def max_speed(u: VelocityField) -> float:
    return math.sqrt(float(np.max(u.ur.values ** 2 + u.uz.values ** 2)))


def compute_dt(state: SimState, config: SimConfig) -> float:
    """CFL/diffusion limited step, capped so the next sampling time is hit exactly."""
    umax = max_speed(state.u)
    dt = stable_dt(umax, state.grid, config.nu, config.cfl)
    nxt = next((ts for ts in config.sample_times() if ts > state.t * (1.0 + 1e-14) + 1e-300), config.t_end)
    return min(dt, nxt - state.t)


def step(state: SimState, dt: float, nu: float, solver: StreamSolver, scheme: int | None = None) -> SimState:
    """One three-stage SSP Runge-Kutta step; velocity recomputed at every stage."""
    grid = state.grid
    if scheme is None:
        scheme = kernels.HYBRID if nu > 0.0 else kernels.CENTERED
    q0 = state.Omega.values
    phi0 = state.phi.values if state.phi is not None else None
    comb = kernels.ssp_combine
    q1 = comb(0.0, q0, 1.0, q0, dt, _rhs_array(q0, grid, solver, nu, scheme, phi0))
    q2 = comb(0.75, q0, 0.25, q1, dt, _rhs_array(q1, grid, solver, nu, scheme))
    q3 = comb(1.0 / 3.0, q0, 2.0 / 3.0, q2, dt, _rhs_array(q2, grid, solver, nu, scheme))
    if not np.all(np.isfinite(q3)):
        raise BlowUpError(f"non-finite vorticity at t={state.t + dt:.6g} (step {state.step_count + 1})",
                          state=state)
    phi = _stream(q3, grid, solver)
    return SimState(state.t + dt, ScalarField(grid, q3, Parity.EVEN), _velocity(phi, grid),
                    state.step_count + 1, ScalarField(grid, phi, Parity.ODD))


def enstrophy(state: SimState) -> float:
    """||omega^theta||_{L^2}^2 with omega^theta = r Omega."""
    g = state.grid
    q = state.Omega.values
    return float((q * q).sum(axis=1) @ (g.r_nodes ** 2 * g.cell_weights()[:, 0]))


def run(config: SimConfig, on_step: Callable | None = None, on_sample: Callable | None = None,
        solver: StreamSolver | None = None):
    """Integrate to ``t_end``; returns (final state, rows) with one row per sampling time (t = 0 included)."""
    from .diagnostics import make_row

    grid = config.grid
    solver = solver or StreamSolver(grid)
    scheme = config.scheme
    nu = config.nu
    state = initial_state(config, solver)
    times = config.sample_times()
    diss = 0.0
    ens = enstrophy(state)
    rows = [make_row(state, diss)]
    if on_sample:
        on_sample(state, rows[-1])
    warned = _margin_violated(state.Omega)
    if warned:
        warnings.warn(f"initial support within {SUPPORT_MARGIN:.0%} of the period boundary",
                      SupportMarginWarning, stacklevel=2)
    umax = max_speed(state.u)
    k = 0
    while k < len(times):
        target = times[k]
        dt = min(stable_dt(umax, grid, nu, config.cfl), target - state.t)
        new = step(state, dt, nu, solver, scheme)
        if target - state.t <= dt:
            new.t = target
        ens_new = enstrophy(new)
        diss += 0.5 * dt * nu * (ens + ens_new)
        state, ens = new, ens_new
        umax = max_speed(state.u)
        if on_step:
            on_step(state)
        if state.t == target:
            row = make_row(state, diss)
            rows.append(row)
            if on_sample:
                on_sample(state, row)
            if not warned and _margin_violated(state.Omega):
                warned = True
                warnings.warn(f"support within {SUPPORT_MARGIN:.0%} of the period boundary at t={state.t:.4g}",
                              SupportMarginWarning, stacklevel=2)
            k += 1
    log.info("run finished: nu=%g, %d steps, %d rows", nu, state.step_count, len(rows))
    return state, rows
