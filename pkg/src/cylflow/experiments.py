"""Multi-run studies: viscosity ladders, power-law fits, decay checks, grid convergence."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .diagnostics import OMEGA_Q, DiagnosticsRow, energy_equality_residual, lq_norm
from .elliptic import StreamSolver, solve_stream
from .errors import ConfigurationError, CylflowError, FitError
from .grid import Parity, ScalarField, build_grid
from .transport import J11, InitialDataSpec, SimConfig, make_initial_data, run

log = logging.getLogger(__name__)

REPORT_SCHEMA = "cylflow.sweep/1"
DEFAULT_LADDER = tuple(0.1 * 2.0 ** -k for k in range(6))
MIN_R_SQUARED = 0.95


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_prefactor: float
    r_squared: float
    window: tuple
    n_points: int

    @property
    def reliable(self):
        return self.r_squared >= MIN_R_SQUARED

    def to_dict(self):
        return {"exponent": self.exponent, "log_prefactor": self.log_prefactor, "r_squared": self.r_squared,
                "window": list(self.window), "n_points": self.n_points}


def fit_power_law(points, window=(0.0, math.inf)) -> PowerLawFit:
    """Least-squares line through (log x, log y) for the points with lo <= x <= hi."""
    lo, hi = window
    pts = [(float(x), float(y)) for x, y in points if lo <= x <= hi]
    if len(pts) < 4:
        raise FitError(f"need at least 4 points inside window {window}, got {len(pts)}")
    x, y = np.array(pts).T
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise FitError("power-law fit needs positive x and y")
    lx, ly = np.log(x), np.log(y)
    res = stats.linregress(lx, ly)
    if np.ptp(ly) == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, float(res.rvalue) ** 2))
    return PowerLawFit(float(res.slope), float(res.intercept), r2, (float(lo), float(hi)), len(pts))


# -- viscosity ladder -----------------------------------------------------------

@dataclass
class RunSummary:
    nu: float
    rows: list
    dissipation_total: float
    energy_residual: float
    limit_energy_residual: float
    csv: str | None = None

    def to_dict(self):
        return {"nu": self.nu, "dissipation_total": self.dissipation_total,
                "energy_residual": self.energy_residual,
                "limit_energy_residual": self.limit_energy_residual,
                "n_rows": len(self.rows), "csv": self.csv}


@dataclass
class SweepReport:
    nu_ladder: list
    per_nu: dict
    pairwise_l2: dict
    dissipation_fit: PowerLawFit | None
    limit_energy_residual: float
    initial_lq: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema": REPORT_SCHEMA,
            "config": self.config,
            "nu_ladder": list(self.nu_ladder),
            "per_nu": [self.per_nu[nu].to_dict() for nu in self.nu_ladder],
            "pairwise_l2": [{"nu_a": a, "nu_b": b, "sup_l2": d} for (a, b), d in self.pairwise_l2.items()],
            "dissipation_fit": self.dissipation_fit.to_dict() if self.dissipation_fit else None,
            "limit_energy_residual": self.limit_energy_residual,
            "initial_lq": {("inf" if math.isinf(q) else repr(q)): v for q, v in self.initial_lq.items()},
        }


def _run_collect(config: SimConfig, on_step=None):
    """Run once and keep the velocity at every sampling time."""
    snaps = []

    def keep(state, row):
        snaps.append((state.t, state.u.ur.values.copy(), state.u.uz.values.copy()))

    _, rows = run(config, on_step=on_step, on_sample=keep)
    return rows, snaps


def _l2_distance(a, b, weights):
    d = (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2
    return math.sqrt(float(np.sum(np.ascontiguousarray(d * weights))))


def viscosity_sweep(base: SimConfig, nu_ladder=DEFAULT_LADDER, workers: int = 1, on_run=None,
                    on_step=None) -> SweepReport:
    """Run ``base`` at each viscosity of a descending ladder and assemble the report.

    ``base.nu`` is ignored. Runs are independent; with ``workers > 1`` they go
    to a process pool and the report is still folded in ladder order. The
    ``on_run`` and ``on_step`` callbacks fire only in the serial path.
    """
    ladder = [float(v) for v in nu_ladder]
    if len(ladder) < 3:
        raise ConfigurationError(f"needs at least 3 viscosities, got {len(ladder)}", key="nu_ladder")
    if any(b >= a for a, b in zip(ladder, ladder[1:])) or ladder[-1] <= 0.0:
        raise ConfigurationError("must be strictly descending and positive", key="nu_ladder")
    configs = [base.with_(nu=nu) for nu in ladder]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_collect, c) for c in configs]
            results = []
            for nu, fut in zip(ladder, futures):
                try:
                    results.append(fut.result())
                except CylflowError as exc:
                    raise type(exc)(f"nu={nu!r}: {exc}") from exc
    else:
        results = []
        for nu, c in zip(ladder, configs):
            try:
                results.append(_run_collect(c, on_step))
            except CylflowError as exc:
                raise type(exc)(f"nu={nu!r}: {exc}") from exc
            if on_run:
                on_run(nu, results[-1][0])

    grid = base.grid
    weights = grid.cell_weights()
    per_nu = {}
    for nu, (rows, _) in zip(ladder, results):
        e0 = rows[0].kinetic_energy
        lim = abs(rows[-1].kinetic_energy - e0) / e0 if e0 > 0.0 else 0.0
        per_nu[nu] = RunSummary(nu, rows, rows[-1].dissipation_integral_so_far,
                                energy_equality_residual(rows, nu), lim)
    pairwise = {}
    for (na, (_, sa)), (nb, (_, sb)) in zip(zip(ladder, results), zip(ladder[1:], results[1:])):
        pairwise[(na, nb)] = max(_l2_distance(a, b, weights) for a, b in zip(sa, sb))

    pts = [(nu, per_nu[nu].dissipation_total) for nu in ladder]
    try:
        dfit = fit_power_law(pts, (min(ladder), max(ladder)))
    except FitError as exc:
        log.warning("dissipation fit skipped: %s", exc)
        dfit = None
    Om0 = make_initial_data(base.initial_data, grid)
    return SweepReport(ladder, per_nu, pairwise, dfit, per_nu[ladder[-1]].limit_energy_residual,
                       {q: lq_norm(Om0, q) for q in OMEGA_Q}, base.to_dict())


# -- decay rates ------------------------------------------------------------------

@dataclass
class DecayReport:
    fit: PowerLawFit | None
    theoretical: float
    bound_satisfied: bool
    sup_constant: float
    constants: list

    def to_dict(self):
        return {"fit": self.fit.to_dict() if self.fit else None, "theoretical": self.theoretical,
                "bound_satisfied": self.bound_satisfied, "sup_constant": self.sup_constant}


def decay_rate_check(rows, nu: float, q: float, r: float, window=None, omega0_lq: float | None = None) -> DecayReport:
    """Check ||Omega(t)||_r (nu t)^{(3/2)(1/q - 1/r)} / ||Omega_0||_q on a time window.

    ``window`` defaults to the horizon minus its first 10%. ``omega0_lq``
    overrides ||Omega_0||_q when ``q`` is not one of the tabulated norms.
    """
    rows = list(rows)
    if not (1.0 <= q <= r):
        raise ConfigurationError(f"need 1 <= q <= r, got q={q}, r={r}", key="q")
    if not rows:
        raise ConfigurationError("no diagnostics rows", key="rows")
    t_end = rows[-1].t
    if window is None:
        window = (0.1 * t_end, t_end)
    lo, hi = window
    if omega0_lq is None:
        if q not in rows[0].omega_over_r_norms:
            raise ConfigurationError(f"||Omega_0||_{q} is not tabulated; pass omega0_lq", key="q")
        omega0_lq = rows[0].omega_over_r_norms[q]
    if r not in rows[0].omega_over_r_norms:
        raise ConfigurationError(f"||Omega||_{r} is not tabulated", key="r")
    alpha = 1.5 * (1.0 / q - (0.0 if math.isinf(r) else 1.0 / r))
    sel = [row for row in rows if lo <= row.t <= hi and row.t > 0.0]
    if not sel:
        raise ConfigurationError(f"no rows inside window {window}", key="window")
    consts = []
    for row in sel:
        if omega0_lq == 0.0:
            consts.append(0.0)
        else:
            consts.append(row.omega_over_r_norms[r] * (nu * row.t) ** alpha / omega0_lq)
    sup = max(consts)
    fit = fit_power_law([(row.t, row.omega_over_r_norms[r]) for row in sel], window)
    ok = math.isfinite(sup)
    if alpha == 0.0:
        ok = ok and sup <= 1.0 + 1e-6
    return DecayReport(fit, -alpha, ok, sup, consts)


# -- grid convergence ---------------------------------------------------------------

def observed_orders(errors):
    return [math.log2(a / b) if a > 0.0 and b > 0.0 else math.nan for a, b in zip(errors, errors[1:])]


def stream_manufactured_error(nr: int, nz: int, z_len: float = 1.0) -> float:
    """L^inf error of the stream solve against phi = r (1 - r^2) sin(2 pi z / z_len)."""
    g = build_grid(nr, nz, z_len)
    k = 2.0 * np.pi / z_len
    rr, zz = g.mesh()
    exact = rr * (1.0 - rr**2) * np.sin(k * zz)
    w = (8.0 * rr + k**2 * rr * (1.0 - rr**2)) * np.sin(k * zz)
    phi = solve_stream(ScalarField(g, w, Parity.ODD), StreamSolver(g))
    return float(np.abs(phi.values - exact).max())


def bessel_exact(r, nu: float, t: float, amplitude: float = 1.0):
    return amplitude * special.j1(J11 * r) / r * math.exp(-nu * J11**2 * t)


def bessel_error(config: SimConfig, on_step=None) -> float:
    """Relative L^inf error of a bessel_mode run against the separable solution."""
    state, _ = run(config, on_step=on_step)
    amp = config.initial_data.resolved()["amplitude"]
    exact = bessel_exact(state.grid.r, config.nu, state.t, amp)
    return float(np.abs(state.Omega.values - exact).max() / np.abs(exact).max())


@dataclass
class ConvergenceStudy:
    resolutions: list
    errors: dict
    orders: dict

    def __getitem__(self, key):
        return self.orders[key]

    def to_dict(self):
        return {"resolutions": [list(r) for r in self.resolutions], "errors": self.errors,
                "orders": self.orders,
                "pairwise_orders": {k: observed_orders(v) for k, v in self.errors.items()}}


def grid_convergence_study(base: SimConfig, resolutions) -> ConvergenceStudy:
    """Observed orders (finest pair) for the bessel_mode error, the energy residual
    of ``base`` and the stream manufactured solution."""
    res = [(int(a), int(b)) for a, b in resolutions]
    if len(res) < 3:
        raise ConfigurationError("needs at least 3 resolutions", key="resolutions")
    if len(set(res)) != len(res):
        raise ConfigurationError("resolutions must be distinct", key="resolutions")
    for (a, b), (c, d) in zip(res, res[1:]):
        if (c, d) != (2 * a, 2 * b):
            raise ConfigurationError(f"each resolution must double the previous one: {(a, b)} -> {(c, d)}",
                                     key="resolutions")
    nu_b = base.nu if base.nu > 0.0 else 0.1
    bessel = base.with_(nu=nu_b, initial_data=InitialDataSpec("bessel_mode"))
    errors = {"bessel_mode": [], "energy_residual": [], "stream_manufactured": []}
    for nr, nz in res:
        errors["bessel_mode"].append(bessel_error(bessel.with_(nr=nr, nz=nz)))
        _, rows = run(base.with_(nr=nr, nz=nz))
        errors["energy_residual"].append(energy_equality_residual(rows, base.nu))
        errors["stream_manufactured"].append(stream_manufactured_error(nr, nz, base.z_len))
    orders = {k: observed_orders(v)[-1] for k, v in errors.items()}
    return ConvergenceStudy(res, errors, orders)


def rows_from_dicts(dicts):
    return [DiagnosticsRow.from_values(d) for d in dicts]
