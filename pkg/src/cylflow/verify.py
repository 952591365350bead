"""Self-check suite behind ``cylflow verify``.

Each check returns a ``CheckResult``; failures are collected, never
short-circuited. The transport checks run under ``fault_injection`` when a
fault is requested, which is how the suite proves it can fail.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass

import numpy as np

from .diagnostics import divergence_residual, energy_equality_residual
from .elliptic import StreamSolver, biot_savart, solve_stream, velocity_from_stream, vorticity_from_velocity
from .errors import ConfigurationError
from .experiments import bessel_error, observed_orders, stream_manufactured_error
from .grid import Parity, ScalarField, apply_Lstream, build_grid
from .transport import InitialDataSpec, SimConfig, fault_injection, make_initial_data, max_speed, run

MONOTONE_Q = (1.0, 1.5, 2.0, 4.0)
MIN_VERIFY_N = 16


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: str
    seconds: float = 0.0

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "threshold": self.threshold}


def exact_stream_velocity(grid, z_len):
    k = 2.0 * np.pi / z_len
    rr, zz = grid.mesh()
    ur = -k * rr * (1.0 - rr**2) * np.cos(k * zz)
    uz = (2.0 - 4.0 * rr**2) * np.sin(k * zz)
    return ur, uz


def round_trip_error(nr: int, nz: int, z_len: float = 1.0) -> float:
    """L^inf error of u -> omega -> Omega -> biot_savart -> u for the manufactured stream function."""
    from .grid import VelocityField

    g = build_grid(nr, nz, z_len)
    ur, uz = exact_stream_velocity(g, z_len)
    w = vorticity_from_velocity(VelocityField.from_arrays(g, ur, uz))
    u = biot_savart(ScalarField(g, w.values / g.r, Parity.EVEN), StreamSolver(g))
    return float(max(np.abs(u.ur.values - ur).max(), np.abs(u.uz.values - uz).max()))


def random_smooth_odd(grid, seed=0, modes=6):
    rng = np.random.default_rng(seed)
    rr, zz = grid.mesh()
    k = 2.0 * np.pi / grid.z_len
    out = np.zeros(grid.shape)
    for m in range(1, modes + 1):
        for n in range(modes + 1):
            a, b = rng.standard_normal(2) / (m + n)
            out += rr * np.cos((m - 0.5) * np.pi * rr) * (a * np.cos(n * k * zz) + b * np.sin(n * k * zz))
    return out


class _RunAborted(Exception):
    pass


class _StepMonitor:
    """Tracks sup |Omega|, min Omega and the divergence ratio over every step.

    A run whose sup norm doubles has already failed the maximum principle;
    it is stopped there instead of being integrated through the growth.
    """

    def __init__(self, abort_above=math.inf):
        self.sup = 0.0
        self.min = 0.0
        self.div_ratio = 0.0
        self.abort_above = abort_above

    def __call__(self, state):
        v = state.Omega.values
        self.sup = max(self.sup, float(np.abs(v).max()))
        self.min = min(self.min, float(v.min()))
        if self.sup > self.abort_above:
            raise _RunAborted(f"sup |Omega| reached {self.sup:.4g} at t={state.t:.4g}")
        umax = max_speed(state.u)
        if umax > 0.0:
            res = divergence_residual(state.u, include_wall_row=True)
            self.div_ratio = max(self.div_ratio, res * state.grid.hmin / umax)


def monotonicity_excess(rows, qs=MONOTONE_Q) -> float:
    """Largest relative increase of ||Omega||_q between consecutive samples."""
    worst = -math.inf
    for a, b in zip(rows, rows[1:]):
        for q in qs:
            na, nb = a.omega_over_r_norms[q], b.omega_over_r_norms[q]
            if na > 0.0:
                worst = max(worst, nb / na - 1.0)
    return worst


def run_checks(n: int, nz: int | None = None, z_len: float = 1.0, fault: str | None = None) -> list:
    nz = n if nz is None else nz
    if n < MIN_VERIFY_N or nz < MIN_VERIFY_N:
        raise ConfigurationError(f"verify needs nr, nz >= {MIN_VERIFY_N} for order estimation, got {n}x{nz}",
                                 key="verify.nr")
    if n % 4 or nz % 4:
        raise ConfigurationError("verify needs nr and nz divisible by 4", key="verify.nr")
    results = []

    def check(name, fn, threshold):
        t0 = time.perf_counter()
        passed, value = fn()
        results.append(CheckResult(name, bool(passed), float(value), threshold, time.perf_counter() - t0))

    levels = [(n // 4, nz // 4), (n // 2, nz // 2), (n, nz)]

    def stream_order():
        o = observed_orders([stream_manufactured_error(a, b, z_len) for a, b in levels])[-1]
        return o >= 1.9, o

    def stream_residual():
        g = build_grid(n, nz, z_len)
        w = ScalarField(g, random_smooth_odd(g), Parity.ODD)
        phi = solve_stream(w, StreamSolver(g))
        res = np.abs(apply_Lstream(phi).values + w.values).max() / np.abs(w.values).max()
        return res <= 1e-10, res

    def round_trip():
        o = observed_orders([round_trip_error(a, b, z_len) for a, b in levels[1:]])[-1]
        return o >= 1.9, o

    def solenoidal():
        g = build_grid(n, nz, z_len)
        phi = np.random.default_rng(1).standard_normal(g.shape)
        u = velocity_from_stream(ScalarField(g, phi, Parity.ODD))
        ratio = divergence_residual(u, include_wall_row=True) * g.hmin / max_speed(u)
        return ratio <= 1e-10, ratio

    check("stream manufactured order", stream_order, ">= 1.9")
    check("stream solver residual", stream_residual, "<= 1e-10")
    check("Biot-Savart round-trip order", round_trip, ">= 1.9")
    check("discrete solenoidality", solenoidal, "<= 1e-10 |u|/h")

    guard = fault_injection(fault) if fault else contextlib.nullcontext()
    with guard:
        bessel = SimConfig(nu=0.1, t_end=0.1, nr=n, nz=nz, z_len=z_len,
                           initial_data=InitialDataSpec("bessel_mode"))

        def guarded_bessel(cfg):
            # the exact mode decays; doubling means the scheme is broken
            m0 = float(np.abs(make_initial_data(cfg.initial_data, cfg.grid).values).max())
            try:
                return bessel_error(cfg, on_step=_StepMonitor(abort_above=2.0 * m0))
            except _RunAborted:
                return math.inf

        def bessel_fine():
            e = guarded_bessel(bessel)
            return e <= 1e-3, e

        def bessel_order():
            coarse = guarded_bessel(bessel.with_(nr=n // 2, nz=nz // 2))
            fine = guarded_bessel(bessel)
            if not (math.isfinite(coarse) and math.isfinite(fine)):
                return False, math.nan
            o = observed_orders([coarse, fine])[0]
            return o >= 1.9, o

        check("Bessel mode error", bessel_fine, "<= 1e-3")
        check("Bessel mode order", bessel_order, ">= 1.9")

        ring = SimConfig(nu=0.01, t_end=0.25, nr=n, nz=nz, z_len=z_len,
                         initial_data=InitialDataSpec("gaussian_ring", {"amplitude": 10.0}))
        m0 = float(np.abs(make_initial_data(ring.initial_data, ring.grid).values).max())
        mon = _StepMonitor(abort_above=2.0 * m0)
        try:
            _, rows = run(ring, on_step=mon)
        except Exception as exc:  # a broken scheme may blow up; that is a failure, not a crash
            results.append(CheckResult("maximum principle", False, mon.sup / m0, f"<= 1 + 1e-6 (run stopped: {exc})"))
            for name in ("sign preservation", "L^q monotonicity", "energy equality residual",
                         "solenoidality on every step"):
                results.append(CheckResult(name, False, math.nan, f"run stopped: {exc}"))
            return results
        check("maximum principle", lambda: (mon.sup <= m0 * (1 + 1e-6), mon.sup / m0), "<= 1 + 1e-6")
        check("sign preservation", lambda: (mon.min >= -1e-6 * m0, mon.min / m0), ">= -1e-6")
        check("L^q monotonicity", lambda: ((e := monotonicity_excess(rows)) <= 1e-6, e), "<= 1e-6")
        check("energy equality residual", lambda: ((e := energy_equality_residual(rows, ring.nu)) <= 1e-2, e),
              "<= 1e-2")
        check("solenoidality on every step", lambda: (mon.div_ratio <= 1e-10, mon.div_ratio), "<= 1e-10 |u|/h")
    return results


def format_table(results) -> str:
    w = max(len(r.name) for r in results)
    lines = [f"{'check':<{w}}  {'status':<6}  {'value':>12}  threshold"]
    for r in results:
        lines.append(f"{r.name:<{w}}  {'PASS' if r.passed else 'FAIL':<6}  {r.value:>12.4g}  {r.threshold}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
