import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from cylflow import BlowUpError, ConfigurationError, SupportMarginWarning
from cylflow.elliptic import StreamSolver, biot_savart
from cylflow.kernels import CENTERED
from cylflow.grid import Parity, ScalarField, apply_L5, quadrature
from cylflow.transport import (
    J11, InitialDataSpec, SimConfig, SimState, compute_dt, fault_injection, initial_state, make_initial_data,
    max_speed, rhs, run, step,
)


def cfg(**kw):
    base = dict(nu=0.01, t_end=0.1, nr=16, nz=16, z_len=1.0,
                initial_data=InitialDataSpec("gaussian_ring", {"amplitude": 10.0}))
    base.update(kw)
    return SimConfig(**base)


def zero_state(c):
    return initial_state(c.with_(initial_data=InitialDataSpec("gaussian_ring", {"amplitude": 0.0})))


# -- initial data ------------------------------------------------------------

def test_zero_amplitude_ring():
    c = cfg()
    assert np.all(make_initial_data(InitialDataSpec("gaussian_ring", {"amplitude": 0.0}), c.grid).values == 0)


def test_bessel_value_at_half():
    g = cfg(nr=5).grid
    assert g.r_nodes[2] == 0.5
    f = make_initial_data(InitialDataSpec("bessel_mode"), g)
    assert f.values[2, 0] == pytest.approx(special.j1(J11 * 0.5) / 0.5, rel=1e-14)
    assert np.ptp(f.values, axis=1).max() == 0


def test_random_smooth_deterministic():
    g = cfg(nr=32, nz=32).grid
    a = make_initial_data(InitialDataSpec("random_smooth", {"seed": 7}), g).values
    b = make_initial_data(InitialDataSpec("random_smooth", {"seed": 7}), g).values
    c = make_initial_data(InitialDataSpec("random_smooth", {"seed": 8}), g).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.abs(a).max() == pytest.approx(1.0)


def test_rough_power_is_capped_and_compact():
    g = cfg(nr=64, nz=64).grid
    f = make_initial_data(InitialDataSpec("rough_power", {"amplitude": 1.0}), g).values
    assert np.isfinite(f).all() and f.max() <= 50.0
    rr, zz = g.mesh()
    assert np.all(f[np.hypot(rr - 0.5, zz - 0.5) >= 0.3] == 0)


@pytest.mark.parametrize("kind,params", [
    ("vortex_sheet", {}), ("rough_power", {"beta": 2.0}), ("gaussian_ring", {"width": 0.0}),
    ("gaussian_ring", {"colour": 1.0}),
])
def test_initial_spec_rejects(kind, params):
    with pytest.raises(ConfigurationError):
        InitialDataSpec(kind, params)


@pytest.mark.parametrize("kw,key", [
    (dict(nu=-1.0), "nu"), (dict(t_end=0.0), "t_end"), (dict(cfl=1.5), "cfl"),
    (dict(advection="weno"), "advection"), (dict(nr=2), "grid.nr"),
])
def test_config_validation(kw, key):
    with pytest.raises(ConfigurationError) as ei:
        cfg(**kw)
    assert ei.value.key == key


def test_sample_times():
    assert cfg(t_end=1.0).sample_every == pytest.approx(0.02)
    ts = cfg(t_end=1.0, sample_every=0.3).sample_times()
    assert ts == pytest.approx([0.3, 0.6, 0.9, 1.0]) and ts[-1] == 1.0
    assert cfg(t_end=0.05, sample_every=0.1).sample_times() == [0.05]


# -- right-hand side ----------------------------------------------------------

def test_rhs_zero():
    s = zero_state(cfg())
    assert np.all(rhs(s, 0.1).values == 0)


def test_rhs_bessel_eigenfunction():
    errs = []
    for n in (32, 64):
        c = cfg(nr=n, nz=8, nu=0.1, initial_data=InitialDataSpec("bessel_mode"))
        s = initial_state(c)
        exact = -0.1 * J11**2 * s.Omega.values
        r = rhs(s, 0.1).values
        # the wall row carries the first-order ghost of the monotone stencil
        errs.append(np.abs(r - exact)[:-1].max() / np.abs(exact).max())
    assert errs[1] < 2e-3
    assert math.log2(errs[0] / errs[1]) >= 1.9


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), scheme=st.sampled_from(["centered", "hybrid", "upwind"]))
def test_advection_flux_sums_telescope(seed, scheme):
    c = cfg(nr=24, nz=20, nu=0.0, advection=scheme,
            initial_data=InitialDataSpec("random_smooth", {"seed": seed, "amplitude": 3.0}))
    s = initial_state(c)
    r = rhs(s, 0.0, scheme=c.scheme)
    total = quadrature(r)
    scale = quadrature(r, np.abs)
    assert abs(total) <= 1e-10 * scale


def test_diffusion_part_is_L5():
    c = cfg(nr=24, nz=24)
    s = initial_state(c)
    a = rhs(s, 0.2, scheme=CENTERED).values - rhs(s, 0.0, scheme=CENTERED).values
    assert np.allclose(a, 0.2 * apply_L5(s.Omega).values, atol=1e-9 * np.abs(a).max())


# -- dt -----------------------------------------------------------------------

def test_dt_zero_velocity_hits_cap():
    c = cfg(nu=0.0, t_end=1.0, sample_every=0.25)
    s = zero_state(c)
    assert compute_dt(s, c) == 0.25
    s.t = 0.1
    assert compute_dt(s, c) == pytest.approx(0.15)


def test_dt_unit_speed():
    c = cfg(nu=0.0, nr=16, nz=16, t_end=10.0)
    s = zero_state(c)
    g = c.grid
    ones = ScalarField(g, np.ones(g.shape), Parity.EVEN)
    s.u = type(s.u)(ScalarField(g, np.zeros(g.shape), Parity.ODD), ones)
    assert max_speed(s.u) == 1.0
    assert compute_dt(s, c) == pytest.approx(0.4 / 16, rel=1e-12)


def test_dt_diffusive_scaling():
    dts = []
    for n in (32, 64):
        c = cfg(nu=10.0, nr=n, nz=n, t_end=10.0)
        dts.append(compute_dt(zero_state(c), c))
    assert dts[0] / dts[1] == pytest.approx(4.0, rel=1e-12)


# -- stepping and runs -----------------------------------------------------------

def test_zero_is_fixed_point():
    c = cfg()
    s = zero_state(c)
    solver = StreamSolver(c.grid)
    for _ in range(5):
        s = step(s, 0.01, c.nu, solver)
    assert np.all(s.Omega.values == 0)
    assert s.t == pytest.approx(0.05) and s.step_count == 5


def test_blow_up_detected():
    c = cfg()
    s = initial_state(c)
    bad = s.Omega.values.copy()
    bad[3, 3] = np.inf
    s = SimState(0.0, ScalarField(c.grid, bad, Parity.EVEN), s.u)
    with pytest.raises(BlowUpError) as ei:
        step(s, 1e-3, c.nu, StreamSolver(c.grid))
    assert ei.value.state is s


def test_short_horizon_two_rows():
    _, rows = run(cfg(t_end=0.01, sample_every=0.5))
    assert [r.t for r in rows] == [0.0, 0.01]


def test_zero_data_zero_norms():
    c = cfg(initial_data=InitialDataSpec("gaussian_ring", {"amplitude": 0.0}))
    _, rows = run(c)
    for row in rows:
        assert all(v == 0 for v in row.values()[1:])


def test_rows_hit_sample_times_exactly():
    c = cfg(t_end=0.1, sample_every=0.025)
    state, rows = run(c)
    assert [r.t for r in rows] == [0.0] + c.sample_times()
    assert state.t == 0.1


def test_max_principle_and_sign_small_grid():
    c = cfg(nr=32, nz=32, t_end=0.25)
    sup, low = [0.0], [0.0]

    def mon(s):
        sup[0] = max(sup[0], np.abs(s.Omega.values).max())
        low[0] = min(low[0], s.Omega.values.min())

    _, rows = run(c, on_step=mon)
    m0 = rows[0].omega_over_r_norms[math.inf]
    assert sup[0] <= m0 * (1 + 1e-6)
    assert low[0] >= -1e-6 * m0


@pytest.mark.parametrize("nu", [0.0, 0.01])
def test_axial_reflection_equivariance(nu):
    # z -> -z maps a solution Omega(r, z) to -Omega(r, -z)
    c = cfg(nr=24, nz=24, nu=nu, initial_data=InitialDataSpec("random_smooth", {"amplitude": 3.0, "seed": 4}))
    g = c.grid
    solver = StreamSolver(g)
    om = make_initial_data(c.initial_data, g).values
    mirror = -np.roll(om[:, ::-1], 1, axis=1)  # node j -> node -j mod nz
    states = []
    for v in (om, mirror):
        Om = ScalarField(g, v, Parity.EVEN)
        s = SimState(0.0, Om, biot_savart(Om, solver))
        for _ in range(10):
            s = step(s, 2e-3, nu, solver)
        states.append(s.Omega.values)
    a, b = states
    assert np.abs(-np.roll(a[:, ::-1], 1, axis=1) - b).max() <= 1e-12 * np.abs(a).max()


def test_support_margin_warning():
    c = cfg(initial_data=InitialDataSpec("gaussian_ring", {"amplitude": 1.0, "z0": 0.02}), t_end=0.01)
    with pytest.warns(SupportMarginWarning):
        run(c)


def test_bessel_run_does_not_warn():
    c = cfg(nu=0.1, t_end=0.01, initial_data=InitialDataSpec("bessel_mode"))
    with warnings.catch_warnings():
        warnings.simplefilter("error", SupportMarginWarning)
        run(c)


def test_fault_injection_breaks_max_principle():
    c = cfg(nr=32, nz=32, t_end=0.05)
    with fault_injection():
        state, rows = run(c)
    assert rows[-1].omega_over_r_norms[math.inf] > rows[0].omega_over_r_norms[math.inf]
    with pytest.raises(ValueError):
        with fault_injection("nonsense"):
            pass
