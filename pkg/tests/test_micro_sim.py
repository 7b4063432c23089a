import math

import numpy as np
import pytest

from dissipative_field import CouplingFunction, LatticeConfig, LatticeState, step, total_energy
from dissipative_field.errors import BlowUpError, DomainError
from dissipative_field.micro_sim import (
    compare_langevin,
    compare_quiescent,
    langevin_modes,
    mode_state,
    project,
    recurrence_excess,
    reservoir_sample,
    run_quiescent_comparison,
    simulate,
)

EXP = CouplingFunction.exp_cutoff(1.0, 1.0)
FREE = CouplingFunction.exp_cutoff(0.0, 1.0)


def small(coupling=EXP, **kw):
    kw.setdefault("nx", 64)
    kw.setdefault("T", 2.0)
    return LatticeConfig.build(coupling, n_omega=kw.pop("n_omega", 40), **kw)


# -- configuration -------------------------------------------------------------------


def test_config_defaults():
    cfg = LatticeConfig()
    assert (cfg.nx, cfg.dx, cfg.m, len(cfg.omega_grid), cfg.omega_max) == (256, 0.1, 1.0, 200, 20.0)
    assert cfg.dt <= 0.1 / max(cfg.m, cfg.omega_max)
    assert cfg.dt < cfg.dx / math.sqrt(2.0)


@pytest.mark.parametrize(
    "kw",
    [dict(dt=0.01), dict(dt=0.08, omega_max=0.5, n_omega=4), dict(nx=100), dict(m=0.0), dict(dx=0.1, dt=0.075, omega_max=1.0)],
)
def test_config_rejects_bad_values(kw):
    with pytest.raises(DomainError):
        LatticeConfig.build(EXP, **kw)


def test_state_shape_check():
    cfg = small()
    state = LatticeState.zeros(cfg)
    state.phi = np.zeros(cfg.nx + 1)
    with pytest.raises(DomainError):
        state.check(cfg)


# -- stepping ----------------------------------------------------------------------------


def test_zero_state_is_a_fixed_point():
    cfg = small()
    state = LatticeState.zeros(cfg)
    for _ in range(50):
        state = step(state, cfg)
    for arr in (state.phi, state.pi, state.Y, state.Pi):
        assert not np.any(arr)
    assert state.t == pytest.approx(50 * cfg.dt)


def test_free_standing_wave_period():
    cfg = LatticeConfig.build(FREE, n_omega=1, T=10.0)
    state = LatticeState.zeros(cfg)
    state.phi[:] = np.cos(cfg.wavenumber(1) * cfg.x)
    res = simulate(cfg, state, modes=(1,), record_every=1)
    a = res.phi_k[:, 0].real
    t = res.times
    idx = np.nonzero(np.sign(a[:-1]) != np.sign(a[1:]))[0]
    # linear interpolation of each crossing
    crossings = t[idx] - a[idx] * (t[idx + 1] - t[idx]) / (a[idx + 1] - a[idx])
    period = 2.0 * np.mean(np.diff(crossings))
    expected = 2.0 * math.pi / math.hypot(cfg.wavenumber(1), cfg.m)
    assert period == pytest.approx(expected, rel=5e-3)


def test_parity_is_preserved():
    cfg = small(nx=128)
    state = reservoir_sample(cfg, seed=3, band=4)
    # make everything even in x: f(x) -> (f(x) + f(-x)) / 2
    mirror = lambda a: np.roll(a[..., ::-1], 1, axis=-1)  # noqa: E731
    for name in ("phi", "pi", "Y", "Pi"):
        arr = getattr(state, name)
        arr[...] = 0.5 * (arr + mirror(arr))
    state.phi += mode_state(cfg, 2).phi
    res = simulate(cfg, state, record_every=50)
    for name in ("phi", "pi", "Y", "Pi"):
        arr = getattr(res.final, name)
        assert np.max(np.abs(arr - mirror(arr))) <= 1e-12


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_reports_site_and_time():
    cfg = small()
    state = LatticeState.zeros(cfg)
    state.phi[5] = 1e308
    state.phi[6] = -1e308
    with pytest.raises(BlowUpError) as info:
        step(state, cfg)
    assert info.value.site is not None
    assert info.value.time == pytest.approx(cfg.dt)


# -- energy ---------------------------------------------------------------------------------


def test_zero_state_energy():
    cfg = small()
    e = total_energy(LatticeState.zeros(cfg), cfg)
    assert (e.field_energy, e.reservoir_energy, e.interaction_energy, e.total) == (0.0, 0.0, 0.0, 0.0)


def test_free_mode_energy():
    cfg = LatticeConfig.build(FREE, n_omega=1)
    A, n = 0.01, 3
    khat = cfg.lattice_wavenumber(n)
    Omega = math.hypot(khat, cfg.m)
    state = LatticeState.zeros(cfg)
    state.phi[:] = A * np.cos(cfg.wavenumber(n) * cfg.x)
    state.pi[:] = Omega * state.phi
    e = total_energy(state, cfg)
    expected = 0.25 * cfg.length * A * A * (Omega**2 + khat**2 + cfg.m**2)
    assert abs(e.field_energy - expected) <= 1e-6 * expected


def test_energy_parts_add_up_and_interaction_is_odd():
    cfg = small()
    state = reservoir_sample(cfg, seed=1)
    state.phi += mode_state(cfg, 1).phi
    e = total_energy(state, cfg)
    assert e.total == e.field_energy + e.reservoir_energy + e.interaction_energy
    assert e.interaction_energy != 0.0
    flipped = state.copy()
    flipped.phi = -flipped.phi
    assert total_energy(flipped, cfg).interaction_energy == -e.interaction_energy


def test_energy_drift_over_ten_thousand_steps():
    cfg = LatticeConfig(T=1e4 * 0.005)
    res = simulate(cfg, mode_state(cfg, 1), record_every=100)
    e = res.energy[:, 0]
    assert np.max(np.abs(e - e[0])) / abs(e[0]) <= 1e-4


def test_shadow_energy_of_free_field():
    cfg = LatticeConfig.build(FREE, n_omega=1, T=20.0)
    res = simulate(cfg, mode_state(cfg, 2), record_every=100)
    shadow = res.energy[:, 4]
    assert np.max(np.abs(shadow - shadow[0])) / shadow[0] <= 1e-10


def test_simulation_csv(tmp_path):
    cfg = small(T=0.1)
    res = simulate(cfg, mode_state(cfg, 1), record_every=5)
    path = res.to_csv(tmp_path / "sim.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,phi_k_re,phi_k_im,energy_total,energy_field,energy_res,energy_int,energy_shadow"
    assert len(lines) == res.times.size + 1


def test_projection_of_single_mode():
    cfg = small()
    phi = np.cos(cfg.wavenumber(3) * cfg.x)
    amps = project(phi, [3, -3, 2])
    np.testing.assert_allclose(amps, [0.5, 0.5, 0.0], atol=1e-15)


# -- comparisons with the effective description ------------------------------------------


def test_quiescent_free_field():
    cfg = LatticeConfig.build(FREE, n_omega=1)
    assert run_quiescent_comparison(cfg, 1) < 1e-4


def test_quiescent_small_lattice():
    cfg = small(T=4.0, nx=128, n_omega=100)
    res = compare_quiescent(cfg, 1)
    assert res.max_rel_err < 1e-2
    assert res.times[0] == 0.0 and res.times[-1] == pytest.approx(4.0)


def test_recurrence_guard():
    cfg = LatticeConfig()
    assert recurrence_excess(cfg, 1, t_max=10.0) < 1e-2


def test_langevin_route_with_nothing_to_propagate():
    cfg = small()
    state = LatticeState.zeros(cfg)
    _, pred = langevin_modes(cfg, state, np.arange(4), 1.0, 0.004)
    sim = simulate(cfg, state, modes=np.arange(4), T=1.0)
    assert not np.any(pred)
    assert not np.any(sim.phi_k)


def test_langevin_route_without_noise_is_the_quiescent_route():
    cfg = small(T=2.0)
    state = mode_state(cfg, 1)
    quiet = compare_quiescent(cfg, 1)
    _, pred = langevin_modes(cfg, state, [1], 2.0, 0.002)
    idx = np.round(quiet.times / 0.002).astype(int)
    scale = np.max(np.abs(quiet.predicted))
    assert np.max(np.abs(pred[0, idx] - quiet.predicted)) / scale < 1e-5


def test_reservoir_sample_is_seeded():
    cfg = small()
    a = reservoir_sample(cfg, seed=11)
    b = reservoir_sample(cfg, seed=11)
    c = reservoir_sample(cfg, seed=12)
    np.testing.assert_array_equal(a.Y, b.Y)
    np.testing.assert_array_equal(a.Pi, b.Pi)
    assert np.any(a.Y != c.Y)
    # no field content and nothing above the band
    assert not np.any(a.phi)
    assert np.max(np.abs(project(a.Y, [9, 20]))) < 1e-14


def test_langevin_discrepancy_is_second_order():
    errs = []
    for dt in (0.005, 0.0025):
        cfg = small(nx=128, n_omega=100, T=3.0, dt=dt)
        errs.append(compare_langevin(cfg, seed=5, band=4).max_rel_err)
    assert math.log2(errs[0] / errs[1]) >= 1.9
