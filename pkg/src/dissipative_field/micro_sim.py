"""
Microscopic co-simulation of the field and a discretised reservoir.

The field phi and reservoir fields Y_j (one per frequency node omega_j with
weight w_j) live on a periodic lattice and obey

    phi'' = lap phi - m^2 phi + sum_j w_j f_j Y_j,
    Y_j'' = lap Y_j - omega_j^2 Y_j + f_j phi,

integrated with the kick-drift-kick leapfrog. The weights make the discrete
system Hamiltonian with the energy `total_energy`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, DomainError
from .io import write_table
from .kernel import CouplingFunction
from .numerics.quadrature import gauss_legendre
from .response import response_grid, solve_mode_volterra


@dataclass(frozen=True)
class LatticeConfig:
    """
    Lattice, time step and reservoir discretisation.

    Attributes
    ----------
    nx : int
        Number of sites, a power of two.
    dx, dt : float
        Lattice spacing and time step.
    m : float
        Field mass.
    coupling : CouplingFunction
    omega_grid : QuadratureGrid
        Reservoir frequencies (nodes) and weights.
    T : float
        Total simulated time.
    """

    nx: int = 256
    dx: float = 0.1
    dt: float = 0.005
    m: float = 1.0
    coupling: CouplingFunction = field(default_factory=lambda: CouplingFunction.exp_cutoff(1.0, 1.0))
    omega_grid: object = None
    T: float = 10.0

    def __post_init__(self):
        if self.omega_grid is None:
            object.__setattr__(self, "omega_grid", gauss_legendre(0.0, 20.0, 200))
        if self.nx < 4 or self.nx & (self.nx - 1):
            raise DomainError(f"nx must be a power of two >= 4, got {self.nx}")
        if not (self.dx > 0.0 and self.dt > 0.0 and self.m > 0.0 and self.T > 0.0):
            raise DomainError("dx, dt, m and T must be positive")
        if not self.dt < self.dx / math.sqrt(2.0):
            raise DomainError(f"dt={self.dt:g} violates dt < dx/sqrt(2)")
        top = max(self.m, self.omega_max)
        if self.dt > 0.1 / top * (1.0 + 1e-12):
            raise DomainError(f"dt={self.dt:g} violates dt <= 0.1/max(m, omega_max) = {0.1 / top:g}")

    @classmethod
    def build(cls, coupling=None, n_omega=200, omega_max=20.0, **kwargs):
        """Config with a single Gauss-Legendre reservoir panel on [0, omega_max]."""
        if coupling is not None:
            kwargs["coupling"] = coupling
        return cls(omega_grid=gauss_legendre(0.0, omega_max, n_omega), **kwargs)

    @property
    def length(self):
        return self.nx * self.dx

    @property
    def omega_max(self):
        return self.omega_grid.domain[1]

    @property
    def x(self):
        return self.dx * np.arange(self.nx)

    @property
    def steps(self):
        return int(round(self.T / self.dt))

    def wavenumber(self, n):
        """Continuum wavenumber 2 pi n / L of Fourier mode n."""
        return 2.0 * math.pi * n / self.length

    def lattice_wavenumber(self, n):
        """Wavenumber seen by the 3-point Laplacian, (2/dx) sin(k dx / 2)."""
        return 2.0 / self.dx * math.sin(0.5 * self.wavenumber(n) * self.dx)

    def describe(self):
        return {
            "nx": self.nx,
            "dx": self.dx,
            "dt": self.dt,
            "m": self.m,
            "T": self.T,
            "n_omega": len(self.omega_grid),
            "omega_max": self.omega_max,
            "coupling": self.coupling.describe(),
        }


@dataclass
class LatticeState:
    """Field, momentum, reservoir fields and momenta at time t."""

    phi: np.ndarray
    pi: np.ndarray
    Y: np.ndarray
    Pi: np.ndarray
    t: float = 0.0

    @classmethod
    def zeros(cls, cfg):
        n, nw = cfg.nx, len(cfg.omega_grid)
        return cls(np.zeros(n), np.zeros(n), np.zeros((nw, n)), np.zeros((nw, n)), 0.0)

    def copy(self):
        return LatticeState(self.phi.copy(), self.pi.copy(), self.Y.copy(), self.Pi.copy(), self.t)

    def check(self, cfg):
        n, nw = cfg.nx, len(cfg.omega_grid)
        if self.phi.shape != (n,) or self.pi.shape != (n,):
            raise DomainError("phi and pi must have nx entries")
        if self.Y.shape != (nw, n) or self.Pi.shape != (nw, n):
            raise DomainError("Y and Pi must have shape (n_omega, nx)")
        _finite_or_raise(self, "state")


@dataclass(frozen=True)
class EnergyReport:
    """Energy split into field, reservoir and interaction parts.

    ``shadow`` is the leapfrog's modified energy, conserved to round-off
    for this linear system; it is not part of ``total``.
    """

    field_energy: float
    reservoir_energy: float
    interaction_energy: float
    total: float
    shadow: float = float("nan")


def _finite_or_raise(state, where):
    for name in ("phi", "pi", "Y", "Pi"):
        arr = getattr(state, name)
        bad = ~np.isfinite(arr)
        if np.any(bad):
            site = tuple(int(i) for i in np.argwhere(bad)[0])
            raise BlowUpError(
                f"non-finite {name} at site {site}, t={state.t:g} ({where})", site=site, time=state.t
            )


def _lap(a, dx):
    return (np.roll(a, -1, axis=-1) - 2.0 * a + np.roll(a, 1, axis=-1)) / (dx * dx)


def _grad(a, dx):
    return (np.roll(a, -1, axis=-1) - a) / dx


class _Model:
    """Arrays derived from a config, shared by the stepping loop."""

    def __init__(self, cfg):
        self.cfg = cfg
        om = cfg.omega_grid.nodes
        self.w = cfg.omega_grid.weights
        self.f = cfg.coupling.f(om)
        self.om2 = om * om
        self.wf = self.w * self.f

    def forces(self, phi, Y):
        dx = self.cfg.dx
        fphi = _lap(phi, dx) - self.cfg.m ** 2 * phi + self.wf @ Y
        fY = _lap(Y, dx) - self.om2[:, None] * Y + self.f[:, None] * phi
        return fphi, fY


def _kdk(model, state, forces, n):
    cfg = model.cfg
    h = cfg.dt
    fphi, fY = forces
    for _ in range(n):
        state.pi += 0.5 * h * fphi
        state.Pi += 0.5 * h * fY
        state.phi += h * state.pi
        state.Y += h * state.Pi
        fphi, fY = model.forces(state.phi, state.Y)
        state.pi += 0.5 * h * fphi
        state.Pi += 0.5 * h * fY
        state.t += h
    _finite_or_raise(state, "step")
    return fphi, fY


def step(state, cfg):
    """
    One kick-drift-kick leapfrog step; returns a new state.

    Raises
    ------
    BlowUpError
        If a non-finite value appears, with the site and time.
    """
    model = _Model(cfg)
    new = state.copy()
    _kdk(model, new, model.forces(new.phi, new.Y), 1)
    return new


def _energy(model, state, forces=None):
    cfg = model.cfg
    dx, w = cfg.dx, model.w
    field_e = 0.5 * np.sum(state.pi**2 + _grad(state.phi, dx) ** 2 + cfg.m**2 * state.phi**2)
    dens = state.Pi**2 + _grad(state.Y, dx) ** 2 + model.om2[:, None] * state.Y**2
    res_e = 0.5 * np.dot(w, dens.sum(axis=1))
    int_e = -np.dot(model.wf, (state.Y * state.phi).sum(axis=1))
    field_e, res_e, int_e = dx * field_e, dx * res_e, dx * int_e
    total = field_e + res_e + int_e
    fphi, fY = model.forces(state.phi, state.Y) if forces is None else forces
    shadow = total - cfg.dt**2 / 8.0 * dx * (np.sum(fphi**2) + np.dot(w, (fY**2).sum(axis=1)))
    return EnergyReport(float(field_e), float(res_e), float(int_e), float(total), float(shadow))


def total_energy(state, cfg):
    """Discrete energy with the same stencil as `step` (forward differences)."""
    return _energy(_Model(cfg), state)


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    phi_k: np.ndarray
    energy: np.ndarray  # columns: total, field, reservoir, interaction, shadow
    modes: np.ndarray
    final: LatticeState = None

    def to_csv(self, path, mode_index=0):
        e = self.energy
        return write_table(
            path,
            ("t", "phi_k_re", "phi_k_im", "energy_total", "energy_field", "energy_res", "energy_int", "energy_shadow"),
            (self.times, self.phi_k[:, mode_index].real, self.phi_k[:, mode_index].imag, e[:, 0], e[:, 1], e[:, 2], e[:, 3], e[:, 4]),
        )


def project(phi, n):
    """Fourier coefficient (1/N) sum_x phi(x) exp(-i k_n x) for each mode n."""
    size = phi.shape[-1]
    return np.fft.fft(phi, axis=-1)[..., np.asarray(n) % size] / size


def simulate(cfg, state, modes=(1,), record_every=10, T=None):
    """
    Run the lattice from `state` to time T, recording mode amplitudes and energies.

    Parameters
    ----------
    modes : sequence of int
        Fourier modes projected at each record.
    record_every : int
        Steps between records.
    """
    state.check(cfg)
    model = _Model(cfg)
    total_steps = int(round((cfg.T if T is None else T) / cfg.dt))
    state = state.copy()
    modes = np.asarray(modes, dtype=int)
    forces = model.forces(state.phi, state.Y)
    times, amps, energies = [], [], []

    def record():
        e = _energy(model, state, forces)
        times.append(state.t)
        amps.append(project(state.phi, modes))
        energies.append((e.total, e.field_energy, e.reservoir_energy, e.interaction_energy, e.shadow))

    record()
    done = 0
    while done < total_steps:
        n = min(record_every, total_steps - done)
        forces = _kdk(model, state, forces, n)
        done += n
        if done % record_every == 0 or done == total_steps:
            record()
    return SimulationResult(np.array(times), np.array(amps), np.array(energies), modes, state)


def mode_state(cfg, k_mode, amplitude=1.0, velocity=0.5):
    """phi = A cos(k x), pi = v A cos(k x), quiescent reservoir."""
    state = LatticeState.zeros(cfg)
    c = amplitude * np.cos(cfg.wavenumber(k_mode) * cfg.x)
    state.phi[:] = c
    state.pi[:] = velocity * c
    return state


@dataclass(frozen=True)
class ComparisonResult:
    max_rel_err: float
    times: np.ndarray
    simulated: np.ndarray
    predicted: np.ndarray
    simulation: SimulationResult = None
    predicted_rate: np.ndarray = None


def _output_stride(cfg, out_dt):
    stride = max(1, int(round(out_dt / cfg.dt)))
    return stride


def compare_quiescent(cfg, k_mode, out_dt=0.05):
    """
    Lattice run against beta phi0 + alpha phi0' from the continuum response.

    The prediction uses the lattice wavenumber so that only the reservoir
    discretisation and the time step separate the two routes. The error is
    max_t |sim - pred| / max_t |pred| over the recorded times.
    """
    state = mode_state(cfg, k_mode)
    stride = _output_stride(cfg, out_dt)
    sim = simulate(cfg, state, modes=(k_mode,), record_every=stride)
    phi0 = project(state.phi, [k_mode])[0]
    v0 = project(state.pi, [k_mode])[0]
    khat = cfg.lattice_wavenumber(k_mode)
    h = stride * cfg.dt / math.ceil(stride * cfg.dt / 0.004)
    T = sim.times[-1]
    grid = response_grid(cfg.coupling, T + 1.0)
    times, alpha, beta = solve_mode_volterra(cfg.coupling, khat, cfg.m, h * round(T / h), h, grid)
    idx = np.round(sim.times / h).astype(int)
    pred = beta[idx] * phi0 + alpha[idx] * v0
    rate = np.gradient(beta, h, edge_order=2)[idx] * phi0 + beta[idx] * v0
    got = sim.phi_k[:, 0]
    err = float(np.max(np.abs(got - pred)) / np.max(np.abs(pred)))
    return ComparisonResult(err, sim.times, got, pred, sim, rate)


def run_quiescent_comparison(cfg, k_mode):
    """Max relative error between the lattice and the response prediction."""
    return compare_quiescent(cfg, k_mode).max_rel_err


def recurrence_excess(cfg, k_mode, t_max=10.0):
    """
    Field energy returned by the discrete reservoir, relative to the start.

    A continuum reservoir never gives energy back coherently; a finite set of
    modes does after its recurrence time. The returned value is
    max over t <= t_max of (E_field,lattice - E_field,continuum) / E_field(0),
    with the continuum field energy L (|phi_k'|^2 + (khat^2 + m^2) |phi_k|^2)
    of the predicted mode.
    """
    res = compare_quiescent(cfg, k_mode)
    khat = cfg.lattice_wavenumber(k_mode)
    sim_field = res.simulation.energy[:, 1]
    pred_field = cfg.length * (np.abs(res.predicted_rate) ** 2 + (khat**2 + cfg.m**2) * np.abs(res.predicted) ** 2)
    keep = res.times <= t_max + 1e-12
    return float(np.max(sim_field[keep] - pred_field[keep]) / sim_field[0])


def reservoir_sample(cfg, seed, band=8):
    """
    Gaussian reservoir data on the Fourier modes |n| <= band.

    Each mode (j, n) gets independent cosine and sine amplitudes with
    variances 1/(2 omega_kj w_j L) for Y and omega_kj/(2 w_j L) for Pi,
    omega_kj = sqrt(khat_n^2 + omega_j^2).
    """
    rng = np.random.default_rng(seed)
    state = LatticeState.zeros(cfg)
    om = cfg.omega_grid.nodes
    w = cfg.omega_grid.weights
    x = cfg.x
    for n in range(band + 1):
        k = cfg.wavenumber(n)
        wk = np.sqrt(cfg.lattice_wavenumber(n) ** 2 + om * om)
        sy = np.sqrt(1.0 / (2.0 * wk * w * cfg.length))
        sp = np.sqrt(wk / (2.0 * w * cfg.length))
        shapes = [np.cos(k * x)] + ([np.sin(k * x)] if n > 0 else [])
        for shape in shapes:
            state.Y += (sy * rng.standard_normal(om.size))[:, None] * shape
            state.Pi += (sp * rng.standard_normal(om.size))[:, None] * shape
    return state


def _taylor_start(h, omega2, phi0, v0, j, f0):
    """phi(h) through h^5 for phi'' + omega2 phi + (gamma * phi) = J."""
    d2 = -omega2 * phi0 + j[0]
    d3 = -omega2 * v0 + j[1]
    d4 = -omega2 * d2 + f0 * phi0 + j[2]
    d5 = -omega2 * d3 + f0 * v0 + j[3]
    return phi0 + v0 * h + d2 * h**2 / 2 + d3 * h**3 / 6 + d4 * h**4 / 24 + d5 * h**5 / 120


def _langevin_modes(cfg, state, modes, h, steps):
    """
    Solve phi_k'' + khat^2 phi_k + m^2 phi_k + ∫ gamma_k phi_k = J_k for each mode.

    The kernel and the noise use the discrete reservoir of the lattice:
    gamma_k(t) = -sum_j w_j f_j^2 sin(omega_kj t)/omega_kj and
    J_k(t) = sum_j w_j f_j Y_jk(t), Y_jk evolving freely from the sampled data.
    """
    om = cfg.omega_grid.nodes
    w = cfg.omega_grid.weights
    f = cfg.coupling.f(om)
    t = h * np.arange(steps + 1)
    out = np.zeros((len(modes), steps + 1), dtype=complex)
    f0 = float(np.sum(w * f * f))
    for r, n in enumerate(modes):
        khat = cfg.lattice_wavenumber(n)
        omega2 = khat**2 + cfg.m**2
        wk = np.sqrt(khat**2 + om * om)
        y0 = project(state.Y, [n])[..., 0]
        p0 = project(state.Pi, [n])[..., 0]
        phase = np.outer(t, wk)
        kern = -(np.sin(phase) @ (w * f * f / wk))
        amp = w * f
        noise = np.cos(phase) @ (amp * y0) + np.sin(phase) @ (amp * p0 / wk)
        jd = [
            np.sum(amp * y0),
            np.sum(amp * p0),
            -np.sum(amp * wk**2 * y0),
            -np.sum(amp * wk**2 * p0),
        ]
        phi0 = project(state.phi, [n])[0]
        v0 = project(state.pi, [n])[0]
        a = out[r]
        a[0] = phi0
        a[1] = _taylor_start(h, omega2, phi0, v0, jd, f0)
        for i in range(1, steps):
            mem = h * (np.dot(kern[i:0:-1], a[:i]) - 0.5 * kern[i] * a[0])
            a[i + 1] = 2.0 * a[i] - a[i - 1] + h * h * (-omega2 * a[i] - mem + noise[i])
    return out


def langevin_modes(cfg, state, modes, T, h):
    """Richardson-combined (h, h/2) solution of the per-mode Langevin equations."""
    steps = int(round(T / h))
    coarse = _langevin_modes(cfg, state, modes, h, steps)
    fine = _langevin_modes(cfg, state, modes, 0.5 * h, 2 * steps)[:, ::2]
    return h * np.arange(steps + 1), (4.0 * fine - coarse) / 3.0


def compare_langevin(cfg, seed, band=8, phi_mode=1, out_dt=0.05):
    """
    Lattice run from a seeded reservoir against the nonlocal Langevin equation.

    The field starts in mode `phi_mode` (use None for phi = 0). All modes
    |n| <= band are compared; the error is max |sim - pred| / max |pred|.
    """
    state = reservoir_sample(cfg, seed, band)
    if phi_mode is not None:
        seeded = mode_state(cfg, phi_mode)
        state.phi[:] = seeded.phi
        state.pi[:] = seeded.pi
    modes = np.arange(band + 1)
    stride = _output_stride(cfg, out_dt)
    sim = simulate(cfg, state, modes=modes, record_every=stride)
    h = stride * cfg.dt / math.ceil(stride * cfg.dt / 0.004)
    T = sim.times[-1]
    times, pred_all = langevin_modes(cfg, state, modes, h * round(T / h), h)
    idx = np.round(sim.times / h).astype(int)
    pred = pred_all[:, idx].T
    got = sim.phi_k
    scale = np.max(np.abs(pred))
    if scale == 0.0:
        err = float(np.max(np.abs(got)))
    else:
        err = float(np.max(np.abs(got - pred)) / scale)
    return ComparisonResult(err, sim.times, got, pred, sim)


def run_langevin_comparison(cfg, seed):
    """Max relative error between the lattice and the Langevin route."""
    return compare_langevin(cfg, seed).max_rel_err
