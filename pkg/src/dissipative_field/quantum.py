"""
Vacuum statistics of the noise current and of the dressed field.

Conventions: the noise current J(x, t) = ∫ f(omega) Y_omega(x, t) d omega is
built from free reservoir fields in their vacuum, with mode functions
exp(i(k x - omega_k t)) / sqrt(2 pi 2 omega_k).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .errors import DomainError, EdgeSingularityError, ResonanceError
from .kernel import MemoryKernel
from .numerics.quadrature import composite_grid
from .response import on_shell_limit, response_grid

# noise density / |Im gamma~| in the density convention used here
FDT_CONSTANT = 1.0 / math.pi
# the constant quoted under delta-normalised Fourier conventions, reported alongside
FOUR_PI_FDT_CONSTANT = 4.0 * math.pi
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class NoiseCommutatorSample:
    """[J(x, t), J(0, 0)] / i by the mode integral (lhs) and by the kernel (rhs)."""

    dx: float
    dt: float
    lhs: float
    rhs: float

    @property
    def error(self):
        return abs(self.lhs - self.rhs)

    @property
    def scaled_error(self):
        return self.error / max(1.0, abs(self.rhs))


def _moments(coupling, grid):
    x, w = grid.nodes, grid.weights * coupling.f2(grid.nodes)
    return float(w.sum()), float((w * x**2).sum()), float((w * x**4).sum())


def _s1(a, K):
    """∫_K^∞ sin(a k) / k dk."""
    a = np.asarray(a, dtype=float)
    si, _ = sici(np.abs(a) * K)
    return np.sign(a) * (0.5 * math.pi - si)


def _c2(a, K):
    """∫_K^∞ cos(a k) / k^2 dk."""
    return np.cos(a * K) / K - a * _s1(a, K)


def _s3(b, K):
    """∫_K^∞ sin(b k) / k^3 dk."""
    return np.sin(b * K) / (2.0 * K * K) + 0.5 * b * _c2(b, K)


def commutator_lhs(coupling, dx, dt, k_max=200.0, order=16, grid=None):
    """
    (1/pi) ∫_0^∞ cos(k dx) gamma_k(dt) dk, the mode-sum side of the commutator.

    The massless part of gamma_k, -F0 sin(k t)/k with F0 = ∫ f^2, is
    transformed in closed form. The remainder falls off like 1/k^2 and is
    integrated up to `k_max`, with the two leading terms of its large-k
    expansion added beyond.
    """
    dx, dt = float(dx), float(dt)
    if not (math.isfinite(dx) and math.isfinite(dt)):
        raise DomainError("separations must be finite")
    if coupling.is_zero:
        return 0.0
    if grid is None:
        grid = response_grid(coupling, abs(dt))
    f0, m2, m4 = _moments(coupling, grid)
    t, x = dt, dx
    massless = -0.25 * f0 * (np.sign(t + x) + np.sign(t - x))

    width = min(0.5, math.pi / max(abs(x) + abs(t), 1e-3))
    n = max(1, int(math.ceil(k_max / width)))
    kg = composite_grid(np.linspace(0.0, k_max, n + 1), order)
    om = grid.nodes
    wf = grid.weights * coupling.f2(om)
    total = np.zeros(kg.nodes.size)
    for i in range(0, kg.nodes.size, 256):
        k = kg.nodes[i : i + 256, None]
        wk = np.sqrt(k * k + om * om)
        diff = np.sin(wk * t) / wk - np.sin(k * t) / k
        total[i : i + 256] = -(diff @ wf)
    head = np.dot(kg.weights, np.cos(kg.nodes * x) * total) / math.pi
    c2 = 0.5 * (_c2(t + x, k_max) + _c2(t - x, k_max))
    s3 = 0.5 * (_s3(t + x, k_max) + _s3(t - x, k_max))
    tail = (-0.5 * t * m2 * c2 + (t * t * m4 / 8.0 + 0.5 * m2) * s3) / math.pi
    return float(massless + head + tail)


def commutator_rhs(kernel, dx, dt):
    """theta(dt) gamma(dx, dt) - theta(-dt) gamma(-dx, -dt), theta(0) = 1."""
    out = 0.0
    if dt >= 0.0:
        out += kernel(dx, dt)
    if dt <= 0.0:
        out -= kernel(-dx, -dt)
    return float(out)


def commutator_check(coupling, dx, dt, k_max=200.0, kernel=None):
    """
    Both sides of the noise commutator at separation (dx, dt).

    Parameters
    ----------
    coupling : CouplingFunction
    dx, dt : float
    k_max : float
        Wavenumber beyond which the remainder is replaced by its asymptotics.
    kernel : MemoryKernel, optional
        Kernel for the right side; built from the coupling by default.

    Returns
    -------
    NoiseCommutatorSample
    """
    if kernel is None:
        kernel = MemoryKernel.from_coupling(coupling)
    lhs = commutator_lhs(coupling, dx, dt, k_max)
    rhs = 0.0 if coupling.is_zero else commutator_rhs(kernel, dx, dt)
    return NoiseCommutatorSample(float(dx), float(dt), lhs, rhs)


@dataclass(frozen=True)
class NoiseSpectralDensity:
    k: float
    omega: float
    value: float


def noise_spectral_density(coupling, k, omega):
    """
    Vacuum noise weight per unit mode frequency at wavenumber k.

    Changing variables from reservoir mass w to mode frequency
    Omega = sqrt(k^2 + w^2) turns the mode sum ∫ f^2(w) / (2 omega_k) d w into
    the density f^2(w') / (2 w'), w' = sqrt(Omega^2 - k^2), which vanishes
    below the light line Omega < |k|.
    """
    if not (omega > 0.0) or not math.isfinite(omega) or not math.isfinite(k):
        raise DomainError("noise_spectral_density needs finite k and Omega > 0")
    if omega * omega == k * k:
        raise EdgeSingularityError(
            "Omega = |k| is the integrable edge of the noise spectrum; integrate across it "
            "with an endpoint-adapted rule (e.g. Omega = |k| cosh(theta))"
        )
    if omega < abs(k):
        return NoiseSpectralDensity(float(k), float(omega), 0.0)
    wp = math.sqrt((omega - abs(k)) * (omega + abs(k)))
    return NoiseSpectralDensity(float(k), float(omega), float(coupling.f2(wp) / (2.0 * wp)))


@dataclass(frozen=True)
class FDTSample:
    k: float
    omega: float
    lhs: float
    rhs: float

    @property
    def ratio(self):
        return self.lhs / self.rhs


def fdt_sample(coupling, k, omega):
    """Noise density (lhs) and absorptive |Im gamma~| (rhs) at matched frequency."""
    if not omega > abs(k) + 1e-6:
        raise DomainError("fdt_check needs Omega > |k| + 1e-6")
    lhs = noise_spectral_density(coupling, k, omega).value
    wp = math.sqrt((omega - abs(k)) * (omega + abs(k)))
    rhs = abs(on_shell_limit(coupling, k, wp).imag_part)
    if rhs == 0.0:
        raise DomainError(f"no absorption at omega'={wp:g}; the ratio is undefined")
    return FDTSample(float(k), float(omega), lhs, rhs)


def fdt_check(coupling, k, omega):
    """
    Ratio of the noise spectral density to |Im gamma~| on the shell.

    The ratio is a constant of the model; with the conventions of this
    module it equals `FDT_CONSTANT` = 1/pi.
    """
    return fdt_sample(coupling, k, omega).ratio


@dataclass(frozen=True)
class SteadyStateCorrelator:
    dx: float
    dt: float
    value: complex
    k_grid: object = None
    omega_grid: object = None


def default_k_grid(k_max=20.0, width=0.25, order=16, grading=24):
    graded = width * 2.0 ** -np.arange(grading, 0, -1)
    n = max(1, int(math.ceil((k_max - width) / width)))
    return composite_grid(np.concatenate([[0.0], graded, np.linspace(width, k_max, n + 1)]), order)


def on_shell_denominator(coupling, m, omegas):
    """m^2 - omega^2 + gamma~(k, -i omega_k) at each reservoir frequency."""
    out = np.empty(len(omegas), dtype=complex)
    for i, w in enumerate(omegas):
        lim = on_shell_limit(coupling, 0.0, float(w))
        out[i] = m * m - w * w + complex(lim.pv_part, lim.imag_part)
    return out


def steady_correlator_scan(coupling, m, separations, k_grid=None, omega_grid=None, chunk=128):
    """
    Steady two-point function at several separations sharing one pair of grids.

    value(dx, dt) = ∫ dk / (2 pi 2 omega_k) ∫ d omega f^2 |D(omega)|^-2
                    exp(i (k dx - omega_k dt)),
    D(omega) = m^2 - omega^2 + gamma~(k, -i omega_k). The k integral runs over
    [-k_max, k_max] and is folded onto [0, k_max]; k_max is the ultraviolet
    regulator (the equal-point value grows like log k_max).

    Raises
    ------
    ResonanceError
        If |D| < 1e-12 at a frequency node with f^2 > 0.
    """
    if not (m > 0.0):
        raise DomainError("field mass must be > 0")
    k_grid = default_k_grid() if k_grid is None else k_grid
    omega_grid = response_grid(coupling) if omega_grid is None else omega_grid
    seps = [(float(a), float(b)) for a, b in separations]
    om = omega_grid.nodes
    f2 = coupling.f2(om)
    live = f2 > 0.0
    values = np.zeros(len(seps), dtype=complex)
    if not np.any(live):
        return [SteadyStateCorrelator(a, b, 0j, k_grid, omega_grid) for a, b in seps]
    om, f2 = om[live], f2[live]
    den = on_shell_denominator(coupling, m, om)
    mag = np.abs(den)
    if np.any(mag < RESONANCE_TOL):
        bad = om[np.argmin(mag)]
        raise ResonanceError(f"|D| < {RESONANCE_TOL:g} at omega={bad:g}; refine the frequency grid")
    wom = omega_grid.weights[live] * f2 / mag**2
    kx, kw = k_grid.nodes, k_grid.weights
    for i in range(0, kx.size, chunk):
        k = kx[i : i + chunk, None]
        wk = np.sqrt(k * k + om * om)
        base = wom / (4.0 * math.pi * wk)
        for j, (dx, dt) in enumerate(seps):
            inner = (base * np.exp(-1j * wk * dt)).sum(axis=1)
            values[j] += np.sum(kw[i : i + chunk] * 2.0 * np.cos(kx[i : i + chunk] * dx) * inner)
    return [SteadyStateCorrelator(a, b, complex(v), k_grid, omega_grid) for (a, b), v in zip(seps, values)]


def steady_correlator(coupling, m, dx, dt, k_grid=None, omega_grid=None):
    """Single-separation form of `steady_correlator_scan`."""
    return steady_correlator_scan(coupling, m, [(dx, dt)], k_grid, omega_grid)[0]
