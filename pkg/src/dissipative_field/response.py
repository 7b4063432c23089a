"""
Mode dynamics of the dressed field.

Each spatial Fourier mode k obeys

    alpha'' + (k^2 + m^2) alpha + ∫_0^t gamma_k(t - t') alpha(t') dt' = 0,
    alpha(0) = 0,  alpha'(0) = 1,  beta = alpha',

with the mode kernel gamma_k(t) = -∫ f^2(omega) sin(omega_k t) / omega_k d omega,
omega_k = sqrt(k^2 + omega^2). Its Laplace transform is

    gamma~(k, s) = -∫ f^2(omega) / (s^2 + omega^2 + k^2) d omega,

so alpha = L^-1[1/D] and beta = L^-1[s/D] with D = s^2 + k^2 + m^2 + gamma~.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DivergenceError, DomainError
from .io import write_json, write_table
from .numerics.laplace import FOURIER, LaplaceInversionConfig, inverse_laplace
from .numerics.quadrature import composite_grid

DIVERGENCE_LIMIT = 1e6
PV_WINDOW = 1e-3


def response_grid(coupling, t_max=0.0, order=16, grading=24):
    """
    Frequency grid for the mode integrals.

    Panels are at most a quarter cutoff wide and at most one period of
    sin(omega t_max) wide, and are graded geometrically towards omega = 0
    where gamma~ is sharply peaked for small |s|.
    """
    top = coupling.omega_max
    width = 0.25 * coupling.cutoff
    if t_max > 0.0:
        width = min(width, 2.0 * math.pi / t_max)
    first = min(width, top)
    graded = first * 2.0 ** -np.arange(grading, 0, -1)
    n = max(1, int(math.ceil((top - first) / width - 1e-12)))
    uniform = np.linspace(first, top, n + 1)
    breaks = np.concatenate([[0.0], graded, uniform])
    if coupling.family == "tabulated":
        om = coupling.table_omega
        breaks = np.union1d(breaks, om[(om > 0.0) & (om < top)])
    return composite_grid(breaks, order)


def _weights(coupling, grid):
    if grid is None:
        grid = response_grid(coupling)
    return grid.nodes, grid.weights * coupling.f2(grid.nodes)


def gamma_tilde(coupling, k, s, grid=None):
    """
    Transformed susceptibility gamma~(k, s) for Re s > 0.

    Parameters
    ----------
    coupling : CouplingFunction
    k : float
    s : complex or array_like
    grid : QuadratureGrid, optional
        Frequency grid; defaults to `response_grid`.

    Returns
    -------
    complex or ndarray
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0.0) or not np.all(np.isfinite(s)):
        raise DomainError("gamma_tilde needs Re s > 0; use on_shell_limit for the boundary")
    nodes, w = _weights(coupling, grid)
    den = (s[..., None] ** 2 + k * k) + nodes**2
    out = -(w / den).sum(axis=-1)
    return out if out.ndim else complex(out)


def mode_kernel(coupling, k, t, grid=None, chunk=512):
    """
    Mode kernel gamma_k(t) = -∫ f^2 sin(omega_k t) / omega_k d omega.

    Parameters
    ----------
    t : float or array_like
        Times >= 0.
    grid : QuadratureGrid, optional
        Defaults to `response_grid` resolved up to max(t).
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0.0) or not np.all(np.isfinite(tt)):
        raise DomainError("mode_kernel needs finite t >= 0")
    if grid is None:
        grid = response_grid(coupling, float(tt.max()))
    nodes, w = _weights(coupling, grid)
    wk = np.sqrt(nodes**2 + k * k)
    # sin(wk t)/wk -> t as wk -> 0
    safe = np.where(wk > 0.0, wk, 1.0)
    coef = w / safe
    out = np.empty_like(tt)
    for i in range(0, tt.size, chunk):
        blk = tt[i : i + chunk]
        arg = np.outer(blk, wk)
        val = np.sin(arg) @ coef
        if np.any(wk == 0.0):
            val += blk * w[wk == 0.0].sum()
        out[i : i + chunk] = -val
    return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class DispersionSample:
    """gamma~(k, s) together with the mode parameters it was evaluated for."""

    k: float
    s: complex
    value: complex
    m: float = None

    @classmethod
    def evaluate(cls, coupling, k, s, m=None, grid=None):
        return cls(float(k), complex(s), gamma_tilde(coupling, k, complex(s), grid), m)

    def denominator(self):
        if self.m is None:
            raise DomainError("the field mass is needed for the denominator")
        return self.s**2 + self.k**2 + self.m**2 + self.value


@dataclass(frozen=True)
class ModeResponse:
    """
    Sampled response functions of one mode.

    Attributes
    ----------
    k, m : float
    times : ndarray
    alpha, beta : ndarray
    method : str
        ``"volterra"`` or ``"laplace"``.
    meta : dict
        Parameters recorded in the manifest.
    """

    k: float
    m: float
    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    method: str
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else None

    def to_csv(self, path):
        return write_table(path, ("t", "alpha", "beta"), (self.times, self.alpha, self.beta))

    def manifest(self):
        info = {"k": self.k, "m": self.m, "method": self.method, "dt": self.dt, "samples": int(self.times.size)}
        info.update(self.meta)
        return info

    def write(self, csv_path, json_path=None):
        self.to_csv(csv_path)
        if json_path is not None:
            write_json(json_path, self.manifest())


def _check_mode(k, m):
    if not (math.isfinite(k) and math.isfinite(m)):
        raise DomainError("k and m must be finite")
    if m <= 0.0:
        raise DomainError("field mass must be > 0")


def volterra_step_bound(coupling, k, m):
    """Largest step allowed by the resolution guard 0.01/sqrt(k^2 + m^2 + |g(0)|)."""
    g0 = 0.5 * coupling.total()
    return 0.01 / math.sqrt(k * k + m * m + g0)


def _leapfrog_volterra(kern, omega2, h, n, total):
    """
    Central differences with trapezoid memory; returns alpha at t = 0..n h.

    kern holds gamma_k at the same nodes. The first step uses the Taylor
    series of alpha, which only involves omega2 and gamma_k'(0) = -total.
    """
    a = np.zeros(n + 1)
    if n == 0:
        return a
    a[1] = h - omega2 * h**3 / 6.0 + (omega2 * omega2 + total) * h**5 / 120.0
    h2 = h * h
    for i in range(1, n):
        mem = h * np.dot(kern[i - 1 : 0 : -1], a[1:i]) if i > 1 else 0.0
        a[i + 1] = 2.0 * a[i] - a[i - 1] - h2 * (omega2 * a[i] + mem)
        if abs(a[i + 1]) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"mode response exceeded {DIVERGENCE_LIMIT:g} at t={(i + 1) * h:g}; "
                "the kernel or mode is unstable"
            )
    return a


def _derivative(a, h, omega2, total):
    """Five-point derivative of alpha, using the odd extension near t = 0."""
    ext = np.concatenate([[-a[2], -a[1]], a])
    d = (-ext[4:] + 8.0 * ext[3:-1] - 8.0 * ext[1:-3] + ext[:-4]) / (12.0 * h)
    b = np.empty(a.size - 2)
    b[:] = d
    b[0] = 1.0
    return b


def solve_mode_volterra(coupling, k, m, T, dt, grid=None, richardson=True):
    """
    Unguarded Volterra solver behind `mode_response_volterra`.

    Integrates at steps dt and dt/2, combines the two by Richardson
    extrapolation (the scheme's error expands in even powers of dt) and
    differentiates the combined alpha for beta. Returns (times, alpha, beta).
    """
    _check_mode(k, m)
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise DomainError("T must be a positive integer multiple of dt")
    omega2 = k * k + m * m
    total = coupling.total()
    extra = 3
    if grid is None:
        grid = response_grid(coupling, T + extra * dt)
    levels = (1, 2) if richardson else (1,)
    sols = []
    for lev in levels:
        h = dt / lev
        steps = (n + extra) * lev
        kern = mode_kernel(coupling, k, h * np.arange(steps + 1), grid)
        sols.append(_leapfrog_volterra(kern, omega2, h, steps, total)[::lev])
    a = sols[0] if not richardson else (4.0 * sols[1] - sols[0]) / 3.0
    b = _derivative(a, dt, omega2, total)
    times = dt * np.arange(n + 1)
    alpha = a[: n + 1].copy()
    alpha[0] = 0.0
    return times, alpha, b[: n + 1]


def mode_response_volterra(coupling, k, m, T, dt=None, grid=None):
    """
    Response functions by direct time integration of the mode equation.

    Parameters
    ----------
    coupling : CouplingFunction
    k : float
        Wavenumber.
    m : float
        Field mass, > 0.
    T : float
        Final time.
    dt : float, optional
        Output step; must satisfy dt <= 0.01 / sqrt(k^2 + m^2 + |g(0)|).
        Defaults to the largest step dividing T that does.
    grid : QuadratureGrid, optional
        Frequency grid for the mode kernel.

    Returns
    -------
    ModeResponse

    Raises
    ------
    DomainError
        If dt violates the resolution guard.
    DivergenceError
        If |alpha| exceeds 1e6.
    """
    bound = volterra_step_bound(coupling, k, m)
    if dt is None:
        dt = T / math.ceil(T / bound - 1e-9)
    if dt > bound * (1.0 + 1e-12):
        raise DomainError(f"dt={dt:g} exceeds the resolution guard {bound:.6g}")
    times, alpha, beta = solve_mode_volterra(coupling, k, m, T, dt, grid)
    meta = dict(coupling.describe(), tolerance="richardson(dt, dt/2)")
    return ModeResponse(float(k), float(m), times, alpha, beta, "volterra", meta)


def denominator(coupling, k, m, s, grid=None):
    """D(s) = s^2 + k^2 + m^2 + gamma~(k, s)."""
    s = np.asarray(s, dtype=complex)
    return s * s + k * k + m * m + gamma_tilde(coupling, k, s, grid)


def growth_rate(coupling, k, m, grid=None):
    """
    Largest real zero of D on the positive axis, or 0 if there is none.

    D is increasing on the positive real axis. It becomes negative near
    s = 0 whenever ∫ f^2 / (omega^2 + k^2) exceeds k^2 + m^2, which always
    happens at k = 0 for couplings with f^2 ~ omega at the origin; the mode
    then grows like exp(sigma t).
    """
    if grid is None:
        grid = response_grid(coupling)

    def d(x):
        return float(np.real(denominator(coupling, k, m, x, grid)))

    lo = 1e-9 * max(coupling.cutoff, 1.0)
    if coupling.is_zero or d(lo) > 0.0:
        return 0.0
    hi = max(1.0, coupling.total() ** 0.25) * 2.0
    while d(hi) <= 0.0:
        hi *= 2.0
    return brentq(d, lo, hi, xtol=1e-14, rtol=1e-13)


def default_laplace_config(**kwargs):
    kwargs.setdefault("method", FOURIER)
    kwargs.setdefault("node_count", 32)
    return LaplaceInversionConfig(**kwargs)


def mode_response_laplace(coupling, k, m, times, cfg=None, grid=None):
    """
    Response functions by numerical inversion of 1/D and s/D.

    gamma~ has a branch cut on the imaginary axis (|Im s| >= |k|), so only
    the Fourier-series method, which stays on a Bromwich line to the right
    of every singularity, is admissible. The line is placed to the right of
    `growth_rate` automatically.

    Parameters
    ----------
    times : array_like
        Times > 0.
    cfg : LaplaceInversionConfig, optional
        Must use the ``"fourier"`` method.
    """
    _check_mode(k, m)
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0.0):
        raise DomainError("Laplace route needs times > 0")
    cfg = default_laplace_config() if cfg is None else cfg
    if cfg.method != FOURIER:
        raise DomainError(
            "gamma~ has a branch cut along the imaginary axis; a Talbot contour would "
            "cross it. Use method='fourier' for mode responses."
        )
    if grid is None:
        grid = response_grid(coupling)
    sigma = growth_rate(coupling, k, m, grid)
    abscissa = max(cfg.abscissa, sigma)
    run = LaplaceInversionConfig(
        FOURIER, cfg.node_count, cfg.target_time_range, abscissa, cfg.oscillation, cfg.tol
    )

    def inv_d(s):
        return 1.0 / denominator(coupling, k, m, s, grid)

    def s_over_d(s):
        return s / denominator(coupling, k, m, s, grid)

    alpha = np.atleast_1d(inverse_laplace(inv_d, run, times))
    beta = np.atleast_1d(inverse_laplace(s_over_d, run, times))
    meta = dict(coupling.describe(), node_count=cfg.node_count, tolerance=cfg.tol, abscissa=abscissa)
    return ModeResponse(float(k), float(m), times.copy(), alpha, beta, "laplace", meta)


@dataclass(frozen=True)
class OnShellLimit:
    """Boundary value gamma~(k, eps - i omega_k), eps -> 0+, split into parts."""

    k: float
    omega: float
    pv_part: float
    imag_part: float

    @property
    def omega_k(self):
        return math.hypot(self.k, self.omega)

    @property
    def value(self):
        return complex(self.pv_part, self.imag_part)


def _graded_breaks(lo, hi, near, delta, width):
    """Panel edges on [lo, hi] graded geometrically towards `near`."""
    span = hi - lo
    if span <= 0.0:
        return np.array([])
    edges = [0.0]
    step = delta
    while edges[-1] + step < min(span, width):
        edges.append(edges[-1] + step)
        step *= 2.0
    n = max(1, int(math.ceil((span - edges[-1]) / width - 1e-12)))
    edges = np.concatenate([edges[:-1], np.linspace(edges[-1], span, n + 1)])
    edges = np.asarray(edges)
    return near + edges if near == lo else near - edges[::-1]


def principal_value(coupling, omega, order=16, window=PV_WINDOW):
    """
    P∫_0^∞ f^2(w) / (w^2 - omega^2) dw.

    The window [omega - d, omega + d], d = window * omega, is excised and
    replaced by its Taylor value 2 d h'(omega) + d^3 h'''(omega) / 9 with
    h(w) = f^2(w) / (w + omega); outside it the panels are graded
    geometrically away from the pole.
    """
    top = coupling.omega_max
    d = window * omega
    width = 0.25 * coupling.cutoff
    pieces = []
    if omega + d >= top:
        grid = response_grid(coupling)
        x, w = grid.nodes, grid.weights
        mask = np.abs(x - omega) > 0
        return float(np.sum(w[mask] * coupling.f2(x[mask]) / (x[mask] ** 2 - omega**2)))
    left = _graded_breaks(0.0, omega - d, omega - d, d, width)
    right = _graded_breaks(omega + d, top, omega + d, d, width)
    for br in (left, right):
        if br.size < 2:
            continue
        if coupling.family == "tabulated":
            om = coupling.table_omega
            br = np.union1d(br, om[(om > br[0]) & (om < br[-1])])
        grid = composite_grid(br, order)
        x = grid.nodes
        pieces.append(np.sum(grid.weights * coupling.f2(x) / ((x - omega) * (x + omega))))

    def h(x):
        return coupling.f2(x) / (x + omega)

    e = d
    h1 = (h(omega + e) - h(omega - e)) / (2.0 * e)
    e3 = 10.0 * d
    h3 = (h(omega + 2 * e3) - 2 * h(omega + e3) + 2 * h(omega - e3) - h(omega - 2 * e3)) / (2.0 * e3**3)
    inner = 2.0 * d * h1 + d**3 * h3 / 9.0
    return float(sum(pieces) + inner)


def on_shell_limit(coupling, k, omega, grid=None):
    """
    Retarded boundary value of gamma~ at s = -i omega_k.

    pv_part   = -P∫ f^2(w) / (w^2 - omega^2) dw
    imag_part = -pi f^2(omega) / (2 omega)

    Neither depends on k: s^2 + k^2 = -omega^2 on the shell. The `grid`
    argument is accepted for interface symmetry; the principal value builds
    its own pole-adapted panels.
    """
    if not (omega > 0.0) or not math.isfinite(omega):
        raise DomainError("on_shell_limit needs omega > 0 (pole at the origin otherwise)")
    if coupling.is_zero:
        return OnShellLimit(float(k), float(omega), 0.0, 0.0)
    pv = -principal_value(coupling, omega)
    imag = -math.pi * coupling.f2(omega) / (2.0 * omega)
    return OnShellLimit(float(k), float(omega), pv, float(imag))
