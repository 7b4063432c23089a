"""
Coupling functions, the reservoir Green's function and the memory kernel.

A reservoir of Klein-Gordon fields Y_omega coupled with strength f(omega)
induces a causal memory kernel on the main field,

    gamma(x, t) = theta(t - |x|) g(sqrt(t^2 - x^2)),
    g(u)        = -1/2 ∫_0^∞ f^2(omega) J0(omega u) d omega,

and the pair inverts as the order-zero Hankel transform

    f^2(omega) = -2 omega ∫_0^∞ u g(u) J0(omega u) du.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PositivityError
from .io import read_table, write_table
from .numerics.bessel import bessel_j0
from .numerics.hankel import hankel0_forward, hankel0_tail
from .numerics.quadrature import composite_grid, uniform_grid

EXP_CUTOFF = "exp-cutoff"
GAUSSIAN_CUTOFF = "gaussian-cutoff"
TABULATED = "tabulated"
FAMILIES = (EXP_CUTOFF, GAUSSIAN_CUTOFF, TABULATED)

# frequency cutoff in units of the family's Lambda
OMEGA_MAX_FACTOR = {EXP_CUTOFF: 40.0, GAUSSIAN_CUTOFF: 8.0}

TAIL_REL_TOL = 1e-6
NEGATIVE_SAMPLE_TOL = 1e-12
POSITIVITY_TOL = 1e-8
HEAD_LENGTH = 30.0


def _array(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CouplingFunction:
    """
    Reservoir coupling, stored through its square f^2(omega).

    Use the constructors `exp_cutoff`, `gaussian_cutoff` and `from_table`.

    Attributes
    ----------
    family : str
        ``"exp-cutoff"``   f^2 = lam^2 omega exp(-omega / Lambda)
        ``"gaussian-cutoff"``   f^2 = lam^2 omega exp(-omega^2 / Lambda^2)
        ``"tabulated"``   linear interpolation of samples, zero beyond the last
    strength : float
        lam >= 0.
    cutoff : float
        Lambda > 0 (for tables: the last sampled frequency).
    """

    family: str
    strength: float = 1.0
    cutoff: float = 1.0
    table_omega: np.ndarray = field(default=None, repr=False, compare=False)
    table_f2: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown coupling family {self.family!r}")
        if not (math.isfinite(self.strength) and self.strength >= 0.0):
            raise DomainError(f"coupling strength must be >= 0, got {self.strength}")
        if not (math.isfinite(self.cutoff) and self.cutoff > 0.0):
            raise DomainError(f"cutoff must be > 0, got {self.cutoff}")
        if self.family == TABULATED:
            om, f2 = self.table_omega, self.table_f2
            if om is None or f2 is None or len(om) != len(f2) or len(om) < 2:
                raise DomainError("tabulated coupling needs matching omega and f2 samples")
            om, f2 = np.asarray(om, float), np.asarray(f2, float)
            if om[0] < 0.0 or np.any(np.diff(om) <= 0.0):
                raise DomainError("tabulated omega must be >= 0 and strictly increasing")
            if np.any(~np.isfinite(f2)):
                raise DomainError("tabulated f2 must be finite")
            if np.any(f2 < -NEGATIVE_SAMPLE_TOL):
                bad = om[np.argmax(f2 < -NEGATIVE_SAMPLE_TOL)]
                raise PositivityError(f"tabulated f2 is negative at omega={bad:g}")
            object.__setattr__(self, "table_omega", _array(om))
            object.__setattr__(self, "table_f2", _array(np.maximum(f2, 0.0)))

    @classmethod
    def exp_cutoff(cls, strength=1.0, cutoff=1.0):
        return cls(EXP_CUTOFF, float(strength), float(cutoff))

    @classmethod
    def gaussian_cutoff(cls, strength=1.0, cutoff=1.0):
        return cls(GAUSSIAN_CUTOFF, float(strength), float(cutoff))

    @classmethod
    def from_table(cls, omega, f2):
        omega = np.asarray(omega, dtype=float)
        return cls(TABULATED, 1.0, float(omega[-1]), omega, np.asarray(f2, dtype=float))

    @classmethod
    def read_csv(cls, path):
        omega, f2 = read_table(path, ("omega", "f2"), sorted_first=True)
        return cls.from_table(omega, f2)

    def to_csv(self, path, omega=None):
        if omega is None:
            omega = self.table_omega if self.family == TABULATED else self.default_grid().nodes
        return write_table(path, ("omega", "f2"), (omega, self.f2(omega)))

    def f2(self, omega):
        """Spectral strength f^2(omega); zero for omega < 0."""
        w = np.asarray(omega, dtype=float)
        lam2, cut = self.strength**2, self.cutoff
        if self.family == EXP_CUTOFF:
            out = lam2 * w * np.exp(-np.maximum(w, 0.0) / cut)
        elif self.family == GAUSSIAN_CUTOFF:
            out = lam2 * w * np.exp(-((w / cut) ** 2))
        else:
            out = np.interp(w, self.table_omega, self.table_f2, left=0.0, right=0.0)
            if self.table_omega[0] > 0.0:
                # linear ramp from the origin down to the first sample
                first = self.table_omega[0]
                ramp = (w >= 0.0) & (w < first)
                out = np.where(ramp, self.table_f2[0] * w / first, out)
        out = np.where(w < 0.0, 0.0, out)
        return out if np.ndim(omega) else float(out)

    def f(self, omega):
        """Coupling f(omega) = sqrt(f^2(omega))."""
        return np.sqrt(self.f2(omega))

    @property
    def is_zero(self):
        if self.family == TABULATED:
            return not np.any(self.table_f2 > 0.0)
        return self.strength == 0.0

    @property
    def omega_max(self):
        """Frequency beyond which f^2 is negligible (tail < 1e-12 of the total)."""
        if self.family == TABULATED:
            return float(self.table_omega[-1])
        return OMEGA_MAX_FACTOR[self.family] * self.cutoff

    def total(self):
        """∫_0^∞ f^2(omega) d omega."""
        lam2, cut = self.strength**2, self.cutoff
        if self.family == EXP_CUTOFF:
            return lam2 * cut * cut
        if self.family == GAUSSIAN_CUTOFF:
            return 0.5 * lam2 * cut * cut
        om = np.concatenate([[0.0], self.table_omega]) if self.table_omega[0] > 0 else self.table_omega
        return float(np.trapezoid(self.f2(om), om))

    def tail(self, start):
        """∫_start^∞ f^2(omega) d omega, analytic for the built-in families."""
        lam2, cut = self.strength**2, self.cutoff
        start = max(float(start), 0.0)
        if self.family == EXP_CUTOFF:
            return lam2 * cut * (start + cut) * math.exp(-start / cut)
        if self.family == GAUSSIAN_CUTOFF:
            return 0.5 * lam2 * cut * cut * math.exp(-((start / cut) ** 2))
        om = self.table_omega
        if start >= om[-1]:
            return 0.0
        pts = np.concatenate([[start], om[om > start]])
        return float(np.trapezoid(self.f2(pts), pts))

    def default_grid(self, panel_width=None, order=16, omega_max=None):
        """Composite Gauss-Legendre grid on [0, omega_max]."""
        top = self.omega_max if omega_max is None else float(omega_max)
        if self.family == TABULATED:
            # panels follow the table so kinks sit on panel edges
            om = self.table_omega
            breaks = np.unique(np.concatenate([[0.0], om[om <= top]]))
            if panel_width is not None:
                breaks = _subdivide(breaks, panel_width)
            return composite_grid(breaks, order)
        width = 0.25 * self.cutoff if panel_width is None else panel_width
        return uniform_grid(0.0, top, width, order)

    def describe(self):
        if self.family == TABULATED:
            return {"family": self.family, "samples": int(self.table_omega.size)}
        return {"family": self.family, "lambda": self.strength, "cutoff": self.cutoff}


def _subdivide(breaks, width):
    out = [breaks[:1]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(math.ceil((hi - lo) / width - 1e-12)))
        out.append(np.linspace(lo, hi, n + 1)[1:])
    return np.concatenate(out)


def green_function(omega, x, t):
    """
    Retarded Green's function of the reservoir field of mass `omega`.

    G(x, t) = -1/2 theta(t - |x|) J0(omega sqrt(t^2 - x^2)), with theta(0) = 1.
    Vectorised over all arguments.
    """
    omega, x, t = (np.asarray(v, dtype=float) for v in (omega, x, t))
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise DomainError("green_function needs finite arguments")
    if np.any(omega < 0.0):
        raise DomainError("reservoir frequency must be >= 0")
    inside = t >= np.abs(x)
    u = np.sqrt(np.where(inside, t * t - x * x, 0.0))
    out = np.where(inside, -0.5 * bessel_j0(omega * u), 0.0)
    return out if out.ndim else float(out)


def laplace_green(omega, x, s):
    """Temporal Laplace transform of `green_function`, Re s > 0."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0.0):
        raise DomainError("laplace_green needs Re s > 0")
    if np.any(np.asarray(omega) < 0.0):
        raise DomainError("reservoir frequency must be >= 0")
    root = np.sqrt(s * s + np.asarray(omega, dtype=float) ** 2)
    out = -np.exp(-root * np.abs(x)) / (2.0 * root)
    return out if out.ndim else complex(out)


def omega_grid_for(coupling, u_max, order=16):
    """Frequency grid fine enough to resolve J0(omega u) for u <= u_max."""
    width = 0.25 * coupling.cutoff
    if u_max > 0.0:
        width = min(width, math.pi / u_max)
    return coupling.default_grid(panel_width=width, order=order)


def _check_tail(coupling, grid):
    total = coupling.total()
    if total <= 0.0:
        return
    tail = coupling.tail(grid.domain[1])
    if tail > TAIL_REL_TOL * total:
        raise ConvergenceError(
            f"frequency grid ends at {grid.domain[1]:g}; the neglected tail of f^2 "
            f"is {tail / total:.2e} of the total"
        )


def memory_from_coupling(coupling, u, grid=None, chunk=256):
    """
    Light-cone profile g(u) = -1/2 ∫ f^2(omega) J0(omega u) d omega.

    Parameters
    ----------
    coupling : CouplingFunction
    u : float or array_like
        Invariant interval(s), >= 0.
    grid : QuadratureGrid, optional
        Frequency grid. By default one resolving the J0 oscillation at the
        largest requested u is built.

    Raises
    ------
    ConvergenceError
        If the grid stops where more than 1e-6 of ∫ f^2 remains.
    """
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(uu < 0.0) or not np.all(np.isfinite(uu)):
        raise DomainError("u must be finite and >= 0")
    if coupling.is_zero:
        out = np.zeros_like(uu)
    else:
        if grid is None:
            grid = omega_grid_for(coupling, float(uu.max()))
        _check_tail(coupling, grid)
        w = grid.weights * coupling.f2(grid.nodes)
        out = np.empty_like(uu)
        for i in range(0, uu.size, chunk):
            block = uu[i : i + chunk]
            out[i : i + chunk] = -0.5 * (bessel_j0(np.outer(block, grid.nodes)) @ w)
    return out if np.ndim(u) else float(out[0])


@dataclass(frozen=True)
class MemoryKernel:
    """
    Causal memory kernel gamma(x, t) = theta(t - |x|) g(sqrt(t^2 - x^2)).

    Attributes
    ----------
    profile : callable
        Vectorised light-cone profile g(u), u >= 0.
    support : float
        g is identically zero for u > support (inf if unbounded).
    tail : str
        How `coupling_from_memory` treats u beyond its head grid:
        ``"direct"`` evaluates the profile on an accelerated oscillatory tail,
        ``"powerlaw"`` fits g ~ c3/u^3 + c5/u^5 + ... and transforms the fit,
        ``"none"`` assumes nothing remains.
    """

    profile: object
    support: float = math.inf
    tail: str = "direct"
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.tail not in ("direct", "powerlaw", "none"):
            raise DomainError(f"unknown tail treatment {self.tail!r}")

    def g(self, u):
        uu = np.asarray(u, dtype=float)
        val = np.asarray(self.profile(np.atleast_1d(uu)), dtype=float)
        if math.isfinite(self.support):
            val = np.where(np.atleast_1d(uu) > self.support, 0.0, val)
        return val.reshape(uu.shape) if uu.ndim else float(val.ravel()[0])

    def __call__(self, x, t):
        """gamma(x, t); exactly zero outside the forward light cone."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        x, t = np.broadcast_arrays(x, t)
        inside = t >= np.abs(x)
        out = np.zeros(x.shape)
        if np.any(inside):
            u = np.sqrt(t[inside] ** 2 - x[inside] ** 2)
            out[inside] = self.g(u)
        return out if out.ndim else float(out)

    @classmethod
    def from_coupling(cls, coupling, grid=None):
        """Kernel induced by a coupling function (always dissipative)."""

        def profile(u):
            return memory_from_coupling(coupling, u, grid)

        return cls(profile, math.inf, "powerlaw", coupling)

    @classmethod
    def from_profile(cls, profile, support=math.inf, tail="direct", validate=True, omegas=None):
        kernel = cls(profile, support, tail)
        if validate:
            kernel.check_dissipative(omegas)
        return kernel

    @classmethod
    def from_table(cls, u, gamma, validate=True, omegas=None):
        """Kernel from samples of g(u), linear interpolation, zero beyond the table."""
        u = _array(u)
        gamma = _array(gamma)
        if u.ndim != 1 or u.shape != gamma.shape or u.size < 2:
            raise DomainError("table needs matching u and gamma samples")
        if u[0] != 0.0 or np.any(np.diff(u) <= 0.0):
            raise DomainError("table u must start at 0 and increase strictly")
        if not np.all(np.isfinite(gamma)):
            raise DomainError("table gamma must be finite")

        def profile(x):
            return np.interp(x, u, gamma, right=0.0)

        kernel = cls(profile, float(u[-1]), "none", (u, gamma))
        if validate:
            kernel.check_dissipative(omegas)
        return kernel

    @classmethod
    def read_csv(cls, path, validate=True):
        u, gamma = read_table(path, ("u", "gamma"), sorted_first=True)
        return cls.from_table(u, gamma, validate=validate)

    def to_csv(self, path, u):
        return write_table(path, ("u", "gamma"), (u, self.g(np.asarray(u, dtype=float))))

    def check_dissipative(self, omegas=None):
        """Reject kernels whose implied f^2 dips below -1e-8 at the sampled omegas."""
        if omegas is None:
            omegas = np.geomspace(0.05, 20.0, 24)
        coupling_from_memory(self, np.asarray(omegas, dtype=float))
        return self


def head_grid(kernel, omega_max, length=HEAD_LENGTH, order=16):
    """Grid in u covering the part of the profile integrated directly."""
    end = min(length, kernel.support)
    width = 0.5
    if omega_max > 0.0:
        width = min(width, math.pi / omega_max)
    if isinstance(kernel.source, tuple):
        # tabulated profile: put every sample on a panel edge
        breaks = _subdivide(np.asarray(kernel.source[0]), width)
        return composite_grid(breaks, order)
    return uniform_grid(0.0, end, width, order)


def _powerlaw_tail(kernel, start, omegas, powers=(3, 5, 7, 9), samples=24):
    u = np.linspace(start, 2.0 * start, samples)
    g = kernel.g(u)
    basis = np.stack([(start / u) ** p for p in powers], axis=1)
    coef, *_ = np.linalg.lstsq(basis, g, rcond=None)
    resid = np.max(np.abs(basis @ coef - g))
    if resid > 1e-6 * max(np.max(np.abs(g)), 1e-300) and resid > 1e-16:
        raise ConvergenceError(
            f"memory profile beyond u={start:g} is not an inverse-power tail (residual {resid:.2e})"
        )
    out = np.zeros(len(omegas))
    for c, p in zip(coef, powers):
        if c == 0.0:
            continue
        fn = lambda x, p=p: (start / x) ** p
        out += c * np.array([hankel0_tail(fn, start, w) for w in omegas])
    return out


def coupling_from_memory(kernel, omega, grid=None, tail=None, positivity_tol=POSITIVITY_TOL):
    """
    Spectral strength implied by a memory kernel,

        f^2(omega) = -2 omega ∫_0^∞ u g(u) J0(omega u) du.

    Parameters
    ----------
    kernel : MemoryKernel or callable
        A bare callable is treated as a closed-form profile with a direct tail.
    omega : float or array_like
        Frequencies, >= 0.
    grid : QuadratureGrid, optional
        Grid in u for the directly integrated head; the remainder beyond its
        end is handled according to `tail`.
    tail : str, optional
        Overrides ``kernel.tail``.
    positivity_tol : float
        Values below ``-positivity_tol`` raise `PositivityError`.

    Returns
    -------
    float or ndarray
    """
    if not isinstance(kernel, MemoryKernel):
        kernel = MemoryKernel(kernel)
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om < 0.0) or not np.all(np.isfinite(om)):
        raise DomainError("omega must be finite and >= 0")
    mode = kernel.tail if tail is None else tail
    if grid is None:
        grid = head_grid(kernel, float(om.max()))
    g = kernel.g(grid.nodes)
    head = np.array([hankel0_forward(g, grid, w, tail_tol=np.inf) for w in om])
    end = grid.domain[1]
    rest = np.zeros_like(om)
    if end < kernel.support and mode != "none":
        positive = om > 0.0
        if mode == "direct":
            rest[positive] = [hankel0_tail(kernel.g, end, w) for w in om[positive]]
        else:
            rest[positive] = _powerlaw_tail(kernel, end, om[positive])
    f2 = -2.0 * om * (head + rest)
    if np.any(f2 < -positivity_tol):
        bad = om[np.argmax(f2 < -positivity_tol)]
        raise PositivityError(
            f"memory kernel implies f^2({bad:g}) = {f2[np.argmax(f2 < -positivity_tol)]:.3e} < 0; "
            "only dissipative media are supported"
        )
    return f2 if np.ndim(omega) else float(f2[0])
