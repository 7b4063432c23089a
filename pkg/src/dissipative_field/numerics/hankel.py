"""Order-zero Hankel transforms by quadrature."""

import math
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ConvergenceError, DomainError
from .bessel import bessel_j0, j0_zeros
from .quadrature import integrate
from .series import wynn_epsilon

TAIL_TOL = 1e-10


class TailWarning(UserWarning):
    """The integrand is not negligible at the end of the grid."""


def _samples(g, grid):
    if callable(g):
        return np.asarray(g(grid.nodes), dtype=float)
    values = np.asarray(g, dtype=float)
    if values.shape != grid.nodes.shape:
        raise DomainError("sampled g must have one value per grid node")
    return values


def tail_estimate(g_end, end, omega):
    """Rough size of the Hankel integral beyond `end` for a decaying g.

    Integrating u J0(omega u) by parts, the leading tail term is of size
    |g(end)| * end * |J1(omega end)| / omega.
    """
    if omega == 0.0:
        return abs(g_end) * end * end
    return abs(g_end) * end * math.sqrt(2.0 / (math.pi * omega * end)) / omega


def hankel0_forward(g, grid, omega, tail_tol=TAIL_TOL):
    """
    ∫ u g(u) J0(omega u) du over the grid's domain.

    Parameters
    ----------
    g : callable or array_like
        Profile function of u, or its samples at ``grid.nodes``.
    grid : QuadratureGrid
        Grid in u; it should extend far enough that the remaining tail is
        negligible.
    omega : float
        Transform variable, >= 0.
    tail_tol : float
        A `TailWarning` is issued when the estimated tail beyond the grid
        exceeds this fraction of the result.

    Returns
    -------
    float
    """
    if omega < 0.0 or not math.isfinite(omega):
        raise DomainError(f"omega must be finite and >= 0, got {omega}")
    values = _samples(g, grid)
    u = grid.nodes
    result = float(np.dot(grid.weights, u * values * bessel_j0(omega * u)))
    end = grid.domain[1]
    g_end = float(g(np.array([end]))[0]) if callable(g) else float(values[-1])
    tail = tail_estimate(g_end, end, omega)
    if tail > tail_tol * max(abs(result), 1e-300) and tail > 1e-300:
        warnings.warn(
            f"estimated Hankel tail beyond u={end:g} is {tail:.2e} (result {result:.3e})",
            TailWarning,
            stacklevel=2,
        )
    return result


def hankel0_tail(g, start, omega, intervals=40, order=16, tol=1e-12):
    """
    ∫_start^∞ u g(u) J0(omega u) du for a slowly decaying g.

    The range is cut at the zeros of J0(omega u), each half-period is
    integrated by Gauss-Legendre, and the alternating partial sums are
    accelerated with Wynn's epsilon algorithm.

    Parameters
    ----------
    g : callable
        Vectorised profile.
    start : float
        Lower limit, >= 0.
    omega : float
        > 0.
    intervals : int
        Number of half-periods summed before acceleration.
    order : int
        Gauss-Legendre points per half-period.
    tol : float
        Absolute tolerance on the accelerated limit, relative to the largest
        partial sum.

    Returns
    -------
    float

    Raises
    ------
    ConvergenceError
        If the epsilon table does not settle to `tol`.
    """
    if omega <= 0.0:
        raise DomainError("oscillatory tail needs omega > 0")
    first = int(omega * start / math.pi) + 1
    zeros = j0_zeros(first + intervals + 2) / omega
    zeros = zeros[zeros > start][:intervals]
    breaks = np.concatenate([[start], zeros])
    x, w = leggauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    u = lo + half * (x + 1.0)
    vals = np.asarray(g(u.ravel()), dtype=float).reshape(u.shape)
    pieces = (half * w * u * vals * bessel_j0(omega * u)).sum(axis=1)
    sums = np.cumsum(pieces)
    if not np.any(sums):
        return 0.0
    limit, err = wynn_epsilon(sums)
    scale = max(np.max(np.abs(sums)), 1e-300)
    if not np.isfinite(limit) or err > max(tol * scale, 1e-300) * 1e3:
        raise ConvergenceError(
            f"Hankel tail from u={start:g} at omega={omega:g} did not settle (err {err:.2e})"
        )
    return float(limit)


def hankel0(g, grid, omega, tail=True):
    """Grid integral plus the accelerated tail beyond the grid end."""
    head = hankel0_forward(g, grid, omega, tail_tol=np.inf)
    if not tail or omega == 0.0:
        return head
    return head + hankel0_tail(g, grid.domain[1], omega)


__all__ = ["hankel0_forward", "hankel0_tail", "hankel0", "tail_estimate", "TailWarning", "integrate"]
