"""Quadrature grids and integration on them."""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ConvergenceError, DomainError, EvaluationError

GAUSS_LEGENDRE = "gauss-legendre"
ADAPTIVE = "adaptive"
SCHEMES = (GAUSS_LEGENDRE, ADAPTIVE)

DEFAULT_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureGrid:
    """
    Nodes and weights for integrals over a closed interval [a, b].

    A grid is a set of Gauss-Legendre panels of a common order. With the
    ``gauss-legendre`` scheme `integrate` is the plain weighted sum; with
    ``adaptive`` the panels are only the starting partition and get bisected
    until the requested tolerance is met.

    Attributes
    ----------
    nodes, weights : ndarray
        Abscissae (strictly increasing) and positive weights.
    domain : tuple of float
        (a, b) with 0 <= a < b.
    scheme : str
        ``"gauss-legendre"`` or ``"adaptive"``.
    breaks : ndarray
        Panel boundaries, ``breaks[0] == a`` and ``breaks[-1] == b``.
    order : int
        Nodes per panel.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple
    scheme: str = GAUSS_LEGENDRE
    breaks: np.ndarray = field(default=None, repr=False)
    order: int = 0

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        weights = _frozen(self.weights)
        a, b = (float(v) for v in self.domain)
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if not (0.0 <= a < b) or not np.isfinite(b):
            raise DomainError(f"grid domain must satisfy 0 <= a < b < inf, got {(a, b)}")
        if nodes.shape != weights.shape or nodes.ndim != 1 or nodes.size == 0:
            raise DomainError("nodes and weights must be matching non-empty 1-d arrays")
        if np.any(np.diff(nodes) <= 0.0):
            raise DomainError("nodes must be strictly increasing")
        if nodes[0] < a or nodes[-1] > b:
            raise DomainError("nodes must lie inside the domain")
        if np.any(weights <= 0.0):
            raise DomainError("weights must be positive")
        breaks = self.breaks if self.breaks is not None else [a, b]
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "breaks", _frozen(breaks))

    def __len__(self):
        return self.nodes.size

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    def refined(self, factor=2):
        """Same panels split `factor` times finer, same order and scheme."""
        fine = [np.linspace(lo, hi, factor + 1)[:-1] for lo, hi in zip(self.breaks[:-1], self.breaks[1:])]
        breaks = np.append(np.concatenate(fine), self.breaks[-1])
        return composite_grid(breaks, self.order, scheme=self.scheme)


def gauss_legendre(a, b, n, scheme=GAUSS_LEGENDRE):
    """Single-panel n-point Gauss-Legendre grid on [a, b]."""
    return composite_grid([a, b], n, scheme=scheme)


def composite_grid(breaks, order=16, scheme=GAUSS_LEGENDRE):
    """
    Composite Gauss-Legendre grid.

    Parameters
    ----------
    breaks : array_like
        Increasing panel boundaries.
    order : int
        Gauss-Legendre points per panel.
    scheme : str
        Tag stored on the grid; see `QuadratureGrid`.
    """
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0.0):
        raise DomainError("panel breaks must be a strictly increasing sequence")
    if order < 1:
        raise DomainError("order must be positive")
    x, w = leggauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return QuadratureGrid(nodes, weights, (breaks[0], breaks[-1]), scheme, breaks, order)


def uniform_grid(a, b, panel_width, order=16, scheme=GAUSS_LEGENDRE):
    """Composite grid with panels no wider than `panel_width`."""
    n = max(1, int(np.ceil((b - a) / panel_width - 1e-12)))
    return composite_grid(np.linspace(a, b, n + 1), order, scheme)


def _evaluate(f, x):
    y = np.asarray(f(x))
    if y.ndim == 0:
        y = np.broadcast_to(y, x.shape)
    bad = ~np.isfinite(y)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        node = x[tuple(idx[: x.ndim])]
        raise EvaluationError(f"integrand is not finite at node {node!r}", node=float(node))
    return y


def integrate(f, grid, tol=DEFAULT_TOL, max_panels=200000):
    """
    Integrate `f` over the grid's domain.

    Parameters
    ----------
    f : callable
        Vectorised integrand; called with a 1-d array of abscissae. May return
        real or complex values, with extra trailing dimensions allowed.
    grid : QuadratureGrid
    tol : float
        Relative tolerance for the adaptive scheme (ignored otherwise).
    max_panels : int
        Work limit for adaptive refinement.

    Returns
    -------
    float, complex or ndarray
        The weighted sum (fixed scheme) or the refined estimate (adaptive).

    Raises
    ------
    EvaluationError
        If `f` is NaN or infinite at any node; the node is attached.
    ConvergenceError
        If adaptive refinement exceeds `max_panels`.
    """
    if grid.scheme == GAUSS_LEGENDRE:
        y = _evaluate(f, grid.nodes)
        return np.tensordot(grid.weights, y, axes=(0, 0))[()]
    return _adaptive(f, grid.breaks, grid.order or 16, tol, max_panels)


def _panel_sums(f, lo, hi, x, w):
    half = 0.5 * (hi - lo)
    nodes = (lo[:, None] + half[:, None] * (x + 1.0)).ravel()
    y = _evaluate(f, nodes)
    y = y.reshape((lo.size, x.size) + y.shape[1:])
    return np.einsum("pk,pk...->p...", half[:, None] * w, y)


def _adaptive(f, breaks, order, tol, max_panels):
    x, w = leggauss(order)
    lo = np.asarray(breaks[:-1], dtype=float)
    hi = np.asarray(breaks[1:], dtype=float)
    coarse = _panel_sums(f, lo, hi, x, w)
    total_len = breaks[-1] - breaks[0]
    done = 0.0
    used = lo.size
    while lo.size:
        mid = 0.5 * (lo + hi)
        left = _panel_sums(f, lo, mid, x, w)
        right = _panel_sums(f, mid, hi, x, w)
        fine = left + right
        estimate = done + np.sum(fine, axis=0)
        scale = max(np.max(np.abs(estimate)), 1e-300)
        err = np.abs(fine - coarse)
        if err.ndim > 1:
            err = err.reshape(err.shape[0], -1).max(axis=1)
        budget = tol * scale * (hi - lo) / total_len
        ok = (err <= budget) | (hi - lo <= 1e-13 * max(1.0, abs(hi).max()))
        done = done + np.sum(fine[ok], axis=0)
        keep = ~ok
        used += 2 * int(keep.sum())
        if used > max_panels:
            raise ConvergenceError(f"adaptive quadrature exceeded {max_panels} panels")
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
    return done[()] if isinstance(done, np.ndarray) else done
