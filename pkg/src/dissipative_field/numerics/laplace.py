"""
Numerical inverse Laplace transform.

Two independent methods:

talbot
    Talbot contour: the fixed rule of Abate and Valko, widened when the
    singularities of F sit high on the imaginary axis. Deforms the Bromwich
    line into the left half-plane, so F must be analytic there apart from
    singularities enclosed by the contour.
fourier
    Fourier-series inversion on the Bromwich line with de Hoog, Knight and
    Stokes (Pade) acceleration. F is only evaluated at
    Re s = gamma > abscissa, which makes it the method of choice when F has
    a branch cut along the imaginary axis.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, EvaluationError
from .series import wynn_epsilon

TALBOT = "talbot"
FOURIER = "fourier"


@dataclass(frozen=True)
class LaplaceInversionConfig:
    """
    Settings for `inverse_laplace`.

    Attributes
    ----------
    method : str
        ``"talbot"`` or ``"fourier"``.
    node_count : int
        Talbot: contour nodes. Fourier: the series uses ``2*node_count + 1``
        terms. At least 16.
    target_time_range : tuple of float
        Times the caller intends to invert at; informational only.
    abscissa : float
        Upper bound on the real part of the singularities of F.
    oscillation : float
        Upper bound on |Im s| over the singularities of F. Talbot widens its
        contour (and adds nodes) to enclose them; ignored by ``fourier``.
    tol : float
        Target error of the Fourier-series method; sets the Bromwich shift.
    """

    method: str = TALBOT
    node_count: int = 32
    target_time_range: tuple = (1e-2, 1e2)
    abscissa: float = 0.0
    oscillation: float = 0.0
    tol: float = 1e-12

    def __post_init__(self):
        if self.method not in (TALBOT, FOURIER):
            raise DomainError(f"unknown inversion method {self.method!r}")
        if int(self.node_count) != self.node_count or self.node_count < 16:
            raise DomainError("node_count must be an integer >= 16")
        lo, hi = self.target_time_range
        if not (0.0 < lo <= hi):
            raise DomainError("target_time_range must be an interval of t > 0")
        if self.oscillation < 0.0:
            raise DomainError("oscillation bound must be >= 0")
        if not (0.0 < self.tol < 1.0):
            raise DomainError("tol must lie in (0, 1)")


def _call(F, s):
    val = np.asarray(F(s), dtype=complex)
    if val.shape != s.shape:
        val = np.broadcast_to(val, s.shape)
    bad = ~np.isfinite(val)
    if np.any(bad):
        node = complex(s[np.argmax(bad)])
        raise EvaluationError(f"transform is not finite at s = {node}", node=node)
    return val


def talbot(F, t, M=32, shift=0.0, oscillation=0.0):
    """
    Talbot inversion at a single time t > 0.

    With ``oscillation == 0`` this is the fixed Talbot rule. Otherwise the
    contour s = shift + lam * (theta cot(theta) + i nu theta) is widened
    (nu > 1) so that it still encloses singularities up to
    |Im s| = oscillation, and the node count grows in proportion to nu.
    """
    lam = 2.0 * M / (5.0 * t)
    nu = max(1.0, 3.0 * oscillation / (math.pi * lam))
    n = int(math.ceil(M * nu))
    theta = np.arange(1, n) * math.pi / n
    cot = 1.0 / np.tan(theta)
    s = shift + lam * (theta * cot + 1j * nu * theta)
    ds = nu + 1j * (theta / np.sin(theta) ** 2 - cot)
    s0 = shift + lam
    vals = _call(F, np.concatenate([[s0], s]))
    total = 0.5 * nu * (math.exp(s0 * t) * vals[0]).real
    total += np.sum((np.exp(t * s) * vals[1:] * ds).real)
    return float(lam / n * total)


def fourier_series(F, t, M=32, abscissa=0.0, tol=1e-12, scale=2.0):
    """
    Fourier-series inversion on the Bromwich line, accelerated.

    Samples F at s_k = gamma + i k pi / T, k = 0..2M, with T = scale * t and
    gamma = abscissa - log(tol) / (2T), and takes the diagonal Pade value of
    the resulting power series in z = exp(i pi t / T). The Pade value is the
    one de Hoog, Knight and Stokes reach through a quotient-difference table;
    it is computed here with Wynn's epsilon algorithm, which keeps its
    accuracy in double precision where the quotient-difference table does not.
    """
    T = scale * t
    gamma = abscissa - math.log(tol) / (2.0 * T)
    k = np.arange(2 * M + 1)
    a = _call(F, gamma + 1j * math.pi * k / T).copy()
    a[0] *= 0.5
    z = np.exp(1j * math.pi * t / T * k)
    limit, _ = wynn_epsilon(np.cumsum(a * z))
    return float(math.exp(gamma * t) / T * limit.real)


def inverse_laplace(F, cfg, t):
    """
    f(t) from its Laplace transform F(s).

    Parameters
    ----------
    F : callable
        Vectorised function of complex s.
    cfg : LaplaceInversionConfig
    t : float or array_like
        Times, all > 0.

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        If any t <= 0.
    EvaluationError
        If F is not finite at a node of the contour.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~np.isfinite(times)) or np.any(times <= 0.0):
        raise DomainError("inverse Laplace transform needs finite t > 0")
    if cfg.method == TALBOT:
        out = np.array(
            [talbot(F, ti, cfg.node_count, cfg.abscissa, cfg.oscillation) for ti in times]
        )
    else:
        out = np.array(
            [fourier_series(F, ti, cfg.node_count, cfg.abscissa, cfg.tol) for ti in times]
        )
    if np.ndim(t) == 0:
        return float(out[0])
    return out
