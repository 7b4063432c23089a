"""Special functions, quadrature and transform engines."""

from .bessel import bessel_j0, j0_zeros
from .hankel import TailWarning, hankel0, hankel0_forward, hankel0_tail
from .laplace import LaplaceInversionConfig, fourier_series, inverse_laplace, talbot
from .quadrature import QuadratureGrid, composite_grid, gauss_legendre, integrate, uniform_grid
from .series import wynn_epsilon

__all__ = [
    "bessel_j0",
    "j0_zeros",
    "TailWarning",
    "hankel0",
    "hankel0_forward",
    "hankel0_tail",
    "LaplaceInversionConfig",
    "fourier_series",
    "inverse_laplace",
    "talbot",
    "QuadratureGrid",
    "composite_grid",
    "gauss_legendre",
    "integrate",
    "uniform_grid",
    "wynn_epsilon",
]
