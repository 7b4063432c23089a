import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_field import (
    CouplingFunction,
    MemoryKernel,
    coupling_from_memory,
    green_function,
    laplace_green,
    memory_from_coupling,
)
from dissipative_field.errors import ConvergenceError, DomainError, PositivityError
from dissipative_field.numerics import uniform_grid

import oracles

J0_ZERO = 2.404825557695773
PAIR = lambda u: -0.5 * (1.0 + u * u) ** -1.5  # noqa: E731  profile of f^2 = omega exp(-omega)


# -- Green's function ------------------------------------------------------------


def test_green_on_cone_tip():
    assert green_function(3.0, 0.0, 1e-300) == -0.5
    assert green_function(3.0, 0.0, 0.0) == -0.5  # theta(0) = 1


def test_green_outside_cone():
    assert green_function(1.0, 2.0, 1.0) == 0.0


def test_green_at_bessel_zero():
    assert abs(green_function(1.0, 0.0, J0_ZERO)) < 1e-10


def test_green_rejects_bad_input():
    with pytest.raises(DomainError):
        green_function(-1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        green_function(1.0, math.nan, 1.0)


@pytest.mark.parametrize("omega, s, expected", [(0.0, 1.0, -0.5), (2.0, 2.0, -1.0 / (4.0 * math.sqrt(2.0)))])
def test_laplace_green_examples(omega, s, expected):
    assert laplace_green(omega, 0.0, s).real == pytest.approx(expected, abs=1e-15)


def test_laplace_green_matches_time_domain():
    # ∫_1^∞ e^{-t} (-1/2) J0(sqrt(t^2 - 1)) dt
    ref = mpmath.quad(lambda t: -0.5 * mpmath.exp(-t) * mpmath.besselj(0, mpmath.sqrt(t * t - 1)), [1, 10, 40, mpmath.inf])
    assert abs(laplace_green(1.0, 1.0, 1.0) - float(ref)) < 1e-7


def test_laplace_green_rejects_left_half_plane():
    with pytest.raises(DomainError):
        laplace_green(1.0, 0.0, -0.5 + 1j)


@pytest.mark.parametrize("omega", [0.0, 0.7, 2.0])
@pytest.mark.parametrize("x, t", [(0.0, 1.5), (0.4, 2.0), (-1.0, 3.0)])
def test_green_klein_gordon_residual(omega, x, t):
    h = 1e-3
    G = lambda a, b: green_function(omega, a, b)  # noqa: E731
    dtt = (G(x, t + h) - 2 * G(x, t) + G(x, t - h)) / h**2
    dxx = (G(x + h, t) - 2 * G(x, t) + G(x - h, t)) / h**2
    assert abs(dtt - dxx + omega**2 * G(x, t)) <= 1e-4


# -- couplings ---------------------------------------------------------------------


@pytest.mark.parametrize("make", [CouplingFunction.exp_cutoff, CouplingFunction.gaussian_cutoff])
def test_builtin_families_vanish_at_origin_and_are_nonnegative(make):
    c = make(1.3, 0.7)
    assert c.f2(0.0) == 0.0
    grid = c.default_grid()
    assert np.all(c.f2(grid.nodes) >= 0.0)


@pytest.mark.parametrize("make", [CouplingFunction.exp_cutoff, CouplingFunction.gaussian_cutoff])
@pytest.mark.parametrize("lam, cut", [(1.0, 1.0), (0.5, 2.0)])
def test_totals_and_tails(make, lam, cut):
    c = make(lam, cut)
    grid = uniform_grid(0.0, 60.0 * cut, 0.25 * cut)
    assert c.total() == pytest.approx(float(np.dot(grid.weights, c.f2(grid.nodes))), rel=1e-12)
    tail_grid = uniform_grid(1.5 * cut, 60.0 * cut, 0.25 * cut)
    assert c.tail(1.5 * cut) == pytest.approx(float(np.dot(tail_grid.weights, c.f2(tail_grid.nodes))), rel=1e-10)
    # the cutoff keeps the neglected part below 1e-12 of the total
    assert c.tail(c.omega_max) < 1e-12 * c.total()


def test_table_rejects_negative_samples():
    with pytest.raises(PositivityError):
        CouplingFunction.from_table([0.0, 1.0, 2.0], [0.0, -1e-6, 0.0])
    # within the rounding allowance the sample is clipped to zero
    c = CouplingFunction.from_table([0.0, 1.0, 2.0], [0.0, -1e-13, 0.0])
    assert c.f2(1.0) == 0.0


def test_table_interpolates_linearly_and_vanishes_beyond():
    c = CouplingFunction.from_table([0.0, 1.0, 3.0], [0.0, 2.0, 1.0])
    assert c.f2(0.5) == 1.0
    assert c.f2(2.0) == 1.5
    assert c.f2(3.5) == 0.0


def test_coupling_csv_roundtrip(tmp_path):
    om = np.linspace(0.0, 5.0, 11)
    c = CouplingFunction.from_table(om, om * np.exp(-om))
    path = c.to_csv(tmp_path / "coupling.csv")
    text = path.read_text().splitlines()
    assert text[0] == "omega,f2"
    back = CouplingFunction.read_csv(path)
    np.testing.assert_array_equal(back.table_omega, c.table_omega)
    np.testing.assert_array_equal(back.table_f2, c.table_f2)


# -- memory profile ------------------------------------------------------------------


def test_memory_at_origin():
    c = CouplingFunction.exp_cutoff(1.0, 1.0)
    assert memory_from_coupling(c, 0.0) == pytest.approx(-0.5, abs=1e-9)


def test_memory_closed_form_and_brute_force():
    c = CouplingFunction.exp_cutoff(1.0, 1.0)
    brute = -0.5 * float(mpmath.quad(lambda w: w * mpmath.exp(-w) * mpmath.besselj(0, w), [0, 10, 20, 40, mpmath.inf]))
    expected = -0.5 * 2.0**-1.5
    assert abs(brute - expected) < 1e-12
    assert memory_from_coupling(c, 1.0) == pytest.approx(expected, abs=1e-8)


def test_memory_matches_closed_form_profile():
    c = CouplingFunction.exp_cutoff(1.0, 1.0)
    u = np.linspace(0.0, 25.0, 101)
    assert np.max(np.abs(memory_from_coupling(c, u) - PAIR(u))) < 1e-12


def test_memory_of_zero_coupling():
    c = CouplingFunction.exp_cutoff(0.0, 1.0)
    assert np.all(memory_from_coupling(c, np.array([0.0, 1.0, 10.0])) == 0.0)


def test_memory_rejects_short_grid():
    c = CouplingFunction.exp_cutoff(1.0, 1.0)
    with pytest.raises(ConvergenceError):
        memory_from_coupling(c, 1.0, grid=uniform_grid(0.0, 10.0, 0.25))


def test_memory_rejects_negative_u():
    with pytest.raises(DomainError):
        memory_from_coupling(CouplingFunction.exp_cutoff(), -1.0)


# -- inversion -----------------------------------------------------------------------


def test_inverse_of_closed_form_profile():
    assert coupling_from_memory(PAIR, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-7)


def test_inverse_brute_force_oracle():
    ref = -2.0 * oracles.hankel0_mp(lambda u: -0.5 * (1 + u * u) ** -1.5, 1.0)
    assert abs(ref - math.exp(-1.0)) < 1e-12


def test_inverse_of_zero_profile():
    om = np.array([0.0, 0.5, 3.0])
    assert np.all(coupling_from_memory(lambda u: np.zeros_like(u), om) == 0.0)


def test_round_trip_example_points():
    c = CouplingFunction.exp_cutoff(1.0, 1.0)
    om = np.array([0.5, 1.0, 2.0, 4.0])
    back = coupling_from_memory(MemoryKernel.from_coupling(c), om)
    assert np.max(np.abs(back / c.f2(om) - 1.0)) <= 1e-6


@pytest.mark.parametrize("make", [CouplingFunction.exp_cutoff, CouplingFunction.gaussian_cutoff])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("cut", [0.5, 1.0, 2.0])
def test_round_trip_identity(make, lam, cut):
    c = make(lam, cut)
    om = np.linspace(0.1, 3.0, 16) * cut
    back = coupling_from_memory(MemoryKernel.from_coupling(c), om)
    assert np.max(np.abs(back / c.f2(om) - 1.0)) <= 1e-6


def test_gain_kernel_is_rejected():
    # the sign-flipped profile implies f^2 = -omega exp(-omega) < 0
    with pytest.raises(PositivityError):
        MemoryKernel.from_profile(lambda u: -PAIR(u))
    with pytest.raises(PositivityError):
        coupling_from_memory(lambda u: -PAIR(u), 1.0)


def test_tabulated_kernel_roundtrip(tmp_path):
    u = np.linspace(0.0, 60.0, 6001)
    # truncating the 1/u^3 tail at u = 60 leaves a ripple of a few 1e-6 in the
    # implied f^2, enough to fail the positivity check; only I/O is tested here
    kern = MemoryKernel.from_table(u, PAIR(u), validate=False)
    path = kern.to_csv(tmp_path / "kernel.csv", u)
    assert path.read_text().splitlines()[0] == "u,gamma"
    back = MemoryKernel.read_csv(path, validate=False)
    np.testing.assert_array_equal(back.g(u), kern.g(u))
    assert back.g(61.0) == 0.0


def test_truncated_table_fails_positivity():
    u = np.linspace(0.0, 60.0, 6001)
    with pytest.raises(PositivityError):
        MemoryKernel.from_table(u, PAIR(u))


def test_compact_table_is_accepted():
    # g = -(1 - u)^2 on [0, 1] has a positive transform
    u = np.linspace(0.0, 1.0, 401)
    kern = MemoryKernel.from_table(u, -((1.0 - u) ** 2))
    assert kern.support == 1.0


def test_table_validation():
    with pytest.raises(DomainError):
        MemoryKernel.from_table([0.5, 1.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        MemoryKernel.from_table([0.0, 1.0, 1.0], [0.0, 0.0, 0.0])


# -- kernel structure ------------------------------------------------------------------

KERNEL = MemoryKernel.from_coupling(CouplingFunction.exp_cutoff(1.0, 1.0))
finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(x=finite, t=finite)
def test_causality(x, t):
    if t < abs(x):
        assert KERNEL(x, t) == 0.0


def test_causality_vectorised():
    rng = np.random.default_rng(7)
    x = rng.uniform(-20, 20, 1000)
    t = rng.uniform(-20, 20, 1000)
    out = KERNEL(x, t)
    assert np.all(out[t < np.abs(x)] == 0.0)
    assert np.any(out[t >= np.abs(x)] != 0.0)


@settings(max_examples=100, deadline=None)
@given(u=st.floats(min_value=0.0, max_value=20.0), rapidity=st.floats(min_value=-3.0, max_value=3.0))
def test_kernel_depends_only_on_interval(u, rapidity):
    x, t = u * math.sinh(rapidity), u * math.cosh(rapidity)
    u_back = math.sqrt(max(t * t - x * x, 0.0))
    assert KERNEL(x, t) == KERNEL.g(u_back)
    assert KERNEL(0.0, u_back) == KERNEL.g(u_back)


def test_equal_intervals_give_identical_values():
    # (3, 5) and (0, 4) share u = 4 exactly
    assert KERNEL(3.0, 5.0) == KERNEL(0.0, 4.0)
    assert KERNEL(-3.0, 5.0) == KERNEL(3.0, 5.0)
