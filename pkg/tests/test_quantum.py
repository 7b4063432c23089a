import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_field import CouplingFunction, MemoryKernel, noise_spectral_density, on_shell_limit
from dissipative_field.errors import DomainError, EdgeSingularityError, ResonanceError
from dissipative_field.numerics import composite_grid
from dissipative_field.quantum import (
    FDT_CONSTANT,
    FOUR_PI_FDT_CONSTANT,
    commutator_check,
    default_k_grid,
    fdt_check,
    fdt_sample,
    steady_correlator,
    steady_correlator_scan,
)
from dissipative_field.response import response_grid

EXP = CouplingFunction.exp_cutoff(1.0, 1.0)
FREE = CouplingFunction.exp_cutoff(0.0, 1.0)
KERNEL = MemoryKernel.from_coupling(EXP)


# -- commutator ----------------------------------------------------------------------


def test_commutator_without_coupling():
    s = commutator_check(FREE, 0.3, 1.0)
    assert s.lhs == 0.0 and s.rhs == 0.0


def test_commutator_example():
    s = commutator_check(EXP, 0.3, 1.0, kernel=KERNEL)
    assert s.error <= 1e-3 * max(1.0, abs(s.rhs))


@pytest.mark.parametrize("dx", [0.5, 1.0, 2.0, -1.0])
def test_commutator_vanishes_at_equal_times(dx):
    s = commutator_check(EXP, dx, 0.0, kernel=KERNEL)
    assert s.rhs == 0.0
    assert abs(s.lhs) <= 1e-3


@pytest.mark.parametrize("dx, dt", [(0.3, 1.0), (1.5, 0.7), (-0.4, 1.9)])
def test_commutator_is_antisymmetric(dx, dt):
    a = commutator_check(EXP, dx, dt, kernel=KERNEL)
    b = commutator_check(EXP, -dx, -dt, kernel=KERNEL)
    assert b.lhs == pytest.approx(-a.lhs, abs=1e-12)
    assert b.rhs == -a.rhs


def test_commutator_outside_cone():
    # spacelike separation: the kernel side is exactly zero
    s = commutator_check(EXP, 1.5, 0.95, kernel=KERNEL)
    assert s.rhs == 0.0
    assert abs(s.lhs) <= 1e-3


def test_commutator_rejects_non_finite():
    with pytest.raises(DomainError):
        commutator_check(EXP, math.inf, 0.0, kernel=KERNEL)


# -- noise spectral density ----------------------------------------------------------------


def _binned_mode_sum(coupling, k, omega, half_width=1e-3, spacing=2e-7):
    """Noise weight per unit mode frequency from a dense set of discrete reservoir modes."""
    lo = math.sqrt(max((omega - half_width) ** 2 - k * k, 0.0))
    hi = math.sqrt((omega + half_width) ** 2 - k * k)
    w = np.arange(lo - 10 * spacing, hi + 10 * spacing, spacing) + 0.5 * spacing
    w = w[w > 0]
    wk = np.sqrt(k * k + w * w)
    inside = np.abs(wk - omega) < half_width
    weights = coupling.f2(w) / (2.0 * wk) * spacing
    return float(weights[inside].sum() / (2 * half_width))


def test_noise_density_example():
    d = noise_spectral_density(EXP, 0.0, 1.0)
    assert d.value == pytest.approx(math.exp(-1.0) / 2.0, rel=1e-15)
    assert _binned_mode_sum(EXP, 0.0, 1.0) == pytest.approx(d.value, rel=1e-4)


def test_noise_density_jacobian_against_mode_sum():
    d = noise_spectral_density(EXP, 0.5, 1.3)
    assert _binned_mode_sum(EXP, 0.5, 1.3) == pytest.approx(d.value, rel=1e-4)


def test_noise_density_trivial_cases():
    assert noise_spectral_density(EXP, 2.0, 1.0).value == 0.0
    assert noise_spectral_density(FREE, 0.0, 1.0).value == 0.0


def test_noise_density_edge():
    with pytest.raises(EdgeSingularityError):
        noise_spectral_density(EXP, 1.0, 1.0)
    with pytest.raises(DomainError):
        noise_spectral_density(EXP, 0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(k=st.floats(min_value=-5.0, max_value=5.0), omega=st.floats(min_value=1e-6, max_value=50.0))
def test_noise_density_nonnegative(k, omega):
    if omega * omega == k * k:
        return
    assert noise_spectral_density(EXP, k, omega).value >= 0.0


# -- fluctuation-dissipation ---------------------------------------------------------------


def test_fdt_examples():
    a = fdt_check(EXP, 0.0, 1.0)
    b = fdt_check(EXP, 0.5, 1.3)
    assert b == pytest.approx(a, rel=1e-6)


def test_fdt_strength_invariance():
    double = CouplingFunction.exp_cutoff(2.0, 1.0)
    assert fdt_check(double, 0.5, 1.3) == pytest.approx(fdt_check(EXP, 0.5, 1.3), rel=1e-12)


@pytest.mark.parametrize("gap", [1e-1, 1e-2, 1e-3])
def test_fdt_near_light_line(gap):
    plateau = fdt_check(EXP, 0.0, 1.0)
    # with f^2 ~ omega both sides stay finite at the edge; their ratio is flat
    s = fdt_sample(EXP, 0.8, 0.8 + gap)
    assert s.ratio == pytest.approx(plateau, rel=1e-4)


def test_fdt_constant_across_random_pairs():
    rng = np.random.default_rng(20)
    ratios = []
    for _ in range(10):
        k = rng.uniform(-2.0, 2.0)
        omega = abs(k) + rng.uniform(0.1, 4.0)
        ratios.append(fdt_check(EXP, k, omega))
    ratios = np.array(ratios)
    assert np.ptp(ratios) / np.mean(ratios) < 1e-5
    assert np.mean(ratios) == pytest.approx(FDT_CONSTANT, rel=1e-12)
    # the other normalisation differs by a convention-dependent factor
    assert FOUR_PI_FDT_CONSTANT / FDT_CONSTANT == pytest.approx(4 * math.pi**2)


def test_fdt_from_independent_routes():
    # discrete mode sum for the noise, imaginary part from on_shell_limit
    k, omega = 0.5, 1.3
    wp = math.sqrt(omega**2 - k**2)
    ratio = _binned_mode_sum(EXP, k, omega) / abs(on_shell_limit(EXP, k, wp).imag_part)
    assert ratio == pytest.approx(FDT_CONSTANT, rel=1e-4)


def test_fdt_rejects_below_light_line():
    with pytest.raises(DomainError):
        fdt_check(EXP, 1.0, 1.0 + 1e-7)


# -- steady-state correlator ---------------------------------------------------------------

SEPARATIONS = [(0.0, 0.0), (1.0, 0.5), (-0.5, 2.0), (2.0, -1.0)]


@pytest.fixture(scope="module")
def correlator_scans():
    k_grid = default_k_grid()
    om_grid = response_grid(EXP)
    seps = SEPARATIONS + [(-a, -b) for a, b in SEPARATIONS]
    coarse = steady_correlator_scan(EXP, 1.0, seps, k_grid, om_grid)
    fine = steady_correlator_scan(EXP, 1.0, SEPARATIONS, k_grid.refined(), om_grid.refined())
    return coarse, fine


def test_correlator_without_coupling():
    assert steady_correlator(FREE, 1.0, 0.3, 0.2).value == 0j


def test_correlator_hermiticity(correlator_scans):
    coarse, _ = correlator_scans
    n = len(SEPARATIONS)
    for a, b in zip(coarse[:n], coarse[n:]):
        assert abs(a.value - b.value.conjugate()) <= 1e-10


def test_correlator_equal_point_real_positive(correlator_scans):
    coarse, _ = correlator_scans
    v = coarse[0].value
    assert v.imag == 0.0
    assert v.real > 0.0


def test_correlator_grid_convergence(correlator_scans):
    coarse, fine = correlator_scans
    for a, b in zip(coarse, fine):
        assert abs(a.value - b.value) <= 1e-4 * abs(b.value)


def test_correlator_resonance_detected():
    # a tiny coupling leaves |D| ~ lam^2 at omega = m; put a node there
    weak = CouplingFunction.exp_cutoff(1e-8, 1.0)
    om_grid = composite_grid([0.9, 1.1], 1)
    assert om_grid.nodes[0] == 1.0
    with pytest.raises(ResonanceError):
        steady_correlator(weak, 1.0, 0.0, 0.0, omega_grid=om_grid)


def test_correlator_rejects_bad_mass():
    with pytest.raises(DomainError):
        steady_correlator(EXP, 0.0, 0.0, 0.0)
