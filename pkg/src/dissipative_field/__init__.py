"""Dissipative scalar field in 1+1 dimensions: kernels, responses, vacuum statistics and a lattice oracle."""

__version__ = "0.1.0"

from .kernel import (  # noqa: E402
    CouplingFunction,
    MemoryKernel,
    coupling_from_memory,
    green_function,
    laplace_green,
    memory_from_coupling,
)
from .response import (  # noqa: E402
    ModeResponse,
    OnShellLimit,
    gamma_tilde,
    mode_kernel,
    mode_response_laplace,
    mode_response_volterra,
    on_shell_limit,
)
from .quantum import (  # noqa: E402
    commutator_check,
    fdt_check,
    noise_spectral_density,
    steady_correlator,
)
from .micro_sim import (  # noqa: E402
    EnergyReport,
    LatticeConfig,
    LatticeState,
    run_langevin_comparison,
    run_quiescent_comparison,
    step,
    total_energy,
)

__all__ = [
    "CouplingFunction",
    "MemoryKernel",
    "coupling_from_memory",
    "green_function",
    "laplace_green",
    "memory_from_coupling",
    "ModeResponse",
    "OnShellLimit",
    "gamma_tilde",
    "mode_kernel",
    "mode_response_laplace",
    "mode_response_volterra",
    "on_shell_limit",
    "commutator_check",
    "fdt_check",
    "noise_spectral_density",
    "steady_correlator",
    "EnergyReport",
    "LatticeConfig",
    "LatticeState",
    "run_langevin_comparison",
    "run_quiescent_comparison",
    "step",
    "total_energy",
]
