"""
Command-line front end.

    dissipative-field COMMAND [--config PATH] [--out DIR] [--seed N] [--verbose]

Each command writes CSV tables, PNG figures and a ``manifest.json`` listing
every file with its SHA-256. The number of worker threads used for
independent evaluations is read from DISSIPATIVE_FIELD_WORKERS (default 1);
results are always assembled in input order.
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import plotting
from .config import COMMANDS, parse_config, serialize
from .errors import ConfigError
from .io import sha256_file, write_json, write_table
from .kernel import CouplingFunction, MemoryKernel, coupling_from_memory, memory_from_coupling
from .micro_sim import LatticeConfig, LatticeState, mode_state, reservoir_sample, simulate
from .quantum import (
    FDT_CONSTANT,
    FOUR_PI_FDT_CONSTANT,
    commutator_check,
    fdt_sample,
    steady_correlator_scan,
)
from .response import default_laplace_config, mode_response_laplace, mode_response_volterra

log = logging.getLogger("dissipative_field")

WORKERS_ENV = "DISSIPATIVE_FIELD_WORKERS"
LOCK_NAME = ".lock"
MANIFEST = "manifest.json"


@dataclass
class ExitReport:
    code: int
    files: list = field(default_factory=list)
    message: str = ""


class OutputLock:
    """Exclusive lock file guarding an output directory."""

    def __init__(self, directory):
        self.path = Path(directory) / LOCK_NAME

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory is locked by another run ({self.path})") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


def workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items):
    items = list(items)
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def build_coupling(cfg):
    if cfg.family == "tabulated":
        return CouplingFunction.read_csv(cfg.table)
    if cfg.family == "gaussian-cutoff":
        return CouplingFunction.gaussian_cutoff(cfg.lam, cfg.cutoff)
    return CouplingFunction.exp_cutoff(cfg.lam, cfg.cutoff)


def _omega_samples(cfg, coupling):
    lo = 0.2 * coupling.cutoff if cfg.omega_min is None else cfg.omega_min
    hi = 2.5 * coupling.cutoff if cfg.omega_max is None else cfg.omega_max
    return np.linspace(lo, hi, cfg.omega_count)


def run_kernel(cfg, out):
    coupling = build_coupling(cfg)
    u = np.linspace(0.0, cfg.u_max, cfg.u_count)
    g = memory_from_coupling(coupling, u)
    files = [write_table(out / "kernel.csv", ("u", "gamma"), (u, g))]
    omega = np.linspace(0.0, coupling.omega_max, 401)
    files.append(write_table(out / "coupling.csv", ("omega", "f2"), (omega, coupling.f2(omega))))
    if cfg.figures:
        files.append(plotting.kernel_figure(out / "kernel.png", u, g))
    return files, {"coupling": coupling.describe(), "g0": float(g[0])}


def run_invert(cfg, out):
    if cfg.kernel_table:
        kernel = MemoryKernel.read_csv(cfg.kernel_table)
        coupling = None
        omega = np.linspace(cfg.omega_min or 0.1, cfg.omega_max or 5.0, cfg.omega_count)
    else:
        coupling = build_coupling(cfg)
        kernel = MemoryKernel.from_coupling(coupling)
        omega = _omega_samples(cfg, coupling)
    f2 = coupling_from_memory(kernel, omega)
    files = [write_table(out / "coupling.csv", ("omega", "f2"), (omega, f2))]
    info = {"source": cfg.kernel_table or "coupling"}
    ref = None
    if coupling is not None:
        ref = coupling.f2(omega)
        info["max_rel_err"] = float(np.max(np.abs(f2 / ref - 1.0)))
    if cfg.figures:
        files.append(plotting.coupling_figure(out / "coupling.png", omega, f2, ref))
    return files, info


def run_response(cfg, out):
    coupling = build_coupling(cfg)
    responses = []
    files = []
    info = {"coupling": coupling.describe(), "k": cfg.k, "m": cfg.m}
    if cfg.method in ("volterra", "both"):
        r = mode_response_volterra(coupling, cfg.k, cfg.m, cfg.t_max, cfg.dt)
        responses.append(r)
        files.append(r.to_csv(out / "response_volterra.csv"))
        info["volterra"] = r.manifest()
    if cfg.method in ("laplace", "both"):
        times = np.linspace(cfg.t_max / cfg.output_count, cfg.t_max, cfg.output_count)
        if responses:
            # sample on the Volterra grid so the two tables line up row by row
            dt = responses[0].dt
            times = dt * np.unique(np.maximum(1, np.round(times / dt))).astype(float)
        lcfg = default_laplace_config(node_count=cfg.laplace_nodes, tol=cfg.tol)
        r = mode_response_laplace(coupling, cfg.k, cfg.m, times, lcfg)
        responses.append(r)
        files.append(r.to_csv(out / "response_laplace.csv"))
        info["laplace"] = r.manifest()
    if len(responses) == 2:
        v, lap = responses
        idx = np.round(lap.times / v.dt).astype(int)
        info["max_abs_diff_alpha"] = float(np.max(np.abs(v.alpha[idx] - lap.alpha)))
        info["max_abs_diff_beta"] = float(np.max(np.abs(v.beta[idx] - lap.beta)))
    files.append(write_json(out / "response.json", info))
    if cfg.figures:
        files.append(plotting.response_figure(out / "response.png", responses))
    return files, info


def run_fdt(cfg, out):
    coupling = build_coupling(cfg)
    pairs = [(k, abs(k) + d) for k in cfg.k_values for d in cfg.omega_offsets]
    samples = parallel_map(lambda p: fdt_sample(coupling, *p), pairs)
    cols = (
        [s.k for s in samples],
        [s.omega for s in samples],
        [s.lhs for s in samples],
        [s.rhs for s in samples],
        [s.ratio for s in samples],
    )
    files = [write_table(out / "fdt.csv", ("k", "omega", "lhs", "rhs", "ratio"), cols)]
    ratios = np.array(cols[4])
    info = {
        "measured_constant": float(np.mean(ratios)),
        "relative_spread": float(np.ptp(ratios) / np.mean(ratios)),
        "expected_constant": FDT_CONSTANT,
        "four_pi_convention": FOUR_PI_FDT_CONSTANT,
        "convention": "lhs = f^2(w')/(2 w'), rhs = |Im gamma~| = pi f^2(w')/(2 w'), w' = sqrt(Omega^2 - k^2)",
    }
    if cfg.figures:
        files.append(plotting.fdt_figure(out / "fdt.png", cols[1], ratios, FDT_CONSTANT))
    return files, info


def _separations(cfg):
    return [(x, t) for t in cfg.dt_values for x in cfg.dx_values]


def run_commutator(cfg, out):
    coupling = build_coupling(cfg)
    kernel = MemoryKernel.from_coupling(coupling)
    seps = _separations(cfg)
    samples = parallel_map(lambda p: commutator_check(coupling, p[0], p[1], cfg.k_cut, kernel), seps)
    cols = ([s.dx for s in samples], [s.dt for s in samples], [s.lhs for s in samples], [s.rhs for s in samples])
    files = [write_table(out / "commutator.csv", ("dx", "dt", "lhs", "rhs"), cols)]
    info = {"max_scaled_error": float(max(s.scaled_error for s in samples)), "k_cut": cfg.k_cut}
    if cfg.figures:
        files.append(plotting.commutator_figure(out / "commutator.png", *cols))
    return files, info


def run_correlator(cfg, out):
    from .quantum import default_k_grid

    coupling = build_coupling(cfg)
    seps = _separations(cfg)
    res = steady_correlator_scan(coupling, cfg.m, seps, default_k_grid(cfg.k_max))
    vals = np.array([r.value for r in res])
    cols = ([r.dx for r in res], [r.dt for r in res], vals.real, vals.imag)
    files = [write_table(out / "correlator.csv", ("dx", "dt", "re", "im"), cols)]
    info = {
        "k_max": cfg.k_max,
        "k_nodes": len(res[0].k_grid),
        "omega_nodes": len(res[0].omega_grid),
        "omega_max": res[0].omega_grid.domain[1],
    }
    if cfg.figures:
        files.append(plotting.correlator_figure(out / "correlator.png", cols[0], cols[1], vals))
    return files, info


def lattice_config(cfg, coupling):
    return LatticeConfig.build(
        coupling,
        n_omega=cfg.n_omega,
        omega_max=cfg.reservoir_omega_max,
        nx=cfg.nx,
        dx=cfg.dx,
        dt=cfg.sim_dt,
        m=cfg.m,
        T=cfg.T,
    )


def run_simulate(cfg, out):
    coupling = build_coupling(cfg)
    lat = lattice_config(cfg, coupling)
    state = reservoir_sample(lat, cfg.seed, cfg.band) if cfg.noise else LatticeState.zeros(lat)
    seeded = mode_state(lat, cfg.k_mode)
    state.phi[:] = seeded.phi
    state.pi[:] = seeded.pi
    stride = max(1, int(round(cfg.record_dt / lat.dt)))
    res = simulate(lat, state, modes=(cfg.k_mode,), record_every=stride)
    files = [res.to_csv(out / "simulation.csv")]
    e = res.energy
    scale = abs(e[0, 0]) if e[0, 0] != 0.0 else 1.0
    info = {
        "lattice": lat.describe(),
        "seed": cfg.seed,
        "noise": cfg.noise,
        "k_mode": cfg.k_mode,
        "max_rel_energy_drift": float(np.max(np.abs(e[:, 0] - e[0, 0])) / scale),
        "max_rel_shadow_drift": float(np.max(np.abs(e[:, 4] - e[0, 4])) / scale),
    }
    files.append(write_json(out / "simulation.json", info))
    if cfg.figures:
        files.append(plotting.simulation_figure(out / "simulation.png", res.times, res.phi_k[:, 0], e))
    return files, info


RUNNERS = {
    "kernel": run_kernel,
    "invert": run_invert,
    "response": run_response,
    "fdt": run_fdt,
    "commutator": run_commutator,
    "correlator": run_correlator,
    "simulate": run_simulate,
}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def execute(cfg, out=None):
    """
    Run a validated configuration and write its outputs.

    Returns
    -------
    ExitReport
        code 0 on success; 1 on a computational error; 2 on a
        configuration or I/O problem.
    """
    out = Path(cfg.out if out is None else out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with OutputLock(out):
            files, info = RUNNERS[cfg.command](cfg, out)
            # the output location is not part of the computation, so it is not
            # recorded; reruns into another directory stay byte-identical
            (out / "config.txt").write_text(serialize(cfg, skip=("out",)), encoding="utf-8", newline="\n")
            files = [Path(p) for p in files] + [out / "config.txt"]
            manifest = {
                "command": cfg.command,
                "version": __version__,
                "seed": cfg.seed,
                "results": _clean(info),
                "files": [
                    {"name": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
                    for p in sorted(files, key=lambda p: p.name)
                ],
            }
            write_json(out / MANIFEST, manifest)
    except (ConfigError, OSError) as exc:
        return ExitReport(2, [], f"{cfg.command}: {exc}")
    except (ArithmeticError, ValueError) as exc:
        return ExitReport(1, [], f"{cfg.command} failed: {type(exc).__name__}: {exc}")
    return ExitReport(0, [p.name for p in files] + [MANIFEST], "ok")


def verify_manifest(directory):
    """Names of files whose hash no longer matches the manifest (empty if all do)."""
    import json

    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
    return [e["name"] for e in manifest["files"] if sha256_file(directory / e["name"]) != e["sha256"]]


def build_parser():
    parser = argparse.ArgumentParser(prog="dissipative-field", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} computation")
        p.add_argument("--config", type=Path, help="configuration file (key = value)")
        p.add_argument("--out", type=Path, help="output directory (overrides 'out')")
        p.add_argument("--seed", type=int, help="random seed (overrides 'seed')")
        p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, command=args.command)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            cfg = cfg.replace(seed=args.seed)
        if args.out is not None:
            cfg = cfg.replace(out=str(args.out))
        workers()
    except (ConfigError, OSError) as exc:
        where = f"{args.config}: " if args.config else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return 2
    log.info("running %s into %s", cfg.command, cfg.out)
    report = execute(cfg)
    if report.code:
        print(f"error: {report.message}", file=sys.stderr)
    else:
        for name in report.files:
            log.info("wrote %s", Path(cfg.out) / name)
    return report.code


if __name__ == "__main__":
    sys.exit(main())
