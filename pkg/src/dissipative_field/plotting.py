"""Report figures. Rendered off-screen to PNG files with no embedded metadata."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}


def _figure(width=5.0, rows=1):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(rows, 1, figsize=(width, width * GOLDEN * rows), squeeze=False)
    return fig, axes[:, 0]


def _save(fig, path):
    fig.tight_layout()
    # no Software/date chunks so reruns give identical bytes
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def kernel_figure(path, u, g):
    fig, (ax,) = _figure()
    ax.plot(u, g, color="#2b8cbe")
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel("u")
    ax.set_ylabel("g(u)")
    return _save(fig, path)


def coupling_figure(path, omega, f2, reference=None):
    fig, (ax,) = _figure()
    ax.plot(omega, f2, "o", ms=3, color="#08589e", label="from kernel")
    if reference is not None:
        ax.plot(omega, reference, color="0.5", lw=0.8, label="coupling")
        ax.legend(frameon=False)
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$f^2(\omega)$")
    return _save(fig, path)


def response_figure(path, responses):
    fig, (ax_a, ax_b) = _figure(rows=2)
    for r in responses:
        style = "-" if r.method == "volterra" else "--"
        ax_a.plot(r.times, r.alpha, style, label=r.method)
        ax_b.plot(r.times, r.beta, style, label=r.method)
    ax_a.set_ylabel(r"$\alpha(k,t)$")
    ax_b.set_ylabel(r"$\beta(k,t)$")
    ax_b.set_xlabel("t")
    ax_a.legend(frameon=False)
    return _save(fig, path)


def fdt_figure(path, omega, ratio, constant):
    fig, (ax,) = _figure()
    ax.plot(omega, ratio, "o", ms=3, color="#08589e")
    ax.axhline(constant, color="0.6", lw=0.8)
    ax.set_xlabel(r"$\Omega$")
    ax.set_ylabel("noise / |Im response|")
    return _save(fig, path)


def commutator_figure(path, dx, dt, lhs, rhs):
    fig, (ax,) = _figure()
    order = np.lexsort((dx, dt))
    idx = np.arange(len(order))
    ax.plot(idx, np.asarray(rhs)[order], "s", ms=4, mfc="none", label="kernel")
    ax.plot(idx, np.asarray(lhs)[order], ".", ms=4, label="mode integral")
    ax.set_xlabel("separation index (sorted by dt, dx)")
    ax.set_ylabel("commutator / i")
    ax.legend(frameon=False)
    return _save(fig, path)


def correlator_figure(path, dx, dt, values):
    fig, (ax,) = _figure()
    values = np.asarray(values)
    idx = np.arange(values.size)
    ax.plot(idx, values.real, "o", ms=3, label="Re")
    ax.plot(idx, values.imag, "x", ms=3, label="Im")
    ax.set_xlabel("separation index")
    ax.set_ylabel("two-point function")
    ax.legend(frameon=False)
    return _save(fig, path)


def simulation_figure(path, times, phi_k, energy):
    fig, (ax_a, ax_b) = _figure(rows=2)
    ax_a.plot(times, phi_k.real, label="Re")
    ax_a.plot(times, phi_k.imag, label="Im")
    ax_a.set_ylabel(r"$\phi_k(t)$")
    ax_a.legend(frameon=False)
    e0 = energy[0, 0] if energy[0, 0] != 0.0 else 1.0
    ax_b.plot(times, (energy[:, 0] - energy[0, 0]) / abs(e0), label="total")
    ax_b.plot(times, (energy[:, 4] - energy[0, 4]) / abs(e0), label="shadow")
    ax_b.set_ylabel("relative energy change")
    ax_b.set_xlabel("t")
    ax_b.legend(frameon=False)
    return _save(fig, path)
