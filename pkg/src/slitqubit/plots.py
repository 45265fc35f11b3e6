"""Report figures for the command-line workflows.

Every function renders to a file through the Agg backend so the package
works headless; nothing here opens a window.  Figures are deterministic
for fixed inputs (no timestamps in the output).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .measurement import _arm_to_text


def _save(fig, path):
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_counts(record, path):
    """Bar chart of counts per setting, log-scaled when the spread allows."""
    ids = [s.id for s in record.settings]
    counts = np.asarray(record.counts, dtype=float)
    labels = [f"{s.id}\n{_arm_to_text(s.arm_s)},{_arm_to_text(s.arm_i)}" for s in record.settings]
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.bar(range(len(ids)), counts, color="#4878d0")
    ax.set_xticks(range(len(ids)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_xlabel("setting (signal arm, idler arm)")
    ax.set_ylabel("counts")
    if counts.max() > 0 and counts[counts > 0].min() > 0 and counts.max() / max(counts[counts > 0].min(), 1.0) > 50:
        ax.set_yscale("log")
    ax.set_title("coincidence counts by measurement setting")
    fig.tight_layout()
    _save(fig, path)


def plot_density_matrix(rho, path, title="reconstructed density matrix"):
    """Side-by-side real and imaginary heat maps in the slit basis."""
    rho = np.asarray(rho, dtype=complex)
    labels = ["++", "+-", "-+", "--"]
    limit = max(float(np.abs(rho.real).max()), float(np.abs(rho.imag).max()), 1e-12)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, part, name in ((axes[0], rho.real, "Re"), (axes[1], rho.imag, "Im")):
        image = ax.imshow(part, vmin=-limit, vmax=limit, cmap="RdBu_r")
        ax.set_xticks(range(4))
        ax.set_yticks(range(4))
        ax.set_xticklabels(labels)
        ax.set_yticklabels(labels)
        ax.set_title(f"{name} rho")
        for j in range(4):
            for k in range(4):
                ax.text(k, j, f"{part[j, k]:+.3f}", ha="center", va="center", fontsize=7)
        fig.colorbar(image, ax=ax, fraction=0.046)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def plot_oracle(rows, path):
    """Closed-form vs quadrature moduli and their relative error per grid point."""
    rows = list(rows)
    index = np.arange(len(rows))
    closed = np.array([abs(complex(r["re_closed"], r["im_closed"])) for r in rows])
    quad = np.array([abs(complex(r["re_quad"], r["im_quad"])) for r in rows])
    rel = np.array([r["rel_err"] for r in rows])
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    top.plot(index, quad, "o-", label="quadrature |I|", color="#4878d0")
    top.plot(index, closed, "s--", label="closed form |I|", color="#d65f5f")
    top.set_ylabel("modulus")
    top.legend()
    bottom.bar(index, rel * 100.0, color="#6aa56a")
    bottom.axhline(5.0, color="k", linestyle=":", linewidth=1)
    bottom.set_ylabel("relative error (%)")
    bottom.set_xlabel("grid point (x, q, sign)")
    labels = [f"{r['x_mm']:g}\n{r['q_per_mm']:g}\n{r['sign']}" for r in rows]
    bottom.set_xticks(index)
    bottom.set_xticklabels(labels, fontsize=6)
    fig.suptitle("stationary-phase closed form vs adaptive quadrature")
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(points, path, variable):
    """Mean fidelity with min-max band per method across the sweep variable."""
    methods = sorted({key.rsplit("_", 1)[0] for p in points for key in p if key.endswith("_mean")})
    values = [p[variable] for p in points]
    fig, ax = plt.subplots(figsize=(8, 5))
    colors = {"exact": "#4878d0", "paper": "#d65f5f", "mle": "#6aa56a"}
    for method in methods:
        mean = [p[f"{method}_mean"] for p in points]
        low = [p[f"{method}_min"] for p in points]
        high = [p[f"{method}_max"] for p in points]
        color = colors.get(method)
        ax.plot(values, mean, "o-", label=method, color=color)
        ax.fill_between(values, low, high, alpha=0.2, color=color)
    if len(values) > 1 and min(values) > 0 and max(values) / min(values) > 50:
        ax.set_xscale("log")
    ax.set_xlabel(variable)
    ax.set_ylabel("fidelity to true state")
    ax.legend()
    ax.set_title("reconstruction fidelity across the sweep")
    fig.tight_layout()
    _save(fig, path)
