"""Report figures written next to the CSV/JSON output."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_time_series(series, path):
    """Norms, Lyapunov functional and mass drift against time."""
    t = np.asarray(series["t"])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5), constrained_layout=True)
    ax = axes[0, 0]
    ax.plot(t, series["n_linf"], label=r"$\|n\|_\infty$")
    ax.plot(t, series["n_l2"], label=r"$\|n\|_2$")
    ax.set_xlabel("t")
    ax.legend()

    ax = axes[0, 1]
    for key, label in (("dev_n_linf", r"$\|n-\bar n_0\|_\infty$"), ("lyapunov", "Y")):
        y = np.asarray(series[key])
        if np.any(y > 0):
            ax.semilogy(t, np.where(y > 0, y, np.nan), label=label)
    ax.set_xlabel("t")
    ax.legend()

    ax = axes[1, 0]
    mass = np.asarray(series["mass"])
    ax.plot(t, (mass - mass[0]) / mass[0])
    ax.set_xlabel("t")
    ax.set_ylabel("relative mass drift")

    ax = axes[1, 1]
    ax.plot(t, series["kinetic"], label="kinetic")
    ax.plot(t, series["c_min"], label=r"$\min c$")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_fields(state, path):
    """Final density, signal and (if present) speed."""
    grid = state.grid
    panels = [("n", state.n), ("c", state.c)]
    if not state.vel.is_zero():
        uc, vc = state.vel.cell_centered()
        panels.append(("|u|", np.hypot(uc, vc)))
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.6), constrained_layout=True)
    for ax, (name, data) in zip(np.atleast_1d(axes), panels):
        im = ax.imshow(data.T, origin="lower", extent=(0, grid.lx, 0, grid.ly), cmap="viridis")
        ax.set_title(f"{name}, t = {state.t:.4g}")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
