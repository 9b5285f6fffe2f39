"""PNG rendering for the CLI (``--plot``).  Data files never depend on this."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps reruns byte-identical
_PNG_META = {"Software": None}


def _lambert(points):
    """Equal-area projection of each hemisphere onto the unit disk."""
    z = np.abs(points[:, 2])
    rho = np.sqrt(np.clip(1.0 - z, 0.0, None))
    phi = np.arctan2(points[:, 1], points[:, 0])
    return rho * np.cos(phi), rho * np.sin(phi)


def plot_pole_figure(pf, path):
    """Upper and lower hemisphere of a pole figure, equal-area projection."""
    pts = pf.grid
    vals = np.asarray(pf.values)
    fig, axes = plt.subplots(1, 2, figsize=(8, 4), constrained_layout=True)
    levels = np.linspace(vals.min(), vals.max() + 1e-12, 16)
    for ax, upper in zip(axes, (True, False)):
        keep = pts[:, 2] >= 0 if upper else pts[:, 2] <= 0
        x, y = _lambert(pts[keep])
        cs = ax.tricontourf(x, y, vals[keep], levels=levels, cmap="viridis")
        ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, lw=0.8))
        ax.set_aspect("equal")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.axis("off")
        ax.set_title("z >= 0" if upper else "z <= 0")
    h = pf.h
    fig.suptitle(f"h = ({h[0]:.3g}, {h[1]:.3g}, {h[2]:.3g})")
    fig.colorbar(cs, ax=axes, shrink=0.8)
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_checks(checks, path):
    """log10(metric / tolerance) per check; bars below zero pass."""
    names = [c.name for c in checks]
    ratio = [np.log10(max(c.metric, 1e-300) / c.tolerance) for c in checks]
    colors = ["tab:green" if c.passed else "tab:red" for c in checks]
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(checks) + 1.2), constrained_layout=True)
    ax.barh(names, ratio, color=colors)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.invert_yaxis()
    ax.set_xlabel("log10(metric / tolerance)")
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_degree_energy(coeffs, path, truth=None):
    """Per-degree Frobenius norm of the recovered coefficients (and of the truth)."""
    degrees = np.arange(coeffs.L + 1)
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.semilogy(degrees, [max(np.linalg.norm(b), 1e-300) for b in coeffs.blocks], "o-", label="recovered")
    if truth is not None:
        t = [max(np.linalg.norm(truth.blocks[l]), 1e-300) if l <= truth.L else np.nan for l in degrees]
        ax.semilogy(degrees, t, "x--", label="truth (even part)")
    ax.set_xlabel("degree l")
    ax.set_ylabel("block norm")
    ax.legend()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
