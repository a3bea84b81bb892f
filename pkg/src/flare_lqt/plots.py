"""SVG figures for a run bundle; byte-identical for identical inputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pipeline import RegionResult  # noqa: E402
from .simulation import SimResult  # noqa: E402

MAX_POINTS = 4001

_RC = {"svg.hashsalt": "flare-lqt", "svg.fonttype": "none"}


def _decimate(n: int) -> slice:
    return slice(None, None, max(1, -(-n // MAX_POINTS)))


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _line(path, t, y, ylabel, title, ref=None):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        if ref is not None:
            ax.plot(t, ref, color="tab:blue", lw=1.2, label="desired")
        ax.plot(t, y, color="tab:red", lw=1.0, label="simulated")
        if ref is not None:
            ax.legend(loc="best")
        ax.set_xlabel("time [s]")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        _save(fig, path)


def plot_simulation(result: SimResult, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    s = _decimate(len(result.times))
    t = result.times[s]
    x, r, e = result.states[s], result.references[s], result.errors[s]
    u = np.degrees(np.asarray(result.controls).reshape(len(result.times), -1)[s, 0])
    specs = [
        ("altitude.svg", x[:, 0], "h [ft]", "altitude", r[:, 0]),
        ("altitude_rate.svg", x[:, 1], "h_dot [ft/s]", "altitude rate", r[:, 1]),
        ("pitch.svg", np.degrees(x[:, 2]), "theta [deg]", "pitch angle", None),
        ("elevator.svg", u, "delta_e [deg]", "elevator command", None),
        ("error_h.svg", e[:, 0], "e_h [ft]", "altitude tracking error", None),
        ("error_hdot.svg", e[:, 1], "e_hdot [ft/s]", "altitude-rate tracking error", None),
        ("error_theta.svg", np.degrees(e[:, 2]), "e_theta [deg]", "pitch tracking error", None),
        ("error_thetadot.svg", np.degrees(e[:, 3]), "e_thetadot [deg/s]", "pitch-rate tracking error", None),
    ]
    paths = []
    for name, y, ylabel, title, ref in specs:
        _line(outdir / name, t, y, ylabel, title, ref)
        paths.append(outdir / name)
    return paths


def plot_region(region: RegionResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        cmap = matplotlib.colors.ListedColormap(["#d9534f", "#5cb85c"])
        ax.pcolormesh(region.dtheta_grid, region.dh_grid, region.feasible.astype(float),
                      cmap=cmap, vmin=0, vmax=1, shading="nearest")
        ax.set_xlabel("initial pitch offset [deg]")
        ax.set_ylabel("initial altitude offset [ft]")
        ax.set_title("feasible start conditions (green)")
        fig.tight_layout()
        _save(fig, path)
    return path
