"""Vector-graphics (SVG) figures of a finished run."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .kinetic import aggressiveness
from .params import ModelParams

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# stable ids and no timestamp so identical input gives identical files
_RC = {"svg.hashsalt": "nstraffic", "svg.fonttype": "path"}
_META = {"Date": None, "Creator": None}


def _edges(centres):
    centres = np.asarray(centres, dtype=float)
    if centres.size == 1:
        return np.array([centres[0] - 0.5, centres[0] + 0.5])
    mid = 0.5 * (centres[1:] + centres[:-1])
    return np.concatenate(([2 * centres[0] - mid[0]], mid, [2 * centres[-1] - mid[-1]]))


def _spacetime(snapshots, attr, label, path):
    t = np.array([s.t for s in snapshots])
    x = snapshots[0].x
    z = np.vstack([getattr(s, attr) for s in snapshots])
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        mesh = ax.pcolormesh(_edges(x) / 1000.0, _edges(t), z, shading="flat", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=label)
        ax.set_xlabel("position x [km]")
        ax.set_ylabel("time t [s]")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_META)
        plt.close(fig)


def plot_aggressiveness(p: ModelParams, path, n: int = 401):
    rho = np.linspace(0.0, p.rho_0, n)
    w = aggressiveness(rho, p)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(rho / p.rho_0, w, color="k")
        ax.axvline(p.rho_c / p.rho_0, color="0.6", lw=0.8, ls="--")
        ax.set_xlabel(r"relative density $\rho/\rho_0$ [-]")
        ax.set_ylabel("aggressiveness w [-]")
        ax.set_xlim(0, 1)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_META)
        plt.close(fig)
    return rho, w


def emit_plots(snapshots, out_dir, params: ModelParams | None = None) -> list[Path]:
    """Write density and flow space-time maps plus the w(rho) curve.

    Raises:
        ValueError: if ``snapshots`` is empty (nothing is written).
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("no snapshots to plot")
    params = params or ModelParams()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "density_spacetime.svg", out / "flow_spacetime.svg", out / "aggressiveness.svg"]
    _spacetime(snapshots, "rho", r"density $\rho$ [veh/m]", paths[0])
    _spacetime(snapshots, "q", "flow q [veh/s]", paths[1])
    plot_aggressiveness(params, paths[2])
    return paths
