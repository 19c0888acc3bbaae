"""PNG figures rendered from a report directory (Agg backend, no display)."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_orbits(rows: list[dict], path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    per = np.array([int(r["period"]) for r in rows])
    simple = np.array([r["minimal_period"] == r["period"] for r in rows])
    act = np.array([float(r["action"]) for r in rows])
    mean = np.array([float(r["mean"]) for r in rows])
    for mask, lab, mk in ((simple, "simple", "o"), (~simple, "iterated", "x")):
        ax1.scatter(per[mask], act[mask], marker=mk, label=lab)
        ax2.scatter(per[mask], mean[mask], marker=mk, label=lab)
    ax1.set(xlabel="period", ylabel="action", title="action spectrum")
    ax2.set(xlabel="period", ylabel="mean index", title="mean index")
    ax1.legend()
    return _save(fig, path)


def plot_orbit_points(rows: list[dict], path: Path) -> Path | None:
    if not rows or "z1" not in rows[0] or "z2" in rows[0]:
        return None                       # phase portrait only in two dimensions
    fig, ax = plt.subplots(figsize=(5, 5))
    per = np.array([int(r["period"]) for r in rows])
    z = np.array([[float(r["z0"]), float(r["z1"])] for r in rows])
    sc = ax.scatter(z[:, 0], z[:, 1], c=per, cmap="viridis", s=14)
    fig.colorbar(sc, ax=ax, label="period")
    ax.set(xlabel="p", ylabel="q", title="orbit initial points", aspect="equal")
    return _save(fig, path)


def plot_qtilde(rows: list[dict], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    eps = sorted({float(r["epsilon"]) for r in rows})
    names = list(dict.fromkeys(r["check"] for r in rows))
    width = 0.8 / max(1, len(eps))
    for i, e in enumerate(eps):
        vals = []
        for nm in names:
            m = [float(r["margin"]) for r in rows if r["check"] == nm and float(r["epsilon"]) == e]
            vals.append(m[0] if m else np.nan)
        ax.bar(np.arange(len(names)) + i * width, np.sign(vals) * np.log10(1 + np.abs(vals)),
               width, label=f"eps={e:g}")
    ax.axhline(0, color="k", lw=0.8)
    ax.set_xticks(np.arange(len(names)) + 0.4 - width / 2, names, rotation=45, ha="right")
    ax.set(ylabel="sign * log10(1 + |margin|)", title="taming checks (positive = satisfied)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_maxp(rows: list[dict], path: Path) -> Path:
    sol = [r for r in rows if r["kind"] == "solution"]
    fig, ax = plt.subplots(figsize=(6, 4))
    m = np.array([float(r["margin"]) for r in sol])
    tol = np.array([float(r["tol"]) for r in sol])
    ax.hist(m / np.maximum(tol, 1e-300), bins=30)
    ax.axvline(-1, color="r", ls="--", label="-tol")
    ax.set(xlabel="discrete margin / tol", ylabel="count",
           title=f"subharmonicity margins ({len(sol)} solutions)")
    ax.legend()
    return _save(fig, path)


def plot_windows(data: dict, path: Path) -> Path | None:
    if "index_windows" not in data:
        return None
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, pair in enumerate(data["index_windows"]["pairs"]):
        for key, col in (("window_i", "C0"), ("window_im", "C1")):
            w = pair[key]
            ax.plot([w["center"] - w["n"], w["center"] + w["n"]], [j, j], color=col, lw=4)
    ax.set(xlabel="degree", ylabel="pair (p_i, p_i+m)",
           title=f"index windows, m={data['index_windows']['m']}")
    return _save(fig, path)


def render_report(out: Path) -> list[Path]:
    """Render every figure whose input exists in ``out``; returns written paths."""
    out = Path(out)
    made = []
    if (out / "orbits.csv").exists():
        rows = _rows(out / "orbits.csv")
        if rows:
            made.append(plot_orbits(rows, out / "orbits.png"))
            made.append(plot_orbit_points(rows, out / "orbit_points.png"))
    if (out / "qtilde_report.csv").exists():
        made.append(plot_qtilde(_rows(out / "qtilde_report.csv"), out / "qtilde_report.png"))
    if (out / "maxp_report.csv").exists():
        made.append(plot_maxp(_rows(out / "maxp_report.csv"), out / "maxp_report.png"))
    if (out / "windows.json").exists():
        made.append(plot_windows(json.loads((out / "windows.json").read_text()),
                                 out / "windows.png"))
    return [p for p in made if p is not None]
