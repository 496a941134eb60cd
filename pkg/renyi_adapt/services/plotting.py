"""Optional SVG figures for each experiment. The CSV files remain the data of record."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from collections import defaultdict  # noqa: E402
from collections.abc import Mapping, Sequence  # noqa: E402
from loguru import logger  # noqa: E402
from pathlib import Path  # noqa: E402

from renyi_adapt.models.results import DecayFit  # noqa: E402


Row = Mapping[str, object]


def _save(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.debug(f"Plot saved to {path}")
    return path


def plot_loss_curves(curves: Mapping[tuple[str, str], Sequence[tuple[int, float, float, int]]], path: Path) -> Path:
    """Loss gap per objective evaluation; ADAPT solid, VQE dotted."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for (loss, method), points in curves.items():
        xs = [p[0] for p in points]
        # gaps can touch zero at convergence; keep them on the log axis
        ys = [max(p[2], 1e-16) for p in points]
        ax.plot(xs, ys, linestyle="-" if method == "adapt" else ":", label=f"{loss} {method}")
    ax.set_yscale("log")
    ax.set_xlabel("Function evaluations")
    ax.set_ylabel("Loss - loss at target")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_size_scan(rows: Sequence[Row], path: Path) -> Path:
    """Worst-case infidelity against parameter count, one line per (loss, n)."""
    series: dict[tuple[str, int], list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        series[(str(row["loss"]), int(row["n"]))].append((int(row["params"]), float(row["worst_infidelity"])))
    fig, ax = plt.subplots(figsize=(8, 5))
    for (loss, n), points in series.items():
        ax.plot([p[0] for p in points], [max(p[1], 1e-16) for p in points], label=f"{loss} n={n}")
    ax.set_yscale("log")
    ax.set_xlabel("Parameters")
    ax.set_ylabel("Worst-case infidelity")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_grad_scan(rows: Sequence[Row], fits: Sequence[DecayFit], path: Path) -> Path:
    """Initial pool gradient per trial with fitted decay lines."""
    fig, ax = plt.subplots(figsize=(8, 5))
    by_loss: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        by_loss[str(row["loss"])].append((int(row["n"]), float(row["g_inf"])))
    for loss, points in by_loss.items():
        scatter = ax.scatter([p[0] for p in points], [p[1] for p in points], s=10, alpha=0.5, label=loss)
        fit = next((f for f in fits if f.loss_kind is not None and str(f.loss_kind) == loss), None)
        if fit is not None:
            ns = sorted({p[0] for p in points})
            ax.plot(ns, [fit.predict(n) for n in ns], color=scatter.get_facecolor()[0], linestyle="--")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("Initial pool ||g||_inf")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_fidelity_scan(rows: Sequence[Row], path: Path) -> Path:
    """Initial pool gradient against reference-target fidelity."""
    fig, ax = plt.subplots(figsize=(8, 5))
    by_loss: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for row in rows:
        by_loss[str(row["loss"])].append((float(row["fidelity"]), float(row["g_inf"])))
    for loss, points in by_loss.items():
        ax.scatter([p[0] for p in points], [p[1] for p in points], s=10, alpha=0.6, label=loss)
    ax.set_yscale("log")
    ax.set_xlabel("F(rho, sigma_0)")
    ax.set_ylabel("Initial pool ||g||_inf")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_completion(rows: Sequence[Row], path: Path) -> Path:
    """Pool gradient against completion fraction for converged runs."""
    fig, ax = plt.subplots(figsize=(8, 5))
    runs: dict[tuple[str, int], list[tuple[float, float]]] = defaultdict(list)
    for row in rows:
        if row.get("completion_fraction") is None:
            continue
        runs[(str(row["loss"]), int(row["trial"]))].append((float(row["completion_fraction"]), float(row["g_inf"])))
    colors: dict[str, str] = {}
    for (loss, _), points in runs.items():
        label = loss if loss not in colors else None
        color = colors.setdefault(loss, f"C{len(colors)}")
        ax.plot([p[0] for p in points], [p[1] for p in points], color=color, alpha=0.5, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("Completion fraction")
    ax.set_ylabel("Pool ||g||_inf")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)
