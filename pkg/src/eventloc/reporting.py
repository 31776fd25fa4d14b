"""Deterministic report serialization: canonical JSON, CSV tables, figures.

The hashed report section is serialized canonically (sorted keys, fixed float
formatting, no wall-clock content), so identical inputs produce byte-identical
hashes across runs.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "canonical_json",
    "section_hash",
    "write_report",
    "write_csv",
    "render_density_figure",
    "render_definiteness_figure",
]


def _canonical(obj):
    """Recursively convert to JSON-safe deterministic structures."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def canonical_json(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def section_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def write_report(path, results: dict, meta: dict = None) -> dict:
    """Write {meta, results, hash} JSON; only ``results`` feeds the hash."""
    report = {
        "meta": _canonical(meta or {}),
        "results": _canonical(results),
        "hash": section_hash(results),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return report


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _agg():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_density_figure(path, fld) -> None:
    """Marginal density along each event axis, rendered to an image file."""
    plt = _agg()
    d = fld.xgrid.dimension
    rho = fld.rho.reshape(fld.xgrid.shape)
    fig, axes = plt.subplots(1, d, figsize=(4 * d, 3.2), squeeze=False)
    for i in range(d):
        ax = axes[0][i]
        other = tuple(j for j in range(d) if j != i)
        marg = rho.sum(axis=other) if other else rho
        wfac = np.prod([fld.xgrid.axes[j].spacing for j in other]) if other else 1.0
        ax.plot(fld.xgrid.axes[i].nodes, marg * wfac)
        ax.set_xlabel(f"$x^{i}$")
        ax.set_ylabel("marginal density" if i == 0 else "")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_definiteness_figure(path, report) -> None:
    """Capture probability and width scaling against the scale schedule."""
    plt = _agg()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax1.plot(report.lambdas, report.probabilities, "o-")
    ax1.set_xscale("log", base=2)
    ax1.set_xlabel(r"$\lambda$")
    ax1.set_ylabel(r"$P_\lambda(I)$")
    ax1.grid(alpha=0.3)
    for i in range(report.widths.shape[1]):
        ax2.loglog(report.lambdas, report.widths[:, i], "s-", label=f"axis {i}")
    ax2.set_xlabel(r"$\lambda$")
    ax2.set_ylabel("density width")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3, which="both")
    fig.suptitle(f"width exponent p = {report.width_exponent:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
