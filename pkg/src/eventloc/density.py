"""Space-time amplitude and probability-density evaluation.

The event amplitude is the oscillatory quadrature sum

    Psi_gamma(x) = (2 pi)^{-d/2} sum_k w_k K_gamma.(k) psi(k) exp(-i k_a x^a)

evaluated by direct tensor contraction over the product grids (one phase
matrix per axis), so momentum and event grids stay decoupled.  The density is
rho(x) = sum_gamma omega_gamma sum_rows |Psi_gamma(x)|^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .irreps import IrrepLabel, build_generators, boost_columns
from .kernels import PoincareKernel, TranslationKernel, certify_kernel
from .states import Grid, WaveFunction, norm_squared, spacetime_grid, uniform_axis

__all__ = [
    "DensityField",
    "amplitude_field",
    "density",
    "quasi_baricentric_density",
    "region_probability",
    "fourier_sum",
    "conjugate_grid",
]


@dataclass(frozen=True)
class DensityField:
    """Sampled event density rho(psi, x) with its quadrature grid."""

    xgrid: Grid
    rho: np.ndarray
    state_norm_squared: float
    amplitudes: Optional[dict] = field(default=None, repr=False)

    def total(self) -> float:
        return float(np.sum(self.xgrid.weights * self.rho))

    def capture_fraction(self) -> float:
        return self.total() / self.state_norm_squared if self.state_norm_squared > 0 else 0.0


def fourier_sum(g: np.ndarray, kgrid: Grid, xgrid: Grid) -> np.ndarray:
    """(2 pi)^{-d/2} sum_k w_k g(..., k) exp(-i k_a x^a) on a product x-grid.

    ``g`` has shape (..., kgrid.size); the result has shape (..., xgrid.size).
    The Minkowski phase factorizes per axis, so the sum is a sequence of d
    small matrix contractions.
    """
    d = kgrid.dimension
    if xgrid.dimension != d:
        raise ValueError("momentum and event grids must share the dimension")
    lead = g.shape[:-1]
    arr = g.reshape(lead + kgrid.shape)
    for axis_i in range(d):
        kax = kgrid.axes[axis_i]
        xax = xgrid.axes[axis_i]
        sign = -1.0 if axis_i == 0 else +1.0
        phase = np.exp(sign * 1j * np.outer(xax.nodes, kax.nodes)) * kax.weights[None, :]
        # contract the current momentum axis (always at position len(lead))
        arr = np.tensordot(arr, phase, axes=([len(lead)], [1]))
        # tensordot appends the x axis at the end; keep axis order x0..x_{i}
    out = arr.reshape(lead + (xgrid.size,))
    return out * (2.0 * np.pi) ** (-d / 2.0)


def conjugate_grid(kgrid: Grid, center=None) -> Grid:
    """Event grid commensurate with a uniform momentum grid.

    Per axis with n nodes of spacing h the event axis has n nodes of spacing
    2 pi / (n h) centered at ``center``.  On such a pair the discrete Fourier
    sum is exactly unitary (Parseval holds to machine precision), so captured
    densities integrate to the state norm without quadrature bias.
    """
    if any(ax.kind != "uniform" for ax in kgrid.axes):
        raise ValueError("conjugate_grid requires uniform momentum axes")
    d = kgrid.dimension
    if center is None:
        center = np.zeros(d)
    center = np.broadcast_to(np.atleast_1d(np.asarray(center, float)), (d,))
    axes = []
    for i, ax in enumerate(kgrid.axes):
        h = ax.spacing
        dx = 2.0 * np.pi / (ax.n * h)
        lo = center[i] - dx * (ax.n // 2)
        axes.append(uniform_axis(lo, lo + ax.n * dx, ax.n))
    return spacetime_grid(axes)


def _translation_integrand(psi: WaveFunction, kernel: TranslationKernel) -> np.ndarray:
    if kernel.n_sigma != len(psi.channels):
        raise ValueError(
            f"kernel expects {kernel.n_sigma} channels, state has {len(psi.channels)}"
        )
    kv = kernel.evaluate(psi.grid.nodes)  # (g, s, N)
    return np.einsum("gsn,sn->gn", kv, psi.amplitudes)


def _sector_rows(psi: WaveFunction, kernel: PoincareKernel, sector, column_tol: float = 1e-6):
    """Integrand rows D(a_k) F psi for one sector; returns (rows, row_labels)."""
    mu = psi.grid.mu()
    nodes = psi.grid.nodes
    pieces = None
    labels = None
    for j in sorted(sector.profiles):
        chans = [(i, ch) for i, ch in enumerate(psi.channels) if ch.j == j]
        if not chans:
            continue
        f = sector.f(j, mu)  # (n_sigma_kernel, N)
        # collapse sigma: sum_sigma F_sigma(mu) psi_{sigma j m}(k), grouped by m
        mvals = sorted({ch.m for _, ch in chans})
        summed = np.zeros((len(mvals), psi.grid.size), dtype=complex)
        for i, ch in chans:
            summed[mvals.index(ch.m)] += f[ch.sigma] * psi.amplitudes[i]
        label = IrrepLabel(sector.M, sector.c)
        if label.trivial and j == 0:
            rows = summed  # D = 1 identically
            row_l = [(0, 0)]
        else:
            irrep, cols = _certified_columns(label, nodes, j, column_tol)
            # rows_{ln}(k) = sum_m D_{ln,(j,m)}(a_k) summed_m(k)
            rows = np.einsum("krm,mk->rk", cols, summed)
            row_l = list(zip(irrep.basis_l, irrep.basis_n))
        if pieces is None:
            pieces, labels = rows, row_l
        else:
            # different j feed disjoint row sets only when truncations match;
            # pad by stacking (rows from different j accumulate independently)
            pieces = np.vstack([pieces, rows])
            labels = labels + row_l
    if pieces is None:
        return np.zeros((0, psi.grid.size), dtype=complex), []
    return pieces, labels


_IRREP_CACHE: dict = {}


def _certified_columns(label: IrrepLabel, nodes: np.ndarray, j: int, column_tol: float):
    """Boost matrix-element columns with adaptive truncation.

    Grows j_max until the worst column-norm deficit (probability leaked past
    the truncation) is below ``column_tol``.
    """
    j_max = max(j + 4, 6)
    while True:
        key = (label.M, complex(label.c), j_max)
        irrep = _IRREP_CACHE.get(key)
        if irrep is None:
            irrep = build_generators(label, j_max)
            _IRREP_CACHE[key] = irrep
        cols = boost_columns(irrep, nodes, j)
        deficit = float(np.max(np.abs(1.0 - np.sum(np.abs(cols) ** 2, axis=1))))
        if deficit <= column_tol or j_max >= 40:
            if deficit > column_tol:
                raise RuntimeError(
                    f"boost-column truncation deficit {deficit:.2e} above {column_tol:.1e} "
                    f"even at j_max = {j_max}; momenta too relativistic for this kernel"
                )
            return irrep, cols
        j_max += 4


def amplitude_field(psi: WaveFunction, kernel, xgrid: Grid, column_tol: float = 1e-6) -> dict:
    """Per-sector complex amplitude fields Psi_gamma(x) on the event grid.

    Returns {gamma_key: array (n_rows, n_x)}; gamma_key is the row index for
    translation kernels and (nu, M, c) for Poincare kernels.
    """
    if isinstance(kernel, TranslationKernel):
        g = _translation_integrand(psi, kernel)
        psi_x = fourier_sum(g, psi.grid, xgrid)
        return {gamma: psi_x[gamma : gamma + 1] for gamma in range(kernel.n_gamma)}
    if isinstance(kernel, PoincareKernel):
        out = {}
        for sector in kernel.sectors:
            rows, _ = _sector_rows(psi, kernel, sector, column_tol)
            if rows.shape[0] == 0:
                continue
            out[(sector.nu, sector.M, complex(sector.c))] = fourier_sum(rows, psi.grid, xgrid)
        return out
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


def density(
    psi: WaveFunction,
    kernel,
    xgrid: Grid,
    keep_amplitudes: bool = False,
    column_tol: float = 1e-6,
    certify: bool = True,
) -> DensityField:
    """Event probability density rho(psi, x) for a certified bounded kernel."""
    if certify:
        cert = certify_kernel(kernel, grid=psi.grid, spins=psi.spins() or None)
        cert.require_contraction()
    amps = amplitude_field(psi, kernel, xgrid, column_tol=column_tol)
    rho = np.zeros(xgrid.size)
    if isinstance(kernel, PoincareKernel):
        omegas = {(s.nu, s.M, complex(s.c)): s.omega for s in kernel.sectors}
    else:
        omegas = {key: 1.0 for key in amps}
    for key, a in amps.items():
        rho += omegas[key] * np.sum(np.abs(a) ** 2, axis=0)
    return DensityField(
        xgrid=xgrid,
        rho=rho,
        state_norm_squared=norm_squared(psi),
        amplitudes=amps if keep_amplitudes else None,
    )


def quasi_baricentric_density(
    psi: WaveFunction, kernel: PoincareKernel, xgrid: Grid, column_tol: float = 1e-6
) -> DensityField:
    """Density via the per-spin decomposition valid for quasi-baricentric kernels.

    Each sector couples to exactly one spin (M = j), so the density is the sum
    of the single-spin densities with no cross-spin interference.
    """
    if not kernel.quasi_baricentric:
        raise ValueError(f"kernel {kernel.name!r} is not quasi-baricentric")
    rho = np.zeros(xgrid.size)
    for j in psi.spins() or (None,):
        idx = [i for i, ch in enumerate(psi.channels) if ch.j == j]
        if not idx:
            continue
        sub_amps = np.zeros_like(psi.amplitudes)
        sub_amps[idx] = psi.amplitudes[idx]
        sub = psi.with_amplitudes(sub_amps)
        part = density(sub, kernel, xgrid, column_tol=column_tol, certify=False)
        rho += part.rho
    return DensityField(xgrid=xgrid, rho=rho, state_norm_squared=norm_squared(psi))


def region_probability(fld: DensityField, boxes) -> float:
    """Integral of rho over a list of axis-aligned boxes (lo, hi) per box.

    Boxes must lie inside the event-grid hull; quadrature nodes are counted
    with their full weight when their coordinates fall inside a box.
    """
    boxes = list(boxes)
    nodes = fld.xgrid.nodes
    w = fld.xgrid.weights
    total = 0.0
    for lo, hi in boxes:
        lo = np.broadcast_to(np.atleast_1d(np.asarray(lo, float)), (fld.xgrid.dimension,))
        hi = np.broadcast_to(np.atleast_1d(np.asarray(hi, float)), (fld.xgrid.dimension,))
        if not fld.xgrid.contains_box(lo, hi):
            raise ValueError(f"region box [{lo}, {hi}] is outside the event grid hull")
        mask = np.all((nodes >= lo) & (nodes < hi), axis=1)
        total += float(np.sum(w[mask] * fld.rho[mask]))
    return total
