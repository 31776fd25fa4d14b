"""Momentum-space grids, wave functions and group actions.

Grids are tensor products of one-dimensional quadrature axes (uniform
rectangle rule or Gauss-Legendre panels).  Momentum grids live strictly
inside the open future cone; wave functions are complex amplitude arrays
indexed by (channel, node) and are treated as zero off-grid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .minkowski import lorentz_of_sl2c, su2_wigner_matrix, wigner_rotation

__all__ = [
    "Axis",
    "Grid",
    "Channel",
    "WaveFunction",
    "ScaledFamily",
    "ActionResult",
    "uniform_axis",
    "gauss_axis",
    "momentum_grid",
    "spacetime_grid",
    "norm_squared",
    "apply_translation",
    "apply_lorentz",
    "apply_dilatation",
    "gaussian_packet",
    "bump_packet",
    "bump_family",
    "normalized",
    "realize_family",
    "save_state",
    "load_state",
]

_CONE_GUARD = 1e-5  # relative distance from the light cone required of grid nodes


@dataclass(frozen=True)
class Axis:
    kind: str
    lo: float
    hi: float
    n: int

    @property
    def nodes(self) -> np.ndarray:
        if self.kind == "uniform":
            h = (self.hi - self.lo) / self.n
            return self.lo + h * np.arange(self.n)
        if self.kind == "gauss":
            x, _ = np.polynomial.legendre.leggauss(self.n)
            return 0.5 * (self.hi - self.lo) * (x + 1.0) + self.lo
        raise ValueError(f"unknown axis kind {self.kind!r}")

    @property
    def weights(self) -> np.ndarray:
        if self.kind == "uniform":
            h = (self.hi - self.lo) / self.n
            return np.full(self.n, h)
        x, w = np.polynomial.legendre.leggauss(self.n)
        return 0.5 * (self.hi - self.lo) * w

    @property
    def spacing(self) -> float:
        if self.kind != "uniform":
            raise ValueError("spacing is only defined for uniform axes")
        return (self.hi - self.lo) / self.n


def uniform_axis(lo: float, hi: float, n: int) -> Axis:
    return Axis("uniform", float(lo), float(hi), int(n))


def gauss_axis(lo: float, hi: float, n: int) -> Axis:
    return Axis("gauss", float(lo), float(hi), int(n))


@dataclass(frozen=True)
class Grid:
    """Tensor-product quadrature grid in d-dimensional (momentum or event) space."""

    dimension: int
    axes: tuple
    future_cone: bool

    def __post_init__(self):
        if self.dimension not in (1, 2, 4):
            raise ValueError("dimension must be 1, 2 or 4")
        if len(self.axes) != self.dimension:
            raise ValueError("need one axis per dimension")

    @property
    def shape(self) -> tuple:
        return tuple(ax.n for ax in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def nodes(self) -> np.ndarray:
        """(N, d) array of grid nodes in C order."""
        mesh = np.meshgrid(*[ax.nodes for ax in self.axes], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(1)
        for ax in self.axes:
            w = np.multiply.outer(w, ax.weights)
        return w.ravel()

    def mu(self) -> np.ndarray:
        """Invariant mass per node (d=1: mu = k itself)."""
        k = self.nodes
        if self.dimension == 1:
            return k[:, 0].copy()
        m2 = k[:, 0] ** 2 - np.sum(k[:, 1:] ** 2, axis=1)
        return np.sqrt(m2)

    def contains_box(self, lo, hi) -> bool:
        lo = np.atleast_1d(lo)
        hi = np.atleast_1d(hi)
        return all(
            ax.lo - 1e-12 <= float(l) and float(h) <= ax.hi + 1e-12
            for ax, l, h in zip(self.axes, lo, hi)
        )

    def spec(self) -> dict:
        return {
            "dimension": self.dimension,
            "future_cone": self.future_cone,
            "axes": [{"kind": a.kind, "lo": a.lo, "hi": a.hi, "n": a.n} for a in self.axes],
        }

    @staticmethod
    def from_spec(spec: dict) -> "Grid":
        axes = tuple(Axis(a["kind"], a["lo"], a["hi"], a["n"]) for a in spec["axes"])
        if spec.get("future_cone"):
            return momentum_grid(axes)
        return Grid(spec["dimension"], axes, False)


def momentum_grid(axes: Sequence[Axis]) -> Grid:
    """Grid strictly inside the open future cone; raises if any node is outside."""
    g = Grid(len(axes), tuple(axes), True)
    k = g.nodes
    if np.any(k[:, 0] <= 0):
        raise ValueError("momentum grid nodes must have k^0 > 0")
    if g.dimension > 1:
        spatial = np.linalg.norm(k[:, 1:], axis=1)
        if np.any(k[:, 0] - spatial <= _CONE_GUARD * k[:, 0]):
            raise ValueError("momentum grid nodes must lie strictly inside the future cone")
    return g


def spacetime_grid(axes: Sequence[Axis]) -> Grid:
    return Grid(len(axes), tuple(axes), False)


class Channel(NamedTuple):
    sigma: int
    j: Optional[int] = None
    m: Optional[int] = None


@dataclass(frozen=True)
class WaveFunction:
    """Momentum-space state psi_{sigma j m}(k) sampled on a grid.

    For d < 4 the (j, m) entries of the channels are None and sigma is the
    only index.  Amplitudes implicitly vanish off-grid.
    """

    grid: Grid
    channels: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (len(self.channels), self.grid.size):
            raise ValueError("amplitude array must have shape (n_channels, n_nodes)")

    def channel_index(self, ch: Channel) -> int:
        return self.channels.index(ch)

    def with_amplitudes(self, amps: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, self.channels, amps)

    def spins(self) -> tuple:
        return tuple(sorted({ch.j for ch in self.channels if ch.j is not None}))


@dataclass(frozen=True)
class ActionResult:
    """Group-action output with the measured quadrature-norm drift."""

    state: WaveFunction
    norm_drift: float


def norm_squared(psi: WaveFunction) -> float:
    w = psi.grid.weights
    return float(np.sum(w * np.sum(np.abs(psi.amplitudes) ** 2, axis=0)))


def normalized(psi: WaveFunction) -> WaveFunction:
    n = norm_squared(psi)
    if n <= 0:
        raise ValueError("cannot normalize a null state")
    return psi.with_amplitudes(psi.amplitudes / np.sqrt(n))


def apply_translation(psi: WaveFunction, x) -> WaveFunction:
    """Unitary translation: multiplication by exp(i k_alpha x^alpha)."""
    x = np.asarray(x, dtype=float)
    k = psi.grid.nodes
    if psi.grid.dimension == 1:
        phase = np.exp(1j * k[:, 0] * x[0])
    else:
        kdotx = k[:, 0] * x[0] - k[:, 1:] @ x[1:]
        phase = np.exp(1j * kdotx)
    return psi.with_amplitudes(psi.amplitudes * phase[None, :])


def _interpolate(psi: WaveFunction, points: np.ndarray) -> np.ndarray:
    """Resample all channels at arbitrary points; zero outside the grid hull."""
    g = psi.grid
    out = np.zeros((len(psi.channels), points.shape[0]), dtype=complex)
    if g.dimension == 1:
        xs = g.axes[0].nodes
        for i, amp in enumerate(psi.amplitudes):
            spl = CubicSpline(xs, amp, extrapolate=False)
            vals = spl(points[:, 0])
            out[i] = np.nan_to_num(vals)
        return out
    axes_nodes = [ax.nodes for ax in g.axes]
    method = "cubic" if all(ax.n >= 4 for ax in g.axes) else "linear"
    for i, amp in enumerate(psi.amplitudes):
        f = RegularGridInterpolator(
            axes_nodes, amp.reshape(g.shape), method=method, bounds_error=False, fill_value=0.0
        )
        out[i] = f(points)
    return out


def _support_in_hull(psi: WaveFunction, mapped: np.ndarray, eps: float = 1e-6) -> bool:
    """Check that the numerically supported nodes stay inside the grid hull."""
    g = psi.grid
    mag = np.sum(np.abs(psi.amplitudes) ** 2, axis=0)
    sup = mag > eps * np.max(mag)
    pts = mapped[sup]
    for axis_i, ax in enumerate(g.axes):
        lo, hi = ax.nodes[0], ax.nodes[-1]
        if np.any(pts[:, axis_i] < lo - 1e-12) or np.any(pts[:, axis_i] > hi + 1e-12):
            return False
    return True


def apply_lorentz(psi: WaveFunction, a) -> ActionResult:
    """Poincare Lorentz action: psi'(k) = R^j(u) psi(Lambda(a^{-1}) k).

    Amplitudes are resampled by interpolation; the norm drift is reported and
    never silently accepted.
    """
    if psi.grid.dimension != 4:
        raise ValueError("Lorentz action requires d = 4")
    a = np.asarray(a, dtype=complex)
    lam_inv = lorentz_of_sl2c(np.linalg.inv(a))
    k = psi.grid.nodes
    kprime = k @ lam_inv.T
    # forward image of the support must stay in the hull
    lam = lorentz_of_sl2c(a)
    if not _support_in_hull(psi, k @ lam.T):
        raise ValueError("state support escapes the grid hull under the Lorentz map")
    resampled = _interpolate(psi, kprime)

    out = np.zeros_like(resampled)
    groups: dict = {}
    for i, ch in enumerate(psi.channels):
        groups.setdefault((ch.sigma, ch.j), []).append(i)
    for (sigma, j), idxs in groups.items():
        idxs = sorted(idxs, key=lambda i: psi.channels[i].m)
        if j == 0 or j is None:
            out[idxs[0]] = resampled[idxs[0]]
            continue
        block = resampled[idxs]  # (2j+1, N), m ascending
        mixed = np.empty_like(block)
        for node in range(k.shape[0]):
            u = wigner_rotation(a, k[node])
            mixed[:, node] = su2_wigner_matrix(j, u) @ block[:, node]
        for row, i in enumerate(idxs):
            out[i] = mixed[row]
    before = norm_squared(psi)
    result = psi.with_amplitudes(out)
    after = norm_squared(result)
    drift = abs(after - before) / before if before > 0 else 0.0
    return ActionResult(result, drift)


def apply_dilatation(psi: WaveFunction, lam: float) -> ActionResult:
    """Dilatation psi'(k) = lambda^{d/2} psi(lambda k), unitary up to resampling."""
    if lam <= 0:
        raise ValueError("dilatation parameter must be positive")
    d = psi.grid.dimension
    k = psi.grid.nodes
    scaled = lam * k
    if not _support_in_hull(psi, k / lam):
        raise ValueError("state support escapes the grid hull under the dilatation")
    resampled = _interpolate(psi, scaled)
    out = lam ** (d / 2.0) * resampled
    before = norm_squared(psi)
    result = psi.with_amplitudes(out)
    after = norm_squared(result)
    drift = abs(after - before) / before if before > 0 else 0.0
    return ActionResult(result, drift)


def _default_channels(d: int, channel_spec) -> tuple:
    if channel_spec is None:
        return (Channel(0, 0, 0),) if d == 4 else (Channel(0),)
    return tuple(channel_spec)


def gaussian_packet(
    grid: Grid,
    center,
    width,
    x_shift=None,
    channels=None,
    coefficients=None,
) -> WaveFunction:
    """Normalized Gaussian packet exp(-|k - center|^2 / (4 width^2)).

    ``x_shift`` adds the translation phase exp(i k_alpha x^alpha), moving the
    event density to x_shift.  ``coefficients`` distributes the packet over
    channels (default: all weight on the first channel).
    """
    d = grid.dimension
    center = np.broadcast_to(np.atleast_1d(center), (d,))
    width = np.broadcast_to(np.atleast_1d(width), (d,))
    k = grid.nodes
    env = np.exp(-np.sum((k - center) ** 2 / (4.0 * width**2), axis=1))
    chans = _default_channels(d, channels)
    coeff = np.zeros(len(chans), dtype=complex)
    if coefficients is None:
        coeff[0] = 1.0
    else:
        coeff[:] = coefficients
        coeff /= np.linalg.norm(coeff)
    amps = coeff[:, None] * env[None, :]
    psi = normalized(WaveFunction(grid, chans, amps))
    if x_shift is not None:
        psi = apply_translation(psi, x_shift)
    return psi


def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def bump_packet(grid: Grid, center, halfwidth, x_shift=None, channels=None, coefficients=None) -> WaveFunction:
    """Normalized smooth packet with compact support in a box around center."""
    d = grid.dimension
    center = np.broadcast_to(np.atleast_1d(center), (d,))
    halfwidth = np.broadcast_to(np.atleast_1d(halfwidth), (d,))
    k = grid.nodes
    env = np.ones(grid.size)
    for axis_i in range(d):
        env *= _bump((k[:, axis_i] - center[axis_i]) / halfwidth[axis_i])
    chans = _default_channels(d, channels)
    coeff = np.zeros(len(chans), dtype=complex)
    if coefficients is None:
        coeff[0] = 1.0
    else:
        coeff[:] = coefficients
        coeff /= np.linalg.norm(coeff)
    psi = normalized(WaveFunction(grid, chans, coeff[:, None] * env[None, :]))
    if x_shift is not None:
        psi = apply_translation(psi, x_shift)
    return psi


@dataclass(frozen=True)
class ScaledFamily:
    """Scaled state family psi^(lambda)(k) = lambda^{-d/2} c(k) phi(k/lambda).

    The envelope phi is compactly supported with support box strictly inside
    the future cone and is normalized so that its L2 norm is 1.
    """

    dimension: int
    envelope: Callable[[np.ndarray], np.ndarray]
    support_lo: np.ndarray
    support_hi: np.ndarray
    coefficients: Optional[Callable[[np.ndarray], np.ndarray]] = None
    n_channels: int = 1
    spin: Optional[int] = None
    magnetic: Optional[int] = None

    def channel_tuple(self) -> tuple:
        if self.dimension == 4:
            j = self.spin or 0
            m = self.magnetic if self.magnetic is not None else 0
            return tuple(Channel(s, j, m) for s in range(self.n_channels))
        return tuple(Channel(s) for s in range(self.n_channels))


def bump_family(dimension: int, center, halfwidth, coefficients=None, n_channels=1, spin=None, magnetic=None) -> ScaledFamily:
    """Compactly supported envelope family used by the definiteness probes."""
    center = np.broadcast_to(np.atleast_1d(np.asarray(center, float)), (dimension,))
    halfwidth = np.broadcast_to(np.atleast_1d(np.asarray(halfwidth, float)), (dimension,))
    lo = center - halfwidth
    hi = center + halfwidth
    if dimension == 1:
        inside = lo[0] > 0
    else:
        corner = np.maximum(np.abs(lo[1:]), np.abs(hi[1:]))
        inside = lo[0] > np.linalg.norm(corner)
    if not inside:
        raise ValueError("family support must lie strictly inside the future cone")

    def raw(k: np.ndarray) -> np.ndarray:
        env = np.ones(k.shape[0])
        for i in range(dimension):
            env = env * _bump((k[:, i] - center[i]) / halfwidth[i])
        return env

    # normalize the envelope on a fine reference grid over its support
    npts = max(64, 256 // dimension)
    axes = [uniform_axis(lo[i] - 0.01 * halfwidth[i], hi[i] + 0.01 * halfwidth[i], npts if dimension == 1 else 24) for i in range(dimension)]
    ref = Grid(dimension, tuple(axes), False)
    val = raw(ref.nodes)
    nrm = np.sqrt(np.sum(ref.weights * val**2))

    return ScaledFamily(
        dimension=dimension,
        envelope=lambda k: raw(k) / nrm,
        support_lo=lo,
        support_hi=hi,
        coefficients=coefficients,
        n_channels=n_channels,
        spin=spin,
        magnetic=magnetic,
    )


def realize_family(family: ScaledFamily, lam: float, grid: Grid) -> WaveFunction:
    """Sample psi^(lambda) on the grid; support is lambda * J."""
    if lam <= 0:
        raise ValueError("scale must be positive")
    lo = lam * family.support_lo
    hi = lam * family.support_hi
    if not grid.contains_box(lo, hi):
        raise ValueError(f"grid cannot host the scaled support [{lo}, {hi}]")
    k = grid.nodes
    env = lam ** (-family.dimension / 2.0) * family.envelope(k / lam)
    chans = family.channel_tuple()
    if family.coefficients is None:
        coeff = np.zeros((len(chans), grid.size), dtype=complex)
        coeff[0] = 1.0
    else:
        arg = grid.mu() if family.dimension == 4 else k[:, 0]
        coeff = np.asarray(family.coefficients(arg), dtype=complex)
        if coeff.shape != (len(chans), grid.size):
            raise ValueError("coefficient function must return (n_channels, n_nodes)")
        nrm = np.sqrt(np.sum(np.abs(coeff) ** 2, axis=0))
        coeff = np.where(nrm > 0, coeff / nrm, coeff)
    return WaveFunction(grid, chans, coeff * env[None, :])


def save_state(psi: WaveFunction, path) -> None:
    """Write the documented JSON snapshot of a state."""
    flat = psi.amplitudes.ravel()
    doc = {
        "dimension": psi.grid.dimension,
        "grid": psi.grid.spec(),
        "channels": [[ch.sigma, ch.j, ch.m] for ch in psi.channels],
        "amplitudes": np.stack([flat.real, flat.imag], axis=-1).ravel().tolist(),
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_state(path) -> WaveFunction:
    with open(path) as f:
        doc = json.load(f)
    grid = Grid.from_spec(doc["grid"])
    channels = tuple(Channel(*c) for c in doc["channels"])
    arr = np.asarray(doc["amplitudes"], dtype=float).reshape(-1, 2)
    amps = (arr[:, 0] + 1j * arr[:, 1]).reshape(len(channels), grid.size)
    return WaveFunction(grid, channels, amps)
