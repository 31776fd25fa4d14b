"""Event-coordinate expectation values, Casimir filtering, and classification.

Three independent routes to the mean coordinates (psi, X^alpha psi):

  moment    first moments of the sampled density rho(psi, x);
  abc       the split A + B + C (boost matrices, proper-time delay, phase
            gradient) valid for normalized Poincare kernels;
  operator  direct application of
            X^alpha = (P.P)^{-1} (P_beta L^{alpha beta} - P^alpha (D - 2i)),
            valid for normalized quasi-baricentric kernels.

Momentum derivatives use 4th-order central differences on uniform axes with
zero padding, which is exact for the compactly supported packets used here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import DensityField, amplitude_field
from .irreps import IrrepLabel, build_generators
from .kernels import PoincareKernel, PoincareSector, certify_kernel
from .minkowski import angular_momentum_matrices
from .states import Grid, WaveFunction, norm_squared, spacetime_grid, uniform_axis

__all__ = [
    "CoordinateEstimate",
    "CasimirValues",
    "ProperTimeDelay",
    "mean_coordinates_moment",
    "mean_coordinates_abc",
    "mean_coordinates_operator",
    "proper_time_delay",
    "apply_xi_filter",
    "classify_kernel",
    "casimir_values",
    "grid_gradient",
]


@dataclass(frozen=True)
class CoordinateEstimate:
    """Mean event coordinates with their route tag.

    Imaginary parts are kept as a consistency diagnostic: the coordinate
    operators are not self-adjoint, and residual Im parts measure how far the
    quadrature strays from the exact expectation values.
    """

    values: np.ndarray
    route: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag)))


@dataclass(frozen=True)
class CasimirValues:
    """Invariant eigenvalues labeling a sector: state side (c1, c2) at a
    reference mass, kernel side (c3, c4)."""

    j: int
    M: int
    c: complex
    c3: complex
    c4: complex

    def c1(self, mu: float) -> float:
        return mu**2

    def c2(self, mu: float) -> float:
        return mu**2 * self.j * (self.j + 1)


@dataclass(frozen=True)
class ProperTimeDelay:
    """Hermitian matrices T^j(mu) from the mu-derivative of the kernel."""

    mu: np.ndarray
    matrices: dict  # j -> (n_mu, n_sigma, n_sigma)

    def hermiticity_residual(self) -> float:
        worst = 0.0
        for t in self.matrices.values():
            worst = max(worst, float(np.max(np.abs(t - t.conj().transpose(0, 2, 1)))))
        return worst


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

_FD4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def grid_gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """4th-order central differences d/dk^alpha on a uniform product grid.

    ``values`` has shape (..., grid.size); returns (d, ..., grid.size).
    The array is zero-padded, so results near the boundary are only accurate
    when the sampled function vanishes there.
    """
    if any(ax.kind != "uniform" for ax in grid.axes):
        raise ValueError("finite differences require uniform axes")
    lead = values.shape[:-1]
    arr = values.reshape(lead + grid.shape)
    out = np.empty((grid.dimension,) + values.shape, dtype=complex)
    nlead = len(lead)
    for axis_i in range(grid.dimension):
        ax = grid.axes[axis_i]
        work = np.moveaxis(arr, nlead + axis_i, -1)
        padded = np.concatenate(
            [np.zeros(work.shape[:-1] + (2,)), work, np.zeros(work.shape[:-1] + (2,))],
            axis=-1,
        )
        der = sum(c * padded[..., i : i + ax.n] for i, c in enumerate(_FD4) if c != 0.0)
        der = der / ax.spacing
        out[axis_i] = np.moveaxis(der, -1, nlead + axis_i).reshape(values.shape)
    return out


# ---------------------------------------------------------------------------
# route 1: density moments
# ---------------------------------------------------------------------------

def mean_coordinates_moment(fld: DensityField, capture_threshold: float = 0.999) -> CoordinateEstimate:
    """First moments of the sampled density, normalized by the captured mass."""
    total = fld.total()
    capture = fld.capture_fraction()
    w = fld.xgrid.weights * fld.rho
    moments = fld.xgrid.nodes.T @ w / total
    status = "ok" if capture >= capture_threshold else "low_capture"
    return CoordinateEstimate(
        values=moments.astype(complex),
        route="moment",
        diagnostics={"capture_fraction": capture, "total": total, "status": status},
    )


# ---------------------------------------------------------------------------
# proper-time delay T^j(mu)
# ---------------------------------------------------------------------------

def _profile_derivative(sector: PoincareSector, j: int, mu: np.ndarray) -> np.ndarray:
    """dF/dmu by a 4th-order central stencil on the profile callable."""
    h = 1e-3 * np.maximum(1.0, np.abs(mu))
    acc = None
    for step, coef in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
        term = coef * sector.f(j, mu + step * h)
        acc = term if acc is None else acc + term
    return acc / (12.0 * h)[None, :]


def proper_time_delay(kernel: PoincareKernel, mu, spins=None) -> ProperTimeDelay:
    """T^j(mu) = -i sum_sectors omega conj(F) dF/dmu, acting on the sigma index."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.size < 3:
        raise ValueError("proper_time_delay needs at least 3 mu nodes")
    spins = kernel.active_spins() if spins is None else tuple(spins)
    matrices = {}
    for j in spins:
        t = np.zeros((mu.size, kernel.n_sigma, kernel.n_sigma), dtype=complex)
        for s in kernel.sectors:
            f = s.f(j, mu)
            if f is None:
                continue
            df = _profile_derivative(s, j, mu)
            t += -1j * s.omega * np.einsum("am,bm->mab", f.conj(), df)
        matrices[j] = t
    return ProperTimeDelay(mu=mu, matrices=matrices)


def _delay_at(kernel: PoincareKernel, mu: np.ndarray, j: int) -> np.ndarray:
    """T^j evaluated at scattered mu values, shape (n_mu, n_sigma, n_sigma)."""
    t = np.zeros((mu.size, kernel.n_sigma, kernel.n_sigma), dtype=complex)
    for s in kernel.sectors:
        f = s.f(j, mu)
        if f is None:
            continue
        df = _profile_derivative(s, j, mu)
        t += -1j * s.omega * np.einsum("am,bm->mab", f.conj(), df)
    return t


# ---------------------------------------------------------------------------
# route 2: A + B + C
# ---------------------------------------------------------------------------

def _spin_blocks(psi: WaveFunction):
    """Channel indices grouped by spin, m ascending: {j: (sigma, [idx])}."""
    groups: dict = {}
    for i, ch in enumerate(psi.channels):
        groups.setdefault((ch.j, ch.sigma), []).append((ch.m, i))
    out = {}
    for (j, sigma), lst in groups.items():
        lst.sort()
        out[(j, sigma)] = [i for _, i in lst]
    return out


def _c_term(psi: WaveFunction) -> np.ndarray:
    """C_alpha = -i int conj(psi) d psi / dk^alpha, raised to C^alpha."""
    grads = grid_gradient(psi.amplitudes, psi.grid)
    w = psi.grid.weights
    c_lower = -1j * np.einsum("cn,acn,n->a", psi.amplitudes.conj(), grads, w)
    c_upper = c_lower.copy()
    c_upper[1:] *= -1.0
    return c_upper


def _b_term(psi: WaveFunction, kernel: PoincareKernel) -> np.ndarray:
    mu = psi.grid.mu()
    k = psi.grid.nodes
    w = psi.grid.weights
    b = np.zeros(psi.grid.dimension, dtype=complex)
    blocks = _spin_blocks(psi)
    for (j, sigma), idx in blocks.items():
        t = _delay_at(kernel, mu, j)  # (N, s, s)
        for (j2, sigma2), idx2 in blocks.items():
            if j2 != j:
                continue
            # sum over m pairs the same index: diagonal in (j, m)
            pair = np.einsum("cn,cn->n", psi.amplitudes[idx2].conj(), psi.amplitudes[idx])
            b += np.einsum("an,n,n,n->a", k.T, t[:, sigma2, sigma], pair / mu, w)
    return b


def _qb_a_term(psi: WaveFunction, kernel: PoincareKernel) -> np.ndarray:
    """Simplified A for quasi-baricentric kernels: A^0 = 0 and

    A^r = - int eps^{rst} k^s / (mu (mu + k^0)) conj(psi) M^t psi.
    """
    k = psi.grid.nodes
    mu = psi.grid.mu()
    w = psi.grid.weights
    a = np.zeros(psi.grid.dimension, dtype=complex)
    coef = w / (mu * (mu + k[:, 0]))
    for (j, sigma), idx in _spin_blocks(psi).items():
        if j == 0:
            continue
        jmats = angular_momentum_matrices(j)  # (3, 2j+1, 2j+1)
        for (j2, sigma2), idx2 in _spin_blocks(psi).items():
            if j2 != j or sigma2 != sigma:
                continue
            dens = np.einsum(
                "pn,tpq,qn->tn", psi.amplitudes[idx2].conj(), jmats, psi.amplitudes[idx]
            )
            for r in range(3):
                for s in range(3):
                    for t in range(3):
                        eps = _levi_civita(r, s, t)
                        if eps == 0:
                            continue
                        a[r + 1] -= eps * np.sum(coef * k[:, s + 1] * dens[t])
    return a


def _levi_civita(r: int, s: int, t: int) -> int:
    if (r, s, t) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        return 1
    if (r, s, t) in ((0, 2, 1), (2, 1, 0), (1, 0, 2)):
        return -1
    return 0


def _general_a_term(psi: WaveFunction, kernel: PoincareKernel, j_max_margin: int = 2) -> np.ndarray:
    """A via the boost matrices S_alpha(k) of each sector's representation.

    A_alpha = sum_sectors omega int conj(F psi) S_alpha (F psi); the spin
    blocks of S are assembled from the sector generators restricted to the
    spins present in the state.
    """
    k = psi.grid.nodes
    mu = psi.grid.mu()
    w = psi.grid.weights
    d = psi.grid.dimension
    a_lower = np.zeros(d, dtype=complex)
    blocks = _spin_blocks(psi)
    spins = sorted({j for j, _ in blocks})
    for sector in kernel.sectors:
        label = IrrepLabel(sector.M, sector.c)
        if label.trivial:
            continue  # one-dimensional: all generators vanish
        irrep = build_generators(label, max(spins) + j_max_margin)
        for (jp, sigp), idxp in blocks.items():
            fp = sector.f(jp, mu)
            if fp is None or jp not in irrep.lvals:
                continue
            for (j, sig), idx in blocks.items():
                f = sector.f(j, mu)
                if f is None or j not in irrep.lvals:
                    continue
                nblk = irrep.boost[:, irrep.block_slice(jp), irrep.block_slice(j)]
                mblk = (
                    irrep.rot[:, irrep.block_slice(jp), irrep.block_slice(j)]
                    if jp == j
                    else None
                )
                pair = np.einsum(
                    "pn,tpq,qn->tn",
                    psi.amplitudes[idxp].conj(),
                    nblk,
                    psi.amplitudes[idx],
                )
                prof = sector.omega * fp[sigp].conj() * f[sig] * w
                # S_0 = (k^r / mu^2) N^r
                a_lower[0] += np.sum(prof * np.einsum("tn,nt->n", pair, k[:, 1:] / mu[:, None] ** 2))
                # S_r = -N^r/mu - k^r k^s N^s/(mu^2(mu+k^0)) + eps^{rst} k^s M^t/(mu(mu+k^0))
                denom = mu**2 * (mu + k[:, 0])
                for r in range(3):
                    term = -pair[r] / mu
                    term = term - k[:, r + 1] * np.einsum("tn,nt->n", pair, k[:, 1:]) / denom
                    if mblk is not None:
                        mpair = np.einsum(
                            "pn,tpq,qn->tn",
                            psi.amplitudes[idxp].conj(),
                            mblk,
                            psi.amplitudes[idx],
                        )
                        for s in range(3):
                            for t in range(3):
                                eps = _levi_civita(r, s, t)
                                if eps:
                                    term = term + eps * k[:, s + 1] * mpair[t] / (
                                        mu * (mu + k[:, 0])
                                    )
                    a_lower[r + 1] += np.sum(prof * term)
    a_upper = a_lower.copy()
    a_upper[1:] *= -1.0
    return a_upper


def mean_coordinates_abc(
    psi: WaveFunction,
    kernel: PoincareKernel,
    use_simplified_a: bool = True,
) -> CoordinateEstimate:
    """Mean coordinates as A + B + C for a normalized Poincare kernel."""
    cert = certify_kernel(kernel, grid=psi.grid, spins=psi.spins() or None)
    cert.require_isometry()
    if use_simplified_a:
        if not kernel.quasi_baricentric:
            raise ValueError("simplified A term requires a quasi-baricentric kernel")
        a = _qb_a_term(psi, kernel)
    else:
        a = _general_a_term(psi, kernel)
    b = _b_term(psi, kernel)
    c = _c_term(psi)
    return CoordinateEstimate(
        values=a + b + c,
        route="abc",
        diagnostics={
            "A": a.tolist(),
            "B": b.tolist(),
            "C": c.tolist(),
            "simplified_a": bool(use_simplified_a),
        },
    )


# ---------------------------------------------------------------------------
# route 3: direct operator
# ---------------------------------------------------------------------------

def mean_coordinates_operator(psi: WaveFunction, kernel: PoincareKernel) -> CoordinateEstimate:
    """(psi, X^alpha psi) with X = (P.P)^{-1}(P_beta L^{alpha beta} - P^alpha (D - 2i))."""
    cert = certify_kernel(kernel, grid=psi.grid, spins=psi.spins() or None)
    cert.require_isometry()
    if not kernel.quasi_baricentric:
        raise ValueError("operator route requires a quasi-baricentric kernel")
    k = psi.grid.nodes
    mu = psi.grid.mu()
    w = psi.grid.weights
    d = psi.grid.dimension
    grads = grid_gradient(psi.amplitudes, psi.grid)  # (d, ch, N) d/dk^alpha
    metric = np.ones(d)
    metric[1:] = -1.0
    k_lower = k * metric[None, :]

    # D psi = i (k^alpha d_alpha + 2) psi - mu T(mu) psi
    dpsi = 1j * (np.einsum("na,acn->cn", k, grads) + 2.0 * psi.amplitudes)
    blocks = _spin_blocks(psi)
    for (j, sigma), idx in blocks.items():
        t = _delay_at(kernel, mu, j)
        for (j2, sigma2), idx2 in blocks.items():
            if j2 != j:
                continue
            dpsi[idx2] -= mu[None, :] * t[:, sigma2, sigma][None, :] * psi.amplitudes[idx]

    # spin matrices Lhat_{alpha beta} acting per (j, sigma) block
    values = np.zeros(d, dtype=complex)
    for alpha in range(d):
        # orbital part of k^delta L_{alpha delta} psi
        # L_{alpha delta} = i (k_alpha d_delta - k_delta d_alpha) + Lhat_{alpha delta}
        orb = 1j * (
            k_lower[:, alpha][None, :] * np.einsum("na,acn->cn", k, grads)
            - np.einsum("na,na->n", k, k_lower)[None, :] * grads[alpha]
        )
        # spin part of k^delta Lhat_{alpha delta}: the contraction collapses to
        # zero for alpha = 0 (eps^{rst} k^r k^s = 0) and to
        # eps^{rst} k^s M^t mu / (mu + k^0) for alpha = r.
        spin = np.zeros_like(psi.amplitudes)
        if alpha > 0 and d == 4:
            r = alpha - 1
            for (j, sigma), idx in blocks.items():
                if j == 0:
                    continue
                jmats = angular_momentum_matrices(j)
                coef = mu / (mu + k[:, 0])
                for s in range(3):
                    for t in range(3):
                        eps = _levi_civita(r, s, t)
                        if eps:
                            spin[idx] += eps * (coef * k[:, s + 1])[None, :] * np.einsum(
                                "pq,qn->pn", jmats[t], psi.amplitudes[idx]
                            )
        total_l = orb + spin
        xpsi = (total_l - k[:, alpha][None, :] * (dpsi - 2j * psi.amplitudes)) / mu[None, :] ** 2
        values[alpha] = np.einsum("cn,cn,n->", psi.amplitudes.conj(), xpsi, w)
    # raise the index: values currently k^delta L_{alpha delta} -> need g^{alpha .}
    values[1:] *= -1.0
    return CoordinateEstimate(values=values, route="operator", diagnostics={})


# ---------------------------------------------------------------------------
# Casimir filter and classification
# ---------------------------------------------------------------------------

def casimir_values(kernel: PoincareKernel) -> list:
    out = []
    for s in kernel.sectors:
        for j in sorted(s.profiles):
            c = complex(s.c)
            out.append(
                CasimirValues(j=j, M=s.M, c=c, c3=s.M**2 + c**2 - 1.0, c4=1j * s.M * c)
            )
    return out


def _casimir_argument(j: int, M: int, c: complex, mu: np.ndarray) -> np.ndarray:
    return (j * (j + 1) - M**2 - (complex(c) ** 2).real + 1.0) / mu**2


def apply_xi_filter(psi: WaveFunction, kernel: PoincareKernel, f) -> float:
    """Density at the origin of the filtered state, rho(f(Xi) psi, 0).

    The filter multiplies each sector amplitude by f of the spectral value
    mu^{-2} (j(j+1) - M^2 - c^2 + 1), the world-line distance diagnostic.
    """
    filtered = []
    for s in kernel.sectors:
        profiles = {}
        for j, fn in s.profiles.items():
            def wrapped(mu, _fn=fn, _j=j, _M=s.M, _c=s.c):
                base = np.asarray(_fn(mu), dtype=complex)
                return base * f(_casimir_argument(_j, _M, _c, np.asarray(mu)))[None, :]
            profiles[j] = wrapped
        filtered.append(PoincareSector(s.nu, s.M, s.c, s.omega, profiles))
    fk = PoincareKernel(kernel.name + "+xi", kernel.n_sigma, tuple(filtered), normalized=False)
    origin = spacetime_grid([uniform_axis(0.0, 1.0, 1) for _ in range(psi.grid.dimension)])
    amps = amplitude_field(psi, fk, origin)
    omegas = {(s.nu, s.M, complex(s.c)): s.omega for s in fk.sectors}
    rho0 = 0.0
    for key, a in amps.items():
        rho0 += omegas[key] * float(np.sum(np.abs(a[:, 0]) ** 2))
    return rho0


def classify_kernel(kernel: PoincareKernel) -> dict:
    """Support-pattern classification with the sector Casimir values."""
    if kernel.strict_baricentric:
        label = "strict_baricentric"
    elif kernel.quasi_baricentric:
        label = "quasi_baricentric"
    else:
        label = "neither"
    return {
        "kernel": kernel.name,
        "classification": label,
        "sectors": [
            {
                "nu": s.nu,
                "M": s.M,
                "c": str(complex(s.c)),
                "omega": s.omega,
                "spins": sorted(s.profiles),
            }
            for s in kernel.sectors
        ],
        "casimirs": [
            {"j": cv.j, "c3": str(cv.c3), "c4": str(cv.c4)} for cv in casimir_values(kernel)
        ],
    }
