"""POV-measure kernels: translation kernels K(k) and Poincare kernels (omega, F).

A translation kernel is a matrix-valued function K_{gamma sigma}(k); a
Poincare kernel is a discrete set of SL(2,C) sectors (nu, M, c) with positive
weights omega and per-spin radial profiles F^j_{sigma}(mu).  Certification
checks the contraction bound (operator norm <= 1 pointwise) and, when
claimed, the isometry (normalization) condition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .irreps import IrrepLabel

__all__ = [
    "TranslationKernel",
    "PoincareSector",
    "PoincareKernel",
    "KernelCertificate",
    "certify_kernel",
    "translation_catalog",
    "poincare_catalog",
    "make_translation_kernel",
    "make_poincare_kernel",
]


@dataclass(frozen=True)
class TranslationKernel:
    """Translation-covariant kernel K_{gamma sigma}(k).

    ``func(k)`` maps an (N, d) node array to a (n_gamma, n_sigma, N) array;
    evaluation at arbitrary momenta is needed by the definiteness correlators.
    """

    name: str
    n_gamma: int
    n_sigma: int
    func: Callable[[np.ndarray], np.ndarray]
    normalized: bool = False

    def evaluate(self, k: np.ndarray) -> np.ndarray:
        k = np.atleast_2d(np.asarray(k, dtype=float))
        out = np.asarray(self.func(k), dtype=complex)
        if out.shape != (self.n_gamma, self.n_sigma, k.shape[0]):
            raise ValueError("kernel function returned a wrongly shaped array")
        return out


@dataclass(frozen=True)
class PoincareSector:
    """One discrete sector (nu, M, c) with weight omega and profiles F^j(mu)."""

    nu: int
    M: int
    c: complex
    omega: float
    profiles: Mapping[int, Callable[[np.ndarray], np.ndarray]]  # j -> (n_sigma, n_mu)

    def label(self) -> IrrepLabel:
        return IrrepLabel(self.M, self.c)

    def f(self, j: int, mu: np.ndarray) -> Optional[np.ndarray]:
        fn = self.profiles.get(j)
        if fn is None:
            return None
        return np.asarray(fn(np.atleast_1d(mu)), dtype=complex)


@dataclass(frozen=True)
class PoincareKernel:
    """Poincare-covariant kernel: discrete sectors with omega weights."""

    name: str
    n_sigma: int
    sectors: tuple
    normalized: bool = False

    def active_spins(self) -> tuple:
        js = set()
        for s in self.sectors:
            js.update(s.profiles.keys())
        return tuple(sorted(js))

    @property
    def quasi_baricentric(self) -> bool:
        """F supported only at M = j, with c = 1 at j = 0 and c = 0 at j > 0."""
        for s in self.sectors:
            for j in s.profiles:
                if s.M != j:
                    return False
                if j == 0 and abs(complex(s.c) - 1.0) > 1e-12:
                    return False
                if j > 0 and abs(complex(s.c)) > 1e-12:
                    return False
        return True

    @property
    def strict_baricentric(self) -> bool:
        """Only the trivial representation (j = M = 0, c = +-1) appears."""
        for s in self.sectors:
            if s.M != 0 or abs(abs(complex(s.c)) - 1.0) > 1e-12 or complex(s.c).imag != 0:
                return False
            if any(j != 0 for j in s.profiles):
                return False
        return True


@dataclass(frozen=True)
class KernelCertificate:
    """Report of the contraction and isometry checks."""

    kernel: str
    max_operator_norm: float
    contraction_ok: bool
    isometry_residual: float
    isometric: bool
    details: dict = field(default_factory=dict)

    def require_contraction(self) -> None:
        if not self.contraction_ok:
            raise ValueError(
                f"kernel {self.kernel!r} violates the contraction bound: "
                f"max operator norm {self.max_operator_norm:.6g} > 1"
            )

    def require_isometry(self) -> None:
        self.require_contraction()
        if not self.isometric:
            raise ValueError(
                f"kernel {self.kernel!r} is not normalized: isometry residual "
                f"{self.isometry_residual:.3g}"
            )


_CONTRACTION_TOL = 1e-10
_ISOMETRY_TOL = 1e-10


def _certify_matrices(mats: np.ndarray) -> tuple[float, float]:
    """mats: (..., n_gamma, n_sigma) stacked pointwise kernel matrices."""
    svals = np.linalg.svd(mats, compute_uv=False)
    max_norm = float(np.max(svals)) if svals.size else 0.0
    gram = np.einsum("...gs,...gt->...st", mats.conj(), mats)
    eye = np.eye(mats.shape[-1])
    iso = float(np.max(np.abs(gram - eye))) if gram.size else 0.0
    return max_norm, iso


def certify_kernel(kernel, grid=None, mu=None, spins=None) -> KernelCertificate:
    """Check the contraction bound and the isometry condition pointwise.

    Translation kernels are sampled on ``grid``; Poincare kernels on the
    invariant-mass values ``mu`` (defaulting to grid.mu()) for every active
    spin, with the sector weights folded in as sqrt(omega) F.
    """
    if isinstance(kernel, TranslationKernel):
        if grid is None:
            raise ValueError("certifying a translation kernel requires a grid")
        vals = kernel.evaluate(grid.nodes)  # (g, s, N)
        mats = np.moveaxis(vals, -1, 0)  # (N, g, s)
        max_norm, iso = _certify_matrices(mats)
        return KernelCertificate(
            kernel=kernel.name,
            max_operator_norm=max_norm,
            contraction_ok=max_norm <= 1.0 + _CONTRACTION_TOL,
            isometry_residual=iso,
            isometric=iso <= _ISOMETRY_TOL,
            details={"points": int(mats.shape[0])},
        )
    if isinstance(kernel, PoincareKernel):
        if mu is None:
            if grid is None:
                raise ValueError("certifying a Poincare kernel requires mu values or a grid")
            mu = grid.mu()
        mu = np.unique(np.asarray(mu, dtype=float))
        spins = kernel.active_spins() if spins is None else tuple(spins)
        worst_norm = 0.0
        worst_iso = 0.0
        per_spin = {}
        for j in spins:
            rows = []
            for s in kernel.sectors:
                f = s.f(j, mu)
                if f is None:
                    f = np.zeros((kernel.n_sigma, mu.size), dtype=complex)
                rows.append(np.sqrt(s.omega) * f)
            stack = np.stack(rows)  # (n_gamma, n_sigma, n_mu)
            mats = np.moveaxis(stack, -1, 0)
            mn, iso = _certify_matrices(mats)
            per_spin[j] = {"max_operator_norm": mn, "isometry_residual": iso}
            worst_norm = max(worst_norm, mn)
            worst_iso = max(worst_iso, iso)
        return KernelCertificate(
            kernel=kernel.name,
            max_operator_norm=worst_norm,
            contraction_ok=worst_norm <= 1.0 + _CONTRACTION_TOL,
            isometry_residual=worst_iso,
            isometric=worst_iso <= _ISOMETRY_TOL,
            details={"per_spin": per_spin, "mu_points": int(mu.size)},
        )
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


# ---------------------------------------------------------------------------
# kernel catalog
# ---------------------------------------------------------------------------

def _flat(params: dict, d: int) -> TranslationKernel:
    return TranslationKernel(
        name="flat",
        n_gamma=1,
        n_sigma=1,
        func=lambda k: np.ones((1, 1, k.shape[0]), dtype=complex),
        normalized=True,
    )


def _scaled(params: dict, d: int) -> TranslationKernel:
    factor = float(params.get("factor", 2.0))
    return TranslationKernel(
        name="scaled",
        n_gamma=1,
        n_sigma=1,
        func=lambda k: factor * np.ones((1, 1, k.shape[0]), dtype=complex),
        normalized=False,
    )


def _two_channel_rotation(params: dict, d: int) -> TranslationKernel:
    """Isometric 2x2 kernel: a k-dependent real rotation of the channel space."""
    rate = float(params.get("rate", 1.0))

    def func(k):
        ang = rate * k[:, 0]
        c, s = np.cos(ang), np.sin(ang)
        out = np.empty((2, 2, k.shape[0]), dtype=complex)
        out[0, 0], out[0, 1] = c, -s
        out[1, 0], out[1, 1] = s, c
        return out

    return TranslationKernel("two_channel_rotation", 2, 2, func, normalized=True)


def _chirp(params: dict, d: int) -> TranslationKernel:
    """Unimodular phase e^{i beta (k^0)^2}: isometric but not definite."""
    beta = float(params.get("beta", 1.0))
    return TranslationKernel(
        name="chirp",
        n_gamma=1,
        n_sigma=1,
        func=lambda k: np.exp(1j * beta * k[:, 0] ** 2)[None, None, :],
        normalized=True,
    )


def _mu_phase_profile(alpha: float):
    return lambda mu: np.exp(1j * alpha * mu)[None, :]


def _flat_profile():
    return lambda mu: np.ones((1, mu.size), dtype=complex)


def _qb_scalar_flat(params: dict) -> PoincareKernel:
    sector = PoincareSector(nu=0, M=0, c=1.0, omega=1.0, profiles={0: _flat_profile()})
    return PoincareKernel("qb_scalar_flat", 1, (sector,), normalized=True)


def _qb_scalar_phase(params: dict) -> PoincareKernel:
    alpha = float(params.get("alpha", 0.5))
    sector = PoincareSector(nu=0, M=0, c=1.0, omega=1.0, profiles={0: _mu_phase_profile(alpha)})
    return PoincareKernel("qb_scalar_phase", 1, (sector,), normalized=True)


def _qb_j01(params: dict) -> PoincareKernel:
    alpha = float(params.get("alpha", 0.5))
    s0 = PoincareSector(nu=0, M=0, c=1.0, omega=1.0, profiles={0: _mu_phase_profile(alpha)})
    s1 = PoincareSector(nu=1, M=1, c=0.0, omega=1.0, profiles={1: _mu_phase_profile(alpha)})
    return PoincareKernel("qb_j01", 1, (s0, s1), normalized=True)


def _strict(params: dict) -> PoincareKernel:
    sector = PoincareSector(nu=0, M=0, c=1.0, omega=1.0, profiles={0: _flat_profile()})
    return PoincareKernel("strict", 1, (sector,), normalized=False)


def _neither(params: dict) -> PoincareKernel:
    sector = PoincareSector(nu=0, M=0, c=2j, omega=1.0, profiles={1: _flat_profile()})
    return PoincareKernel("neither", 1, (sector,), normalized=False)


_TRANSLATION_CATALOG = {
    "flat": _flat,
    "scaled": _scaled,
    "two_channel_rotation": _two_channel_rotation,
    "chirp": _chirp,
}

_POINCARE_CATALOG = {
    "qb_scalar_flat": _qb_scalar_flat,
    "qb_scalar_phase": _qb_scalar_phase,
    "qb_j01": _qb_j01,
    "strict": _strict,
    "neither": _neither,
}


def translation_catalog() -> tuple:
    return tuple(sorted(_TRANSLATION_CATALOG))


def poincare_catalog() -> tuple:
    return tuple(sorted(_POINCARE_CATALOG))


def make_translation_kernel(name: str, dimension: int = 1, **params) -> TranslationKernel:
    try:
        factory = _TRANSLATION_CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown translation kernel {name!r}; catalog: {translation_catalog()}")
    return factory(params, dimension)


def make_poincare_kernel(name: str, **params) -> PoincareKernel:
    try:
        factory = _POINCARE_CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown Poincare kernel {name!r}; catalog: {poincare_catalog()}")
    return factory(params)
