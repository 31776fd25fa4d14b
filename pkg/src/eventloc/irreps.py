"""Finite truncations of SL(2,C) unitary irreducible representations.

An irrep is labelled by (M, c): the principal series has c imaginary and M
(half-)integral, the supplementary series has real c in (-1, 1) with M = 0,
and c = +-1 with M = 0 denotes the trivial one-dimensional representation.
The carrier space is spanned by |l, n> with l = |M|, |M|+1, ..., truncated
here at l <= j_max.  Rotation generators are block diagonal and exact; boost
generators couple l -> l +- 1, so commutators and Casimir identities are only
claimed on the interior blocks l <= j_max - 1.

The boost matrix elements follow the classical tridiagonal formulas
(transcribed with a sign convention fixed so that the Casimir values come out
as M^2 + c^2 - 1 and iMc); build_generators certifies them numerically rather
than trusting the transcription.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .minkowski import (
    angular_momentum_matrices,
    assert_future_cone,
    invariant_mass,
    su2_wigner_matrix,
)

__all__ = [
    "IrrepLabel",
    "TruncatedIrrep",
    "TruncationError",
    "build_generators",
    "irrep_matrix_element",
    "s_matrices",
    "boost_columns",
    "calibrate_rapidity_window",
    "IrrepMatrixResult",
]

_EPS = 1e-12


class TruncationError(RuntimeError):
    """Raised when a requested group element exceeds the truncation window."""


@dataclass(frozen=True)
class IrrepLabel:
    """SL(2,C) irrep label (M, c)."""

    M: float
    c: complex

    def __post_init__(self):
        if self.M < 0 or abs(2 * self.M - round(2 * self.M)) > _EPS:
            raise ValueError(f"M must be a non-negative (half-)integer, got {self.M}")
        c = complex(self.c)
        if abs(c - 1.0) < _EPS or abs(c + 1.0) < _EPS:
            if self.M != 0:
                raise ValueError("c = +-1 denotes the trivial representation and needs M = 0")
        elif abs(c.real) < _EPS:
            pass  # principal series (includes c = 0)
        elif abs(c.imag) < _EPS and -1.0 < c.real < 1.0:
            if self.M != 0:
                raise ValueError("supplementary series requires M = 0")
        else:
            raise ValueError(f"invalid irrep label (M={self.M}, c={self.c})")

    @property
    def trivial(self) -> bool:
        return abs(abs(complex(self.c)) - 1.0) < _EPS and abs(complex(self.c).imag) < _EPS and self.M == 0


@dataclass(frozen=True)
class TruncatedIrrep:
    """Generator matrices of an SL(2,C) irrep truncated at l <= j_max.

    Basis ordering: (l, n) with l ascending from |M| and n = -l..+l ascending.
    ``rot`` holds (M^1, M^2, M^3) and ``boost`` (N^1, N^2, N^3).
    """

    label: IrrepLabel
    j_max: float
    lvals: tuple
    basis_l: np.ndarray = field(repr=False)
    basis_n: np.ndarray = field(repr=False)
    rot: np.ndarray = field(repr=False)
    boost: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis_l.shape[0]

    def block_slice(self, l) -> slice:
        start = int(np.searchsorted(self.basis_l, l - 0.25))
        return slice(start, start + int(round(2 * l)) + 1)

    def interior_mask(self, margin: int = 1) -> np.ndarray:
        """Boolean mask selecting basis states with l <= j_max - margin."""
        return self.basis_l <= self.j_max - margin + 0.25

    def casimir_c3(self) -> np.ndarray:
        """(1/2) L_ab L^ab = M.M - N.N."""
        return sum(m @ m for m in self.rot) - sum(n @ n for n in self.boost)

    def casimir_c4(self) -> np.ndarray:
        """(1/8) eps^abcd L_ab L_cd = M.N."""
        return sum(m @ n for m, n in zip(self.rot, self.boost))

    def certify(self) -> dict:
        """Residuals of the algebra and Casimir identities on interior blocks."""
        mask = self.interior_mask()
        if not mask.any():
            mask = np.ones(self.dim, dtype=bool)
        ix = np.ix_(mask, mask)
        eye = np.eye(self.dim)

        def comm(a, b):
            return a @ b - b @ a

        eps = np.zeros((3, 3, 3))
        for r, s, t in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
            eps[r, s, t] = 1.0
            eps[s, r, t] = -1.0
        res_mm = res_mn = res_nn = 0.0
        for r in range(3):
            for s in range(3):
                tmm = comm(self.rot[r], self.rot[s]) - 1j * np.einsum(
                    "t,tij->ij", eps[r, s], self.rot
                )
                tmn = comm(self.rot[r], self.boost[s]) - 1j * np.einsum(
                    "t,tij->ij", eps[r, s], self.boost
                )
                tnn = comm(self.boost[r], self.boost[s]) + 1j * np.einsum(
                    "t,tij->ij", eps[r, s], self.rot
                )
                res_mm = max(res_mm, np.max(np.abs(tmm[ix])))
                res_mn = max(res_mn, np.max(np.abs(tmn[ix])))
                res_nn = max(res_nn, np.max(np.abs(tnn[ix])))
        M, c = self.label.M, complex(self.label.c)
        c3 = self.casimir_c3() - (M**2 + c**2 - 1.0) * eye
        c4 = self.casimir_c4() - (1j * M * c) * eye
        return {
            "rotation_algebra": res_mm,
            "mixed_algebra": res_mn,
            "boost_algebra": res_nn,
            "casimir_c3": float(np.max(np.abs(c3[ix]))),
            "casimir_c4": float(np.max(np.abs(c4[ix]))),
        }


def _boost_coefficients(M: float, c: complex, lvals) -> tuple[dict, dict]:
    """Tridiagonal coefficients a_l (diagonal) and c_l (coupling l-1 <-> l)."""
    a = {}
    cc = {}
    for l in lvals:
        a[l] = 0.0 if l == 0 else -1j * M * c / (l * (l + 1.0))
    for l in lvals[1:]:
        cc[l] = (1j / l) * np.sqrt((l**2 - M**2) * (l**2 - c**2) / (4.0 * l**2 - 1.0))
    return a, cc


def build_generators(label: IrrepLabel, j_max) -> TruncatedIrrep:
    """Construct rotation and boost generator matrices truncated at j_max."""
    if not isinstance(label, IrrepLabel):
        label = IrrepLabel(*label)
    M, c = label.M, complex(label.c)
    if j_max < M:
        raise ValueError(f"j_max = {j_max} must be >= |M| = {M}")
    if abs((j_max - M) - round(j_max - M)) > _EPS:
        raise ValueError("j_max must differ from |M| by an integer")
    nblocks = int(round(j_max - M)) + 1
    lvals = tuple(M + i for i in range(nblocks))
    basis_l = np.concatenate([np.full(int(round(2 * l)) + 1, l) for l in lvals])
    basis_n = np.concatenate([-l + np.arange(int(round(2 * l)) + 1) for l in lvals])
    dim = basis_l.shape[0]
    index = {(round(2 * l), round(2 * n)): i for i, (l, n) in enumerate(zip(basis_l, basis_n))}

    rot = np.zeros((3, dim, dim), dtype=complex)
    offset = 0
    for l in lvals:
        bdim = int(round(2 * l)) + 1
        rot[:, offset : offset + bdim, offset : offset + bdim] = angular_momentum_matrices(l)
        offset += bdim

    a_l, c_l = _boost_coefficients(M, c, lvals)
    n3 = np.zeros((dim, dim), dtype=complex)
    npl = np.zeros((dim, dim), dtype=complex)  # N^+ = N^1 + i N^2
    nmi = np.zeros((dim, dim), dtype=complex)  # N^- = N^1 - i N^2

    def put(mat, l_to, n_to, l_from, n_from, val):
        i = index.get((round(2 * l_to), round(2 * n_to)))
        jj = index.get((round(2 * l_from), round(2 * n_from)))
        if i is not None and jj is not None:
            mat[i, jj] += val

    for l in lvals:
        cl = c_l.get(l, 0.0)
        clp = c_l.get(l + 1, 0.0)
        al = a_l[l]
        for n in np.arange(-l, l + 0.5):
            put(n3, l - 1, n, l, n, cl * np.sqrt(l**2 - n**2))
            put(n3, l, n, l, n, -al * n)
            put(n3, l + 1, n, l, n, -clp * np.sqrt((l + 1) ** 2 - n**2))

            put(npl, l - 1, n + 1, l, n, cl * np.sqrt((l - n) * (l - n - 1)))
            put(npl, l, n + 1, l, n, -al * np.sqrt((l - n) * (l + n + 1)))
            put(npl, l + 1, n + 1, l, n, clp * np.sqrt((l + n + 1) * (l + n + 2)))

            put(nmi, l - 1, n - 1, l, n, -cl * np.sqrt((l + n) * (l + n - 1)))
            put(nmi, l, n - 1, l, n, -al * np.sqrt((l + n) * (l - n + 1)))
            put(nmi, l + 1, n - 1, l, n, -clp * np.sqrt((l - n + 1) * (l - n + 2)))

    boost = np.array([(npl + nmi) / 2.0, (npl - nmi) / 2j, n3])
    irrep = TruncatedIrrep(
        label=label,
        j_max=j_max,
        lvals=lvals,
        basis_l=basis_l,
        basis_n=basis_n,
        rot=rot,
        boost=boost,
    )
    report = irrep.certify()
    worst = max(report.values())
    if worst > 1e-9:
        raise RuntimeError(f"generator certification failed for {label}: {report}")
    return irrep


@dataclass(frozen=True)
class IrrepMatrixResult:
    """Representation matrix plus truncation diagnostics."""

    matrix: np.ndarray
    rapidity: float
    unitarity_defect: float


def _block_rotation(irrep: TruncatedIrrep, u: np.ndarray) -> np.ndarray:
    blocks = [su2_wigner_matrix(l, u) for l in irrep.lvals]
    out = np.zeros((irrep.dim, irrep.dim), dtype=complex)
    off = 0
    for b in blocks:
        d = b.shape[0]
        out[off : off + d, off : off + d] = b
        off += d
    return out


def _boost_exponential(irrep: TruncatedIrrep, chi: float) -> np.ndarray:
    """exp(-i chi N^3) on the truncated space (N^3 preserves n)."""
    n3 = irrep.boost[2]
    out = np.zeros_like(n3)
    nset = np.unique(np.round(2 * irrep.basis_n).astype(int))
    for n2 in nset:
        idx = np.flatnonzero(np.round(2 * irrep.basis_n).astype(int) == n2)
        sub = n3[np.ix_(idx, idx)]
        out[np.ix_(idx, idx)] = expm(-1j * chi * sub)
    return out


def irrep_matrix_element(
    irrep: TruncatedIrrep, a, defect_tol: float = 1e-6, chi_max: float = 5.0
) -> IrrepMatrixResult:
    """D^{Mc}(a) on the truncated space via Cartan factorization.

    a = u1 exp(chi sigma^3/2) u2 with u1, u2 in SU(2); the SU(2) factors are
    exact block rotations and the boost factor is exponentiated on the
    truncated N^3.  The unitarity defect on interior blocks is reported; a
    defect above ``defect_tol`` raises TruncationError.
    """
    a = np.asarray(a, dtype=complex)
    if abs(np.linalg.det(a) - 1.0) > 1e-10:
        raise ValueError("representation argument must be unimodular")
    uu, s, vh = np.linalg.svd(a)
    chi = 2.0 * np.log(s[0])
    if chi > chi_max:
        raise TruncationError(
            f"rapidity {chi:.3f} exceeds the validity window chi_max={chi_max}; "
            f"increase j_max above {irrep.j_max}"
        )
    # push the unitary factors into SU(2)
    du = np.linalg.det(uu)
    uu = uu / np.sqrt(du)
    vh = vh * np.sqrt(du)  # det a = 1 implies det(vh') = 1
    mat = _block_rotation(irrep, uu) @ _boost_exponential(irrep, chi) @ _block_rotation(irrep, vh)
    mask = irrep.interior_mask(margin=2) if irrep.j_max - irrep.label.M >= 2 else irrep.interior_mask(0)
    sub = mat[:, mask]
    gram = sub.conj().T @ sub
    defect = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    if chi > 1e-12 and defect > defect_tol:
        raise TruncationError(
            f"truncation unitarity defect {defect:.2e} exceeds {defect_tol:.1e} at "
            f"rapidity {chi:.3f}; increase j_max above {irrep.j_max}"
        )
    return IrrepMatrixResult(matrix=mat, rapidity=float(chi), unitarity_defect=defect)


def calibrate_rapidity_window(
    irrep: TruncatedIrrep,
    leak_tol: float = 1e-8,
    support_l=None,
    trials: int = 5,
    seed: int = 0,
) -> tuple[float, float]:
    """Empirically determine the rapidity window of the truncation.

    Returns (chi_max, leakage_at_chi_max): the largest rapidity from a
    geometric schedule at which random states supported on blocks
    l <= support_l (default j_max/2) leak less than ``leak_tol`` probability
    into the top two blocks under exp(-i chi N^3).
    """
    if support_l is None:
        support_l = irrep.j_max / 2
    rng = np.random.default_rng(seed)
    keep = irrep.basis_l <= support_l + 0.25
    top = irrep.basis_l >= irrep.j_max - 1 - 0.25
    states = []
    for _ in range(trials):
        v = rng.normal(size=irrep.dim) + 1j * rng.normal(size=irrep.dim)
        v[~keep] = 0.0
        states.append(v / np.linalg.norm(v))
    best = (0.0, 0.0)
    for chi in np.geomspace(2.0, 1e-3, 40):
        e = _boost_exponential(irrep, chi)
        leak = max(float(np.sum(np.abs((e @ v)[top]) ** 2)) for v in states)
        if leak < leak_tol:
            best = (float(chi), leak)
            break
    return best


def s_matrices(irrep: TruncatedIrrep, k) -> np.ndarray:
    """The four Hermitian first-order boost-response matrices S_alpha(k).

    S_0 = (k^r/mu^2) N^r;
    S_r = -(1/mu) N^r - k^r k^s/(mu^2 (mu+k^0)) N^s
          + eps^{rst} k^s/(mu (mu+k^0)) M^t.
    """
    k = np.asarray(k, dtype=float)
    assert_future_cone(k)
    mu = invariant_mass(k)
    kv = k[1:]
    out = np.empty((4, irrep.dim, irrep.dim), dtype=complex)
    out[0] = np.einsum("r,rij->ij", kv, irrep.boost) / mu**2
    eps = np.zeros((3, 3, 3))
    for r, s, t in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[r, s, t] = 1.0
        eps[s, r, t] = -1.0
    for r in range(3):
        m = -irrep.boost[r] / mu
        m = m - kv[r] * np.einsum("s,sij->ij", kv, irrep.boost) / (mu**2 * (mu + k[0]))
        m = m + np.einsum("st,s,tij->ij", eps[r], kv, irrep.rot) / (mu * (mu + k[0]))
        out[r + 1] = m
    return out


@lru_cache(maxsize=64)
def _jy_eig(l2: int):
    """Eigen-decomposition of J^2 (the y generator) for spin l = l2/2."""
    j = angular_momentum_matrices(l2 / 2.0)
    w, v = np.linalg.eigh(j[1])
    return w, v


def boost_columns(irrep: TruncatedIrrep, kvecs: np.ndarray, j_col) -> np.ndarray:
    """Columns D^{Mc}_{ln, j_col m}(a_k) for a batch of future-cone momenta.

    Returns an array of shape (n_k, dim, 2 j_col + 1).  Uses the polar form
    a_k = r(khat) exp(chi sigma^3/2) r(khat)^dagger, with the boost factor
    exponentiated per n-block through a cached eigen-decomposition, so the
    cost is linear in the number of momenta.
    """
    kvecs = np.asarray(kvecs, dtype=float)
    nk = kvecs.shape[0]
    mu = np.sqrt(kvecs[:, 0] ** 2 - np.sum(kvecs[:, 1:] ** 2, axis=1))
    kn = np.linalg.norm(kvecs[:, 1:], axis=1)
    chi = np.arcsinh(kn / mu)
    with np.errstate(invalid="ignore"):
        theta = np.arccos(np.clip(np.where(kn > 0, kvecs[:, 3] / np.where(kn > 0, kn, 1.0), 1.0), -1, 1))
    phi = np.arctan2(kvecs[:, 2], kvecs[:, 1])

    dim = irrep.dim
    ncol = int(round(2 * j_col)) + 1
    col_slice = irrep.block_slice(j_col)

    # step 1: x = R(r)^dagger restricted to the j_col column block
    # R(r) = exp(-i phi J3) exp(-i theta J2) block-diagonal; columns only touch l = j_col
    w, v = _jy_eig(round(2 * j_col))
    mvals = -j_col + np.arange(ncol)
    # R^{j_col}(r) = diag(e^{-i phi m}) V e^{-i theta w} V^dagger
    ph = np.exp(-1j * np.outer(phi, mvals))  # (nk, ncol)
    core = np.einsum("ab,kb,cb->kac", v, np.exp(-1j * np.outer(theta, w)), v.conj())
    r_block = ph[:, :, None] * core  # (nk, ncol, ncol)
    r_block_dag = np.conj(np.transpose(r_block, (0, 2, 1)))

    x = np.zeros((nk, dim, ncol), dtype=complex)
    x[:, col_slice, :] = r_block_dag

    # step 2: y = exp(-i chi N3) x, per n-block eigendecomposition
    n3 = irrep.boost[2]
    y = np.zeros_like(x)
    n2vals = np.round(2 * irrep.basis_n).astype(int)
    herm = np.max(np.abs(n3 - n3.conj().T)) < 1e-10
    for n2 in np.unique(n2vals):
        idx = np.flatnonzero(n2vals == n2)
        sub = n3[np.ix_(idx, idx)]
        if herm:
            w2, v2 = np.linalg.eigh(sub)
            v2inv = v2.conj().T
        else:
            w2, v2 = np.linalg.eig(sub)
            v2inv = np.linalg.inv(v2)
        proj = np.einsum("ij,kjc->kic", v2inv, x[:, idx, :])
        proj *= np.exp(-1j * np.outer(chi, w2))[:, :, None]
        y[:, idx, :] = np.einsum("ij,kjc->kic", v2, proj)

    # step 3: D columns = R(r) y, applied block by block in l
    out = np.zeros_like(y)
    for l in irrep.lvals:
        sl = irrep.block_slice(l)
        nl = sl.stop - sl.start
        lm = -l + np.arange(nl)
        wl, vl = _jy_eig(round(2 * l))
        phl = np.exp(-1j * np.outer(phi, lm))
        corel = np.einsum("ab,kb,cb->kac", vl, np.exp(-1j * np.outer(theta, wl)), vl.conj())
        rl = phl[:, :, None] * corel
        out[:, sl, :] = np.einsum("kab,kbc->kac", rl, y[:, sl, :])
    return out
