"""Minkowski-space primitives and SL(2,C) <-> Lorentz kinematics.

Conventions: natural units (hbar = c = 1), metric signature (+,-,-,-),
four-vectors are plain numpy arrays (k^0, k^1, ..., k^{d-1}).  The magnetic
basis for spin-j matrices is m = -j..+j ascending.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

__all__ = [
    "PAULI",
    "minkowski_dot",
    "invariant_mass",
    "is_future_cone",
    "assert_future_cone",
    "lorentz_of_sl2c",
    "wigner_boost",
    "wigner_rotation",
    "angular_momentum_matrices",
    "su2_wigner_matrix",
    "rotation_to_z_axis",
]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# sigma_alpha = (1, sigma^r): maps x^alpha to the Hermitian matrix x^alpha sigma_alpha
_SIGMA4 = np.concatenate([np.eye(2, dtype=complex)[None], PAULI])
# inverse map: x^0 = (1/2) tr X, x^r = (1/2) tr(sigma^r X)

_CONE_GUARD = 1e-10  # reject momenta with mu^2 < guard * (k^0)^2

_METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def minkowski_dot(x, y) -> float:
    """Pseudo-scalar product x^0 y^0 - sum_r x^r y^r."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(x[0] * y[0] - np.dot(x[1:], y[1:]))


def invariant_mass(k) -> float:
    """mu = sqrt(k.k) for a future-cone momentum."""
    m2 = minkowski_dot(k, k)
    if m2 <= 0.0:
        raise ValueError(f"momentum is not time-like: k.k = {m2}")
    return float(np.sqrt(m2))


def is_future_cone(k, guard: float = _CONE_GUARD) -> bool:
    """True if k lies strictly inside the open future cone V.

    The guard rejects momenta too close to the light cone, where the
    Wigner boost diverges.
    """
    k = np.asarray(k, dtype=float)
    if k[0] <= 0.0:
        return False
    if k.shape[0] == 1:
        return True
    m2 = minkowski_dot(k, k)
    return m2 > guard * k[0] ** 2


def assert_future_cone(k, guard: float = _CONE_GUARD) -> None:
    if not is_future_cone(k, guard):
        raise ValueError(f"momentum {np.asarray(k)} is not strictly inside the future cone")


def _check_unimodular(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError("SL(2,C) element must be a 2x2 matrix")
    if abs(np.linalg.det(a) - 1.0) > tol:
        raise ValueError(f"matrix is not unimodular: det = {np.linalg.det(a)}")
    return a


def lorentz_of_sl2c(a) -> np.ndarray:
    """4x4 proper orthochronous Lorentz matrix corresponding to a in SL(2,C).

    Defined through x^alpha sigma_alpha -> a (x^alpha sigma_alpha) a^dagger.
    """
    a = _check_unimodular(a)
    lam = np.empty((4, 4))
    for beta in range(4):
        m = a @ _SIGMA4[beta] @ a.conj().T
        for alpha in range(4):
            lam[alpha, beta] = 0.5 * np.trace(_SIGMA4[alpha] @ m).real
    return lam


def wigner_boost(k) -> np.ndarray:
    """Standard boost a_k in SL(2,C) carrying q(mu) = (mu,0,0,0) to k.

    a_k = (2 mu (mu + k^0))^{-1/2} (mu + k^0 + k^s sigma^s); Hermitian and
    positive definite.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (4,):
        raise ValueError("wigner_boost requires a four-vector")
    assert_future_cone(k)
    mu = invariant_mass(k)
    a = (mu + k[0]) * np.eye(2, dtype=complex) + np.einsum("s,sij->ij", k[1:], PAULI)
    return a / np.sqrt(2.0 * mu * (mu + k[0]))


def wigner_rotation(a, k) -> np.ndarray:
    """SU(2) element u = a_k^{-1} a a_{k'} with k' = Lambda(a^{-1}) k."""
    a = _check_unimodular(a)
    k = np.asarray(k, dtype=float)
    kp = lorentz_of_sl2c(np.linalg.inv(a)) @ k
    ak = wigner_boost(k)
    akp = wigner_boost(kp)
    return np.linalg.inv(ak) @ a @ akp


def angular_momentum_matrices(j) -> np.ndarray:
    """Spin-j angular momentum matrices (J^1, J^2, J^3), basis m = -j..+j."""
    if j < 0 or abs(2 * j - round(2 * j)) > 1e-12:
        raise ValueError(f"spin must be a non-negative (half-)integer, got {j}")
    dim = int(round(2 * j)) + 1
    m = -j + np.arange(dim)
    jz = np.diag(m).astype(complex)
    # J+ |j,m> = sqrt((j-m)(j+m+1)) |j,m+1>
    jp = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        jp[i + 1, i] = np.sqrt((j - m[i]) * (j + m[i] + 1))
    jm = jp.conj().T
    return np.array([(jp + jm) / 2.0, (jp - jm) / 2j, jz])


def _euler_angles_su2(u: np.ndarray) -> tuple[float, float, float]:
    """z-y-z Euler angles with u = exp(-i phi s3/2) exp(-i theta s2/2) exp(-i psi s3/2)."""
    alpha = u[0, 0]
    beta = u[0, 1]
    theta = 2.0 * np.arctan2(abs(beta), abs(alpha))
    # alpha = cos(theta/2) e^{-i(phi+psi)/2}, beta = -sin(theta/2) e^{-i(phi-psi)/2}
    if abs(beta) < 1e-300:
        phi = -2.0 * np.angle(alpha)
        psi = 0.0
    elif abs(alpha) < 1e-300:
        phi = 2.0 * (np.pi - np.angle(beta))
        psi = 0.0
    else:
        s = -np.angle(alpha)          # (phi + psi)/2
        d = np.pi - np.angle(beta)    # (phi - psi)/2
        phi = s + d
        psi = s - d
    return phi, theta, psi


def su2_wigner_matrix(j, u, tol: float = 1e-10) -> np.ndarray:
    """(2j+1)-dimensional unitary representation matrix R^j(u), u in SU(2)."""
    u = _check_unimodular(u, tol=tol)
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > tol:
        raise ValueError("matrix is not unitary")
    if j == 0:
        return np.ones((1, 1), dtype=complex)
    j1, j2, j3 = angular_momentum_matrices(j)
    phi, theta, psi = _euler_angles_su2(u)
    mvals = np.diagonal(j3).real
    left = np.exp(-1j * phi * mvals)
    right = np.exp(-1j * psi * mvals)
    d = expm(-1j * theta * j2)
    return left[:, None] * d * right[None, :]


def rotation_to_z_axis(k) -> np.ndarray:
    """SU(2) rotation r with Lambda(r) carrying the z axis onto the direction of k.

    Used to factor the Wigner boost as a_k = r exp(chi sigma^3/2) r^dagger.
    """
    k = np.asarray(k, dtype=float)
    kv = k[1:]
    kn = np.linalg.norm(kv)
    if kn == 0.0:
        return np.eye(2, dtype=complex)
    theta = np.arccos(np.clip(kv[2] / kn, -1.0, 1.0))
    phi = np.arctan2(kv[1], kv[0])
    rz = np.array([[np.exp(-0.5j * phi), 0], [0, np.exp(0.5j * phi)]])
    ry = np.array(
        [[np.cos(theta / 2), -np.sin(theta / 2)], [np.sin(theta / 2), np.cos(theta / 2)]],
        dtype=complex,
    )
    return rz @ ry
