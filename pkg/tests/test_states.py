"""Grids, packets, group actions, and state persistence."""
import numpy as np
import pytest

from eventloc.states import (
    Channel,
    apply_dilatation,
    apply_lorentz,
    apply_translation,
    bump_family,
    gauss_axis,
    gaussian_packet,
    load_state,
    momentum_grid,
    norm_squared,
    realize_family,
    save_state,
    uniform_axis,
)

RNG = np.random.default_rng(42)


def test_gauss_axis_integrates_polynomials_exactly():
    ax = gauss_axis(0.0, 2.0, 6)
    for p in range(2 * 6 - 1):
        exact = 2.0 ** (p + 1) / (p + 1)
        np.testing.assert_allclose(np.sum(ax.weights * ax.nodes**p), exact, rtol=1e-12)


def test_momentum_grid_rejects_cone_violations():
    with pytest.raises(ValueError):
        momentum_grid([uniform_axis(-1.0, 5.0, 8)])
    with pytest.raises(ValueError):
        momentum_grid([uniform_axis(1.0, 2.0, 4)] + [uniform_axis(-3.0, 3.0, 4)] * 3)


def test_gaussian_packet_norm():
    g = momentum_grid([uniform_axis(2.0, 10.0, 128)])
    psi = gaussian_packet(g, center=[6.0], width=[0.5])
    np.testing.assert_allclose(norm_squared(psi), 1.0, atol=1e-12)


def test_translation_adds_phase_only():
    g = momentum_grid([uniform_axis(2.0, 10.0, 64)])
    psi = gaussian_packet(g, center=[6.0], width=[0.5])
    shifted = apply_translation(psi, [0.7])
    np.testing.assert_allclose(np.abs(shifted.amplitudes), np.abs(psi.amplitudes))
    np.testing.assert_allclose(norm_squared(shifted), 1.0, atol=1e-12)


def test_dilatation_norm_drift_reported():
    g = momentum_grid([uniform_axis(2.0, 12.0, 160)])
    psi = gaussian_packet(g, center=[6.0], width=[0.5])
    res = apply_dilatation(psi, 1.1)
    assert abs(norm_squared(res.state) - 1.0) <= res.norm_drift + 1e-12
    assert res.norm_drift < 1e-2


def test_lorentz_action_d4_unitary_within_drift():
    axes = [uniform_axis(3.5, 8.5, 20)] + [uniform_axis(-2.0, 2.0, 20)] * 3
    g = momentum_grid(axes)
    chans = (Channel(0, 1, -1), Channel(0, 1, 0), Channel(0, 1, 1))
    coeff = np.array([0.5, 0.7, 0.3]) / np.linalg.norm([0.5, 0.7, 0.3])
    psi = gaussian_packet(g, center=[6.0, 0, 0, 0], width=[0.3] * 4, channels=chans, coefficients=coeff)
    chi = 0.03
    boost = np.diag([np.exp(chi / 2), np.exp(-chi / 2)]).astype(complex)
    res = apply_lorentz(psi, boost)
    assert res.norm_drift < 1e-3
    np.testing.assert_allclose(norm_squared(res.state), 1.0, atol=2 * res.norm_drift + 1e-6)


def test_lorentz_rotation_mixes_magnetic_channels():
    axes = [uniform_axis(5.2, 9.2, 12)] + [uniform_axis(-2.8, 2.8, 14)] * 3
    g = momentum_grid(axes)
    chans = (Channel(0, 1, -1), Channel(0, 1, 0), Channel(0, 1, 1))
    psi = gaussian_packet(g, center=[7.0, 0, 0, 0], width=[0.3] * 4, channels=chans,
                          coefficients=np.array([0.0, 0.0, 1.0]))
    theta = 0.4
    rz = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(complex)
    res = apply_lorentz(psi, rz)
    # m = +1 channel picks up exactly the phase exp(-i theta); the envelope is
    # real, so only the phase survives resampling exactly
    live = np.abs(psi.amplitudes[2]) > 1e-2
    phases = np.angle(res.state.amplitudes[2][live])
    np.testing.assert_allclose(phases, -theta, atol=1e-10)
    # the other magnetic channels stay empty under a z rotation
    np.testing.assert_allclose(res.state.amplitudes[0], 0.0, atol=1e-12)
    np.testing.assert_allclose(res.state.amplitudes[1], 0.0, atol=1e-12)


def test_scaled_family_norm_is_scale_invariant():
    fam = bump_family(1, center=4.0, halfwidth=2.0)
    for lam in (1.0, 2.0, 4.0):
        g = momentum_grid([uniform_axis(0.5 * lam, 8.0 * lam, 256)])
        psi = realize_family(fam, lam, g)
        np.testing.assert_allclose(norm_squared(psi), 1.0, atol=1e-6)


def test_realize_family_rejects_small_grid():
    fam = bump_family(1, center=4.0, halfwidth=2.0)
    g = momentum_grid([uniform_axis(1.0, 5.0, 32)])
    with pytest.raises(ValueError):
        realize_family(fam, 4.0, g)


def test_state_roundtrip(tmp_path):
    axes = [uniform_axis(4.0, 8.0, 6)] + [uniform_axis(-1.0, 1.0, 5)] * 3
    g = momentum_grid(axes)
    chans = (Channel(0, 0, 0),)
    psi = gaussian_packet(g, center=[6.0, 0, 0, 0], width=[0.4] * 4, channels=chans,
                          x_shift=[0.1, 0.0, 0.2, -0.1])
    path = tmp_path / "state.json"
    save_state(psi, path)
    back = load_state(path)
    assert back.channels == psi.channels
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes)
    np.testing.assert_allclose(back.grid.nodes, psi.grid.nodes)
