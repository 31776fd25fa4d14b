"""Coordinate routes, proper-time delay, Casimir filter, classification."""
import numpy as np
import pytest

from eventloc.density import conjugate_grid, density
from eventloc.kernels import make_poincare_kernel, make_translation_kernel
from eventloc.observables import (
    apply_xi_filter,
    casimir_values,
    classify_kernel,
    grid_gradient,
    mean_coordinates_abc,
    mean_coordinates_moment,
    mean_coordinates_operator,
    proper_time_delay,
)
from eventloc.states import (
    Channel,
    apply_translation,
    gaussian_packet,
    momentum_grid,
    uniform_axis,
)

SHIFT = np.array([0.1, 0.05, -0.07, 0.03])


def scalar_scenario(alpha=0.3, shift=SHIFT):
    kg = momentum_grid(
        [uniform_axis(4.6, 7.4, 16)] + [uniform_axis(-1.35, 1.35, 18) for _ in range(3)]
    )
    psi = gaussian_packet(
        kg,
        center=[6.0, 0, 0, 0],
        width=[0.33, 0.30, 0.30, 0.30],
        channels=(Channel(0, 0, 0),),
        x_shift=shift,
    )
    return psi, make_poincare_kernel("qb_scalar_phase", alpha=alpha)


def test_gradient_matches_analytic_gaussian():
    kg = momentum_grid([uniform_axis(2.0, 10.0, 160)])
    psi = gaussian_packet(kg, center=[6.0], width=[0.6])
    grads = grid_gradient(psi.amplitudes, kg)
    k = kg.nodes[:, 0]
    analytic = psi.amplitudes[0] * (-(k - 6.0) / (2 * 0.6**2))
    interior = (k > 3.0) & (k < 9.0)
    np.testing.assert_allclose(grads[0, 0][interior], analytic[interior], atol=1e-5)


def test_moment_fourier_shift_oracle():
    """d=1, flat kernel: a linear phase moves the density mean to x0 exactly."""
    kg = momentum_grid([uniform_axis(2.0, 10.0, 128)])
    x0 = 0.8371
    psi = gaussian_packet(kg, center=[6.0], width=[0.6], x_shift=[x0])
    fld = density(psi, make_translation_kernel("flat"), conjugate_grid(kg, center=[x0]))
    est = mean_coordinates_moment(fld)
    assert est.diagnostics["status"] == "ok"
    np.testing.assert_allclose(est.real[0], x0, atol=1e-6)


def test_moment_translation_shift_law_d1():
    kg = momentum_grid([uniform_axis(2.0, 10.0, 128)])
    ker = make_translation_kernel("flat")
    psi = gaussian_packet(kg, center=[6.0], width=[0.6], x_shift=[0.4])
    a = np.array([0.35])
    est = mean_coordinates_moment(density(psi, ker, conjugate_grid(kg, center=[0.4])))
    est2 = mean_coordinates_moment(
        density(apply_translation(psi, a), ker, conjugate_grid(kg, center=[0.75]))
    )
    np.testing.assert_allclose(est2.real[0] - est.real[0], a[0], atol=1e-8)


def test_symmetric_density_has_zero_mean():
    kg = momentum_grid([uniform_axis(2.0, 10.0, 128)])
    psi = gaussian_packet(kg, center=[6.0], width=[0.6])
    fld = density(psi, make_translation_kernel("flat"), conjugate_grid(kg))
    est = mean_coordinates_moment(fld)
    np.testing.assert_allclose(est.real, 0.0, atol=1e-10)


def test_three_route_agreement_quasi_baricentric_scalar():
    psi, ker = scalar_scenario()
    fld = density(psi, ker, conjugate_grid(psi.grid))
    m = mean_coordinates_moment(fld)
    abc = mean_coordinates_abc(psi, ker)
    op = mean_coordinates_operator(psi, ker)
    for x, y in ((m, abc), (m, op), (abc, op)):
        assert np.max(np.abs(x.real - y.real)) < 1e-3
    # j = 0: the whole A term vanishes (one-dimensional spin space)
    np.testing.assert_allclose(np.array(abc.diagnostics["A"]), 0.0, atol=1e-15)


def test_general_and_simplified_a_agree():
    psi, ker = scalar_scenario()
    simp = mean_coordinates_abc(psi, ker, use_simplified_a=True)
    gen = mean_coordinates_abc(psi, ker, use_simplified_a=False)
    np.testing.assert_allclose(simp.values, gen.values, atol=1e-12)


def test_abc_rejects_unnormalized_kernel():
    """A strict kernel cannot be normalized once the state carries spin."""
    kg = momentum_grid(
        [uniform_axis(4.6, 7.4, 8)] + [uniform_axis(-1.2, 1.2, 8) for _ in range(3)]
    )
    chans = (Channel(0, 0, 0),) + tuple(Channel(0, 1, m) for m in (-1, 0, 1))
    coeff = np.array([0.7, 0.4, 0.5, 0.3])
    psi = gaussian_packet(kg, center=[6.0, 0, 0, 0], width=[0.33, 0.3, 0.3, 0.3],
                          channels=chans, coefficients=coeff / np.linalg.norm(coeff))
    with pytest.raises(ValueError):
        mean_coordinates_abc(psi, make_poincare_kernel("strict"))


def test_operator_route_rejects_non_quasi_baricentric():
    psi, _ = scalar_scenario()
    with pytest.raises(ValueError):
        mean_coordinates_operator(psi, make_poincare_kernel("neither"))


def test_b_term_vanishes_for_mu_independent_profile():
    psi, _ = scalar_scenario()
    flat = make_poincare_kernel("qb_scalar_flat")
    est = mean_coordinates_abc(psi, flat)
    np.testing.assert_allclose(np.array(est.diagnostics["B"]), 0.0, atol=1e-15)


def test_proper_time_delay_flat_is_zero():
    td = proper_time_delay(make_poincare_kernel("qb_scalar_flat"), np.linspace(4, 8, 9))
    for t in td.matrices.values():
        np.testing.assert_allclose(t, 0.0, atol=1e-15)


def test_proper_time_delay_phase_oracle():
    """Single channel F = exp(i alpha mu): T(mu) = alpha, the phase slope."""
    alpha = 0.45
    td = proper_time_delay(make_poincare_kernel("qb_scalar_phase", alpha=alpha), np.linspace(4, 8, 9))
    np.testing.assert_allclose(td.matrices[0][:, 0, 0], alpha, atol=1e-10)
    assert td.hermiticity_residual() < 1e-8


def test_proper_time_delay_needs_three_nodes():
    with pytest.raises(ValueError):
        proper_time_delay(make_poincare_kernel("qb_scalar_flat"), [4.0, 5.0])


def test_xi_filter_identity_reproduces_origin_density():
    psi, ker = scalar_scenario()
    from eventloc.states import spacetime_grid

    rho0 = apply_xi_filter(psi, ker, lambda arg: np.ones_like(arg))
    origin = spacetime_grid([uniform_axis(0.0, 1.0, 1)] * 4)
    direct = density(psi, ker, origin, certify=False).rho[0]
    np.testing.assert_allclose(rho0, direct, atol=1e-15)


def test_strict_baricentric_annihilation():
    """The trivial sector sits exactly at spectral value 0, so a filter
    vanishing near 0 kills the whole measure."""
    psi, _ = scalar_scenario()
    strict = make_poincare_kernel("strict")
    f = lambda arg: np.where(np.abs(arg) < 1e-6, 0.0, 1.0)
    assert apply_xi_filter(psi, strict, f) < 1e-12


def test_xi_filter_sector_arithmetic():
    """M = 1, c = 0 at j = 1 sits at spectral value 2/mu^2 > 0."""
    kg = momentum_grid(
        [uniform_axis(4.6, 7.4, 10)] + [uniform_axis(-1.2, 1.2, 10) for _ in range(3)]
    )
    chans = (Channel(0, 0, 0),) + tuple(Channel(0, 1, m) for m in (-1, 0, 1))
    coeff = np.array([0.7, 0.4, 0.5, 0.3])
    psi = gaussian_packet(kg, center=[6.0, 0, 0, 0], width=[0.33, 0.3, 0.3, 0.3],
                          channels=chans, coefficients=coeff / np.linalg.norm(coeff))
    ker = make_poincare_kernel("qb_j01", alpha=0.3)
    keep_zero = lambda arg: np.where(np.abs(arg) < 1e-6, 1.0, 0.0)
    all_sectors = apply_xi_filter(psi, ker, lambda arg: np.ones_like(arg))
    j0 = apply_xi_filter(psi, ker, keep_zero)
    j1 = apply_xi_filter(psi, ker, lambda arg: 1.0 - keep_zero(arg))
    np.testing.assert_allclose(j0 + j1, all_sectors, atol=1e-8)
    assert j1 > 0.0


def test_classification_labels():
    assert classify_kernel(make_poincare_kernel("qb_scalar_flat"))["classification"] == "strict_baricentric"
    assert classify_kernel(make_poincare_kernel("qb_j01"))["classification"] == "quasi_baricentric"
    assert classify_kernel(make_poincare_kernel("neither"))["classification"] == "neither"


def test_casimir_eigenvalue_table():
    vals = casimir_values(make_poincare_kernel("qb_j01"))
    by_j = {v.j: v for v in vals}
    np.testing.assert_allclose(by_j[0].c3, 0.0)  # M=0, c=1: 0 + 1 - 1
    np.testing.assert_allclose(by_j[1].c3, 0.0)  # M=1, c=0: 1 + 0 - 1
    np.testing.assert_allclose(by_j[0].c4, 0.0)
    np.testing.assert_allclose(by_j[0].c1(5.0), 25.0)
    np.testing.assert_allclose(by_j[1].c2(5.0), 50.0)
