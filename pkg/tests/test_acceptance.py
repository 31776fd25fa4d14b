"""Acceptance criteria: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned; do not loosen them to make a failing criterion green.
"""
import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from eventloc.cli import bundled_scenario, main
from eventloc.definiteness import definiteness_probe
from eventloc.density import conjugate_grid, density, quasi_baricentric_density
from eventloc.irreps import IrrepLabel, build_generators
from eventloc.kernels import (
    certify_kernel,
    make_poincare_kernel,
    make_translation_kernel,
    poincare_catalog,
    translation_catalog,
)
from eventloc.minkowski import lorentz_of_sl2c, wigner_boost
from eventloc.observables import (
    apply_xi_filter,
    mean_coordinates_abc,
    mean_coordinates_moment,
    mean_coordinates_operator,
    proper_time_delay,
)
from eventloc.states import (
    Channel,
    apply_translation,
    bump_family,
    gaussian_packet,
    momentum_grid,
    norm_squared,
    uniform_axis,
)

RNG = np.random.default_rng(2024)


def _report(number, description, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:2d} [{status}] {description} ({detail})")
    assert ok, f"criterion {number}: {description} ({detail})"


def packet_1d(shift=None, n=128):
    kg = momentum_grid([uniform_axis(2.0, 10.0, n)])
    return gaussian_packet(kg, center=[6.0], width=[0.6], x_shift=shift)


def scalar_packet_4d(kg=None, shift=None):
    if kg is None:
        kg = momentum_grid(
            [uniform_axis(4.6, 7.4, 16)] + [uniform_axis(-1.35, 1.35, 18) for _ in range(3)]
        )
    return gaussian_packet(
        kg,
        center=[6.0, 0, 0, 0],
        width=[0.33, 0.30, 0.30, 0.30],
        channels=(Channel(0, 0, 0),),
        x_shift=shift,
    )


def mixed_spin_packet_4d():
    kg = momentum_grid(
        [uniform_axis(4.6, 7.4, 12)] + [uniform_axis(-1.3, 1.3, 10) for _ in range(3)]
    )
    chans = (Channel(0, 0, 0),) + tuple(Channel(0, 1, m) for m in (-1, 0, 1))
    coeff = np.array([0.6, 0.4, 0.5, 0.3])
    return gaussian_packet(
        kg,
        center=[6.0, 0, 0, 0],
        width=[0.35, 0.3, 0.3, 0.3],
        channels=chans,
        coefficients=coeff / np.linalg.norm(coeff),
    )


def test_criterion_1_kinematics():
    t0 = time.perf_counter()
    worst_boost = 0.0
    for _ in range(100):
        kv = RNG.uniform(-2.0, 2.0, size=3)
        k = np.array([np.linalg.norm(kv) + RNG.uniform(0.5, 3.0), *kv])
        mu = np.sqrt(k[0] ** 2 - kv @ kv)
        lam = lorentz_of_sl2c(wigner_boost(k))
        worst_boost = max(worst_boost, float(np.max(np.abs(lam @ [mu, 0, 0, 0] - k))))
    worst_hom = 0.0
    for _ in range(100):
        x = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
        a = np.eye(2) + 0.4 * x
        a = a / np.sqrt(np.linalg.det(a))
        y = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
        b = np.eye(2) + 0.4 * y
        b = b / np.sqrt(np.linalg.det(b))
        err = np.max(np.abs(lorentz_of_sl2c(a @ b) - lorentz_of_sl2c(a) @ lorentz_of_sl2c(b)))
        worst_hom = max(worst_hom, float(err))
    dt = time.perf_counter() - t0
    ok = worst_boost < 1e-12 and worst_hom < 1e-12 and dt < 1.0
    _report(1, "boost kinematics and homomorphism",
            ok, f"boost {worst_boost:.2e}, hom {worst_hom:.2e}, {dt:.2f}s")


def test_criterion_2_irrep_certification():
    t0 = time.perf_counter()
    worst = 0.0
    for label in (IrrepLabel(0, 1.0), IrrepLabel(1, 0.0), IrrepLabel(0, 2j)):
        rep = build_generators(label, 6)
        residuals = rep.certify()
        worst = max(worst, max(residuals.values()))
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and dt < 5.0
    _report(2, "irrep algebra and Casimir certification at j_max=6",
            ok, f"worst residual {worst:.2e}, {dt:.2f}s")


def test_criterion_3_translation_covariance():
    t0 = time.perf_counter()
    # d=1: grid-commensurate shift equals an index roll of the density
    psi = packet_1d()
    ker = make_translation_kernel("flat")
    xg = conjugate_grid(psi.grid)
    rho = density(psi, ker, xg).rho
    m = 5
    a = m * xg.axes[0].spacing
    rho2 = density(apply_translation(psi, [a]), ker, xg).rho
    err1 = float(np.max(np.abs(rho2 - np.roll(rho, m))))
    dt1 = time.perf_counter() - t0

    # d=4: interpolated off-grid shift of the scalar sector density
    from scipy.interpolate import RegularGridInterpolator

    t0 = time.perf_counter()
    kg = momentum_grid(
        [uniform_axis(4.6, 7.4, 12)] + [uniform_axis(-1.3, 1.3, 12) for _ in range(3)]
    )
    psi4 = scalar_packet_4d(kg)
    ker4 = make_poincare_kernel("qb_scalar_flat")
    from eventloc.states import spacetime_grid

    axes = [uniform_axis(-5.5, 5.5, 28) for _ in range(4)]
    xg4 = spacetime_grid(axes)
    fld = density(psi4, ker4, xg4)
    shift = np.array([0.17, -0.11, 0.08, 0.13])  # incommensurate with the grid
    fld2 = density(apply_translation(psi4, shift), ker4, xg4)
    interp = RegularGridInterpolator(
        [ax.nodes for ax in axes],
        fld.rho.reshape(xg4.shape),
        method="cubic",
        bounds_error=False,
        fill_value=np.nan,
    )
    sample = RNG.choice(xg4.size, size=40_000, replace=False)
    expected = interp(xg4.nodes[sample] - shift)
    live = ~np.isnan(expected)
    err4 = float(np.max(np.abs(fld2.rho[sample][live] - expected[live])))
    dt4 = time.perf_counter() - t0
    ok = err1 < 1e-8 and dt1 < 30.0 and err4 < 1e-3 and dt4 < 300.0
    _report(3, "translation covariance of the density",
            ok, f"d=1 {err1:.2e} in {dt1:.1f}s, d=4 {err4:.2e} in {dt4:.1f}s")


def test_criterion_4_boundedness_and_normalization():
    details = []
    ok = True
    kg1 = momentum_grid([uniform_axis(2.0, 10.0, 128)])
    for name in translation_catalog():
        ker = make_translation_kernel(name)
        psi1 = gaussian_packet(
            kg1,
            center=[6.0],
            width=[0.6],
            channels=tuple(Channel(s) for s in range(ker.n_sigma)),
        )
        cert = certify_kernel(ker, grid=kg1)
        if not cert.contraction_ok:
            with pytest.raises(ValueError):
                density(psi1, ker, conjugate_grid(kg1))
            details.append(f"{name}: rejected")
            continue
        fld = density(psi1, ker, conjugate_grid(kg1))
        bounded = fld.total() <= norm_squared(psi1) + 1e-6
        ok &= bounded
        if cert.isometric and fld.capture_fraction() >= 0.999:
            norm_err = abs(fld.total() - norm_squared(psi1))
            ok &= norm_err < 1e-4
            details.append(f"{name}: norm err {norm_err:.1e}")
        else:
            details.append(f"{name}: bounded")
    psi0 = scalar_packet_4d()
    psim = mixed_spin_packet_4d()
    for name in poincare_catalog():
        ker = make_poincare_kernel(name)
        psi = psim if 1 in ker.active_spins() else psi0
        cert = certify_kernel(ker, grid=psi.grid, spins=psi.spins())
        fld = density(psi, ker, conjugate_grid(psi.grid), certify=False)
        bounded = fld.total() <= norm_squared(psi) + 1e-6
        ok &= bounded
        if cert.isometric and fld.capture_fraction() >= 0.999:
            norm_err = abs(fld.total() - norm_squared(psi))
            ok &= norm_err < 1e-4
            details.append(f"{name}: norm err {norm_err:.1e}")
        else:
            details.append(f"{name}: bounded")
    _report(4, "density boundedness and normalization over the catalog",
            ok, "; ".join(details))


def test_criterion_5_fourier_oracle():
    psi = packet_1d(shift=[0.4])
    kg = psi.grid
    xg = conjugate_grid(kg, center=[0.4])
    rho = density(psi, make_translation_kernel("flat"), xg).rho
    ax = kg.axes[0]
    x0 = xg.axes[0].nodes[0]
    tilde = ax.spacing / np.sqrt(2 * np.pi) * np.exp(
        -1j * ax.nodes[0] * (xg.axes[0].nodes - x0)
    ) * np.fft.fft(psi.amplitudes[0] * np.exp(-1j * ax.nodes * x0))
    err = float(np.max(np.abs(rho - np.abs(tilde) ** 2)))
    _report(5, "d=1 flat-kernel density matches the FFT oracle", err < 1e-8, f"sup {err:.2e}")


def test_criterion_6_three_route_agreement():
    shift = np.array([0.1, 0.05, -0.07, 0.03])
    psi = scalar_packet_4d(shift=shift)
    ker = make_poincare_kernel("qb_scalar_phase", alpha=0.3)
    fld = density(psi, ker, conjugate_grid(psi.grid))
    m = mean_coordinates_moment(fld)
    abc = mean_coordinates_abc(psi, ker)
    op = mean_coordinates_operator(psi, ker)
    worst = max(
        float(np.max(np.abs(x.real - y.real)))
        for x, y in ((m, abc), (m, op), (abc, op))
    )
    # d=1 shift law on exact moments
    psi1 = packet_1d(shift=[0.4])
    ker1 = make_translation_kernel("flat")
    base = mean_coordinates_moment(
        density(psi1, ker1, conjugate_grid(psi1.grid, center=[0.4]))
    ).real[0]
    moved = mean_coordinates_moment(
        density(apply_translation(psi1, [0.35]), ker1, conjugate_grid(psi1.grid, center=[0.75]))
    ).real[0]
    shift_err = abs(moved - base - 0.35)
    ok = worst < 1e-3 and shift_err < 1e-8
    _report(6, "three-route coordinate agreement and shift law",
            ok, f"pairwise {worst:.2e}, shift law {shift_err:.2e}")


def test_criterion_7_b_term_vanishing():
    psi = scalar_packet_4d()
    flat = make_poincare_kernel("qb_scalar_flat")
    b = np.max(np.abs(np.array(mean_coordinates_abc(psi, flat).diagnostics["B"])))
    td = proper_time_delay(flat, np.linspace(4.0, 8.0, 9))
    t = max(float(np.max(np.abs(m))) for m in td.matrices.values())
    ok = b == 0.0 and t == 0.0
    _report(7, "B term and proper-time delay vanish for mu-independent F",
            ok, f"B {b:.1e}, T {t:.1e}")


def test_criterion_8_strict_annihilation_and_additivity():
    psi = scalar_packet_4d()
    strict = make_poincare_kernel("strict")
    killed = apply_xi_filter(psi, strict, lambda arg: np.where(np.abs(arg) < 1e-6, 0.0, 1.0))
    psim = mixed_spin_packet_4d()
    ker = make_poincare_kernel("qb_j01", alpha=0.3)
    xg = conjugate_grid(psim.grid)
    full = density(psim, ker, xg)
    split = quasi_baricentric_density(psim, ker, xg)
    add_err = float(np.max(np.abs(full.rho - split.rho)))
    ok = killed < 1e-12 and add_err < 1e-8
    _report(8, "strict-baricentric annihilation and cross-spin additivity",
            ok, f"filtered rho(0) {killed:.1e}, additivity {add_err:.1e}")


def test_criterion_9_definiteness_scaling():
    t0 = time.perf_counter()
    fam = bump_family(1, center=4.0, halfwidth=2.0)
    flat = make_translation_kernel("flat")
    base = definiteness_probe(flat, fam, region=[1.0], lambdas=(1, 2, 4), n_per_axis=96)
    region = [float(base.widths[0][0])]  # one base-width wide
    rep = definiteness_probe(flat, fam, region=region, lambdas=(1, 2, 4, 8, 16), n_per_axis=96)
    chirp = make_translation_kernel("chirp", beta=1.0)
    bad = definiteness_probe(chirp, fam, region=region, lambdas=(1, 2, 4, 8, 16), n_per_axis=96)
    dt = time.perf_counter() - t0
    nondecreasing = bool(np.all(np.diff(rep.probabilities) >= -1e-3))
    ok = (
        nondecreasing
        and rep.probabilities[-1] > 0.99
        and abs(rep.width_exponent - 1.0) < 0.1
        and not bad.passed()
        and dt < 60.0
    )
    _report(9, "definiteness scaling and chirp counterexample", ok,
            f"P16 {rep.probabilities[-1]:.4f}, p {rep.width_exponent:.3f}, "
            f"chirp P16 {bad.probabilities[-1]:.3f}, {dt:.1f}s")


def test_criterion_10_reproducibility(tmp_path):
    hashes = {}
    runner = CliRunner()
    for name in ("toa1d_flat", "qb4d_j0"):
        pair = []
        for i in (1, 2):
            out = tmp_path / f"{name}_{i}"
            res = runner.invoke(
                main, ["run", "--config", str(bundled_scenario(name)), "--out", str(out)]
            )
            assert res.exit_code == 0, res.output
            pair.append(json.loads((out / "report.json").read_text())["hash"])
        hashes[name] = pair
    ok = all(a == b for a, b in hashes.values())
    detail = ", ".join(f"{k} {v[0][:12]}" for k, v in hashes.items())
    _report(10, "byte-identical hashed report sections on bundled scenarios", ok, detail)
