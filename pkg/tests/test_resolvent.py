import math

import numpy as np
import pytest

from projlab import domain_map as dm
from projlab import galerkin as ga
from projlab import grid as gr
from projlab import lattice
from projlab import resolvent as rv
from projlab.errors import NumericalError, SplittingError

PI = math.pi


def test_sigma_values():
    assert rv.sigma_z(lattice.LatticeMode(1, 1), -1.0) == pytest.approx(2.0 / 3.0)
    assert rv.sigma_z(lattice.LatticeMode(1, 2), 0.0) == pytest.approx(5.0)


def test_sigma_equals_inverse_gap():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m, n = rng.integers(1, 9, size=2)
        z = complex(rng.normal(), rng.normal())
        mode = lattice.LatticeMode(int(m), int(n))
        mu = 1.0 / mode.eigenvalue
        if abs(mu - z) < 1e-3:
            continue
        np.testing.assert_allclose(
            rv.sigma_z(mode, z), 1.0 / (mu - z), rtol=1e-14
        )


def test_sigma_pole_error():
    with pytest.raises(NumericalError):
        rv.sigma_z(lattice.LatticeMode(1, 1), 0.5)


def _window_and_symbol(N=4):
    window = lattice.spectrum_window(lattice.cutoff_ball(N))
    lam_max = window.distinct_values_inside[-1]
    lam_next = window.value_above
    z = 0.5 * (1.0 / lam_max + 1.0 / lam_next)
    return window, rv.build_cutoff(z, window)


def test_cutoff_geometry():
    window, symbol = _window_and_symbol()
    c = symbol.annulus_center
    assert symbol.flat_inner < c - symbol.eps_width
    assert c + symbol.eps_width < symbol.flat_outer
    val, _, _ = symbol.rho(np.asarray([c]))
    assert val[0] == 0.0
    val, _, _ = symbol.rho(np.asarray([0.0, 1e-3, 1e3]))
    assert np.all(val == 1.0)
    dead = np.linspace(c - symbol.eps_width, c + symbol.eps_width, 21)
    assert np.abs(symbol.rho(dead)[0]).max() == 0.0


def test_cutoff_is_one_at_lattice_radii():
    window, symbol = _window_and_symbol()
    max_m = 2 * 13
    radii = sorted(
        {math.sqrt(m * m + n * n) for m in range(1, max_m) for n in range(1, max_m)}
    )
    values = symbol.rho(np.asarray(radii))[0]
    assert np.abs(values - 1.0).max() <= 1e-14


def test_chi_agrees_with_sigma_on_lattice():
    window, symbol = _window_and_symbol()
    for m in range(1, 11):
        for n in range(1, 11):
            mode = lattice.LatticeMode(m, n)
            chi = symbol.chi(np.asarray([float(m)]), np.asarray([float(n)]))[0]
            np.testing.assert_allclose(chi, rv.sigma_z(mode, symbol.z), rtol=1e-14)


def test_rho_is_c2_by_finite_differences():
    _, symbol = _window_and_symbol()
    c, eps = symbol.annulus_center, symbol.eps_width
    bands = np.concatenate(
        [
            np.linspace(symbol.flat_inner + 1e-3, c - eps - 1e-3, 40),
            np.linspace(c + eps + 1e-3, symbol.flat_outer - 1e-3, 40),
        ]
    )
    h = 1e-5
    val_p = symbol.rho(bands + h)[0]
    val_m = symbol.rho(bands - h)[0]
    val_0, d1, d2 = symbol.rho(bands)
    fd1 = (val_p - val_m) / (2 * h)
    fd2 = (val_p - 2 * val_0 + val_m) / h**2
    scale1 = np.abs(d1).max()
    scale2 = np.abs(d2).max()
    assert np.abs(fd1 - d1).max() <= 1e-4 * scale1
    assert np.abs(fd2 - d2).max() <= 1e-4 * scale2


def test_chi_partials_match_finite_differences():
    _, symbol = _window_and_symbol()
    rng = np.random.default_rng(5)
    r = rng.uniform(0.3, 2.5 * symbol.flat_outer, size=60)
    t = rng.uniform(0.05, PI / 2 - 0.05, size=60)
    x, y = r * np.cos(t), r * np.sin(t)
    # keep clear of the piecewise junctions where one-sided C^2 breaks FD
    c, eps = symbol.annulus_center, symbol.eps_width
    junctions = np.asarray(
        [symbol.flat_inner, c - eps, c + eps, symbol.flat_outer]
    )
    keep = np.abs(r[:, None] - junctions[None, :]).min(axis=1) > 1e-3
    x, y = x[keep], y[keep]
    exact = symbol.chi_partials(x, y)
    h = 1e-5
    fd = {
        (1, 0): (symbol.chi(x + h, y) - symbol.chi(x - h, y)) / (2 * h),
        (0, 1): (symbol.chi(x, y + h) - symbol.chi(x, y - h)) / (2 * h),
        (2, 0): (symbol.chi(x + h, y) - 2 * symbol.chi(x, y) + symbol.chi(x - h, y))
        / h**2,
        (0, 2): (symbol.chi(x, y + h) - 2 * symbol.chi(x, y) + symbol.chi(x, y - h))
        / h**2,
        (1, 1): (
            symbol.chi(x + h, y + h)
            - symbol.chi(x + h, y - h)
            - symbol.chi(x - h, y + h)
            + symbol.chi(x - h, y - h)
        )
        / (4 * h**2),
    }
    for key, approx in fd.items():
        scale = max(np.abs(exact[key]).max(), 1e-8)
        assert np.abs(approx - exact[key]).max() <= 2e-4 * scale


def test_mihlin_negative_z_dominated_by_order_zero():
    symbol = rv.plain_symbol(-1.0)
    A = rv.mihlin_constant(symbol)
    assert 0.95 <= A <= 1.0 + 1e-9


def test_mihlin_sample_density_stable():
    _, symbol = _window_and_symbol()
    a1 = rv.mihlin_constant(symbol, n_radial=400)
    a2 = rv.mihlin_constant(symbol, n_radial=800)
    assert abs(a2 - a1) <= 0.05 * a1


def test_mihlin_grows_with_cutoff_radius():
    estimates = []
    for N in (4, 8, 16):
        window, symbol = _window_and_symbol(N)
        estimates.append(rv.mihlin_constant(symbol))
    assert all(np.isfinite(estimates))
    assert all(a <= b for a, b in zip(estimates, estimates[1:]))


def test_apply_resolvent_unperturbed_z0_inverts_T():
    rng = np.random.default_rng(1)
    c = gr.CoeffVector(rng.standard_normal((5, 5)))
    out = rv.apply_resolvent(c, 0.0)
    lam = gr.mode_eigenvalues(5).reshape(5, 5)
    np.testing.assert_allclose(out.coeffs.real, c.coeffs * lam, rtol=1e-12)
    back = ga.apply_T(gr.CoeffVector(out.coeffs.real))
    np.testing.assert_allclose(back.coeffs, c.coeffs, rtol=1e-12)


def test_apply_resolvent_near_eigenvalue_rejected():
    c = gr.CoeffVector.unit(1, 1, 3)
    with pytest.raises(NumericalError):
        rv.apply_resolvent(c, 0.5 + 1e-12)


def _bump_pair(M=8, eps=0.03):
    g = gr.make_grid(2 * M + 8)
    return ga.assemble(dm.family_bump(eps), M, g)


def test_first_resolvent_identity():
    pair = _bump_pair()
    rng = np.random.default_rng(2)
    c = gr.CoeffVector(rng.standard_normal((8, 8)))
    z, w = 0.3 + 0.2j, -0.1 + 0.05j
    for kwargs in ({"pair": None}, {"pair": pair}):
        if kwargs["pair"] is None:
            lhs = rv.apply_resolvent(c, z).coeffs - rv.apply_resolvent(c, w).coeffs
            inner = rv.apply_resolvent(c, w)
            rhs = (z - w) * rv.apply_resolvent(
                gr.CoeffVector(inner.coeffs), z
            ).coeffs
        else:
            lhs = (
                rv.apply_resolvent(c, z, pair).coeffs
                - rv.apply_resolvent(c, w, pair).coeffs
            )
            inner = rv.apply_resolvent(c, w, pair)
            rhs = (z - w) * rv.apply_resolvent(
                gr.CoeffVector(inner.coeffs), z, pair
            ).coeffs
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_resolvent_maps_eigenvectors():
    pair = _bump_pair()
    basis = ga.solve_eigen(pair, 5)
    z = 0.21 + 0.13j
    for j in range(5):
        mu = 1.0 / basis.eigenvalues[j]
        v = gr.CoeffVector(basis.vectors[:, j].reshape(8, 8))
        out = rv.apply_resolvent(v, z, pair)
        np.testing.assert_allclose(out.flat(), v.flat() / (mu - z), atol=1e-7)


def test_contour_single_ground_mode():
    window = lattice.spectrum_window(
        lattice.IndexSet((lattice.LatticeMode(1, 1),), label="ground")
    )
    contour = rv.build_contour(window, nodes=64)
    assert len(contour.circles) == 1
    center, radius = contour.circles[0]
    np.testing.assert_allclose(center, 0.5, atol=1e-14)
    np.testing.assert_allclose(radius, (0.5 - 0.2) / 2.0, atol=1e-14)
    assert contour.clearance > 0


def test_contour_winding_numbers():
    window = lattice.spectrum_window(lattice.cutoff_ball(3))
    contour = rv.build_contour(window, nodes=64)
    for mu in contour.enclosed_mu:
        np.testing.assert_allclose(contour.winding_number(mu), 1.0, atol=1e-10)
    for lam in (10, 13, 17, 25):
        np.testing.assert_allclose(
            contour.winding_number(1.0 / lam), 0.0, atol=1e-10
        )


def test_contour_rejects_escaped_perturbation():
    window = lattice.spectrum_window(lattice.cutoff_ball(3))
    listing = lattice.enumerate_modes(8)
    fake = np.asarray([m.eigenvalue * 1.6 for m in listing[:10]], dtype=float)
    with pytest.raises(SplittingError):
        rv.build_contour(window, perturbed_eigenvalues=fake, nodes=32)


def test_kato_unperturbed_rank_one():
    F = lattice.IndexSet((lattice.LatticeMode(1, 1),), label="ground")
    window = lattice.spectrum_window(F)
    contour = rv.build_contour(window, nodes=64)
    result = rv.kato_projection(contour, M=4)
    oracle = rv.unperturbed_projection_matrix(F, 4)
    assert np.linalg.norm(result.matrix - oracle) <= 1e-10
    assert result.imag_magnitude <= 1e-9


def test_kato_full_spectrum_is_identity():
    M = 4
    values = sorted({m.eigenvalue for m in lattice.enumerate_modes(M)})
    groups = [[1.0 / v] for v in values]
    contour = rv.contour_from_groups(groups, [], nodes_per_circle=64)
    result = rv.kato_projection(contour, M=M)
    assert np.linalg.norm(result.matrix - np.eye(M * M)) <= 1e-8


def test_kato_perturbed_matches_direct_projection():
    pair = _bump_pair(M=8, eps=0.02)
    basis = ga.solve_eigen(pair, 10)
    F = lattice.cutoff_ball(3)
    window = lattice.spectrum_window(F)
    contour = rv.build_contour(window, basis.eigenvalues, nodes=64)
    result = rv.kato_projection(contour, pair=pair)
    oracle = rv.direct_projection_matrix(window.positions, basis, pair)
    assert np.linalg.norm(result.matrix - oracle) <= 1e-8
    assert result.imag_magnitude <= 1e-9


def test_kato_node_doubling_decay():
    pair = _bump_pair(M=6, eps=0.02)
    basis = ga.solve_eigen(pair, 8)
    F = lattice.cutoff_ball(3)
    window = lattice.spectrum_window(F)
    oracle = rv.direct_projection_matrix(window.positions, basis, pair)
    errors = []
    for nodes in (16, 32):
        contour = rv.build_contour(window, basis.eigenvalues, nodes=nodes)
        result = rv.kato_projection(contour, pair=pair)
        errors.append(np.linalg.norm(result.matrix - oracle))
    assert errors[1] <= 0.1 * errors[0]


def test_kato_verify_flag():
    F = lattice.IndexSet((lattice.LatticeMode(1, 1),), label="ground")
    window = lattice.spectrum_window(F)
    good = rv.build_contour(window, nodes=64)
    rv.kato_projection(good, M=3, verify=True)
    sparse = rv.build_contour(window, nodes=6)
    with pytest.raises(NumericalError):
        rv.kato_projection(sparse, M=3, verify=True)
