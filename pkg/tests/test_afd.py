import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cliffordtm import clifford as cl
from cliffordtm.afd import (
    AdaptiveFourierDecomposition,
    AfdState,
    HalfSpaceSearchGrid,
    SearchCache,
    SearchGrid,
    afd_run,
    afd_step,
    derivative_energies,
    msp_search,
    plain_energies,
    polar_to_cartesian,
    reconstruct,
    reorder_projection_check,
    residual_function,
    term_energy,
)
from cliffordtm.exceptions import ConfigError
from cliffordtm.hardy import AtomCombo, BoundaryBacked
from cliffordtm.kernels import KernelAtom, kernel_value
from cliffordtm.sphere import build_grid
from cliffordtm.tm import TMSystem
from cliffordtm.verify import random_ball_points, random_h2_function, random_unit_coeffs


def combo(rng, m, n=3, r=0.6):
    return AtomCombo.from_poles("ball", random_ball_points(rng, n, m, r), random_unit_coeffs(rng, n, m))


# -- single-step formulas ---------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_first_energy_closed_form(m):
    rng = np.random.default_rng(m)
    f = combo(rng, m)
    state = AfdState.initial(f)
    for a in random_ball_points(rng, 5, m, 0.9):
        fa = f.value(a)
        expected = float(fa @ fa) * (1 - a @ a) ** m
        assert term_energy(state, a, f) == pytest.approx(expected, rel=1e-10)
        assert plain_energies(state, f, a[None])[0] == pytest.approx(expected, rel=1e-10)


def test_energy_of_own_kernel_is_full_norm():
    b = np.array([0.3, -0.2, 0.4])
    f = AtomCombo.from_poles("ball", [b], [cl.unit(2)])
    assert f.norm_sq == pytest.approx((1 - b @ b) ** -2)
    assert term_energy(AfdState.initial(f), b, f) == pytest.approx(f.norm_sq, rel=1e-12)


def test_boundary_vanishing():
    f = combo(np.random.default_rng(5), 2)
    state = AfdState.initial(f)
    dirs = random_ball_points(np.random.default_rng(6), 50, 2, 1.0)
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    for r in (0.99, 0.999, 0.9999):
        e = plain_energies(state, f, r * dirs)
        assert e.max() < 40 * (1 - r * r) ** 2 * f.norm_sq


def test_search_returns_grid_pole_exactly():
    grid = SearchGrid(2)
    b = grid.points()[417]
    f = AtomCombo.from_poles("ball", [b], [[0.5, -1.0, 0.2, 0.3]])
    sel = msp_search(AfdState.initial(f), f, grid)
    assert np.array_equal(sel.atom.pole, b)
    assert sel.grid_index == 417
    assert sel.energy == pytest.approx(f.norm_sq, rel=1e-12)


def test_first_pole_at_origin_gives_value_at_origin():
    f = combo(np.random.default_rng(7), 2)
    state = afd_run(f, 1, first_pole=np.zeros(3))
    assert np.allclose(state.coefficients[0], f.value(np.zeros(3)), atol=1e-12)


def test_single_normalized_kernel_recovered_in_one_step():
    grid = SearchGrid(2)
    b = grid.points()[200]
    c = np.array([0.3, 0.1, -0.7, 0.2])
    f = AtomCombo.from_poles("ball", [b], [c], normalized=True)
    state = afd_run(f, 5, grid=grid)
    assert state.n_steps == 1
    assert state.residual_energy < 1e-12 * f.norm_sq
    assert np.allclose(state.coefficients[0], c, atol=1e-10)


# -- runs -------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_exact_recovery_selects_generating_poles(seed):
    grid = SearchGrid(2, refine_rounds=0)
    rng = np.random.default_rng(seed)
    r09 = np.flatnonzero(np.isclose(grid.params[:, 0], 0.9))
    idx = rng.choice(r09, 3, replace=False)
    while np.min([np.linalg.norm(grid.points()[i] - grid.points()[j]) for i in idx for j in idx if i != j]) < 0.5:
        idx = rng.choice(r09, 3, replace=False)
    poles = grid.points()[idx]
    f = AtomCombo.from_poles("ball", poles, random_unit_coeffs(rng, 3, 2))
    state = afd_run(f, 10, 1e-12, grid)
    assert state.residual_energy < 1e-10 * f.norm_sq
    assert all(any(np.allclose(p, q) for q in poles) for p in state.poles)
    assert np.abs(state.residual_at(f, random_ball_points(rng, 10, 2, 0.8))).max() < 1e-6


def test_reconstruction_of_kernel():
    b = np.array([0.2, 0.3, -0.1])
    f = AtomCombo.from_poles("ball", [b], [cl.unit(2)])
    state = afd_run(f, 1, first_pole=b)
    x = random_ball_points(np.random.default_rng(8), 20, 2, 0.95)
    assert np.abs(reconstruct(state, x) - kernel_value("ball", b, x)).max() < 1e-9


def test_zero_steps():
    f = combo(np.random.default_rng(9), 2)
    state = afd_run(f, 0)
    assert state.n_steps == 0
    assert state.residual_energy == pytest.approx(f.norm_sq)
    assert np.all(reconstruct(state, np.zeros((2, 3))) == 0)
    with pytest.raises(ValueError):
        afd_run(f, -1)


def test_bookkeeping_matches_explicit_residual():
    f, _ = random_h2_function(np.random.default_rng(10), 2, 6)
    state = afd_run(f, 8, 0.0, SearchGrid(2, radial_step=0.1))
    explicit = residual_function(state, f).norm_sq
    assert explicit == pytest.approx(state.residual_energy, abs=1e-10 * f.norm_sq)
    assert np.all(np.diff(state.residual_energies) <= 1e-12)


def test_cache_agrees_with_gram_route():
    f, _ = random_h2_function(np.random.default_rng(11), 2, 5)
    grid = SearchGrid(2, radial_step=0.1)
    cache = SearchCache(f, grid)
    state = AfdState.initial(f)
    for _ in range(3):
        state = afd_step(state, f, grid, cache)
    e = cache.energies(state)
    pts = grid.points()
    for k in np.random.default_rng(12).choice(len(grid), 25, replace=False):
        if e[k] == 0.0:
            continue
        assert e[k] == pytest.approx(term_energy(state, pts[k], f), rel=1e-8, abs=1e-13)


def test_derivative_energy_agrees_with_gram_route():
    f, _ = random_h2_function(np.random.default_rng(13), 2, 5)
    b = np.array([0.1, 0.4, -0.3])
    state = afd_step(AfdState.initial(f), f, atom=KernelAtom("ball", b))
    W = np.array([[1.0, 0, 0], [0, 0.6, 0.8]])
    de = derivative_energies(state, f, b, W)
    for w, e in zip(W, de):
        assert e == pytest.approx(term_energy(state, b, f, w), rel=1e-9)


def test_reordering_invariance():
    rng = np.random.default_rng(14)
    f, _ = random_h2_function(rng, 2, 5)
    poles = random_ball_points(rng, 6, 2, 0.8)
    assert reorder_projection_check(poles, f) < 1e-9
    assert reorder_projection_check(poles, f, rng=3) < 1e-9


def complex_tm_last(chosen, cand, z):
    pref = np.ones_like(z)
    for a in chosen:
        pref = pref * (z - a) / (1 - np.conj(a) * z)
    return np.sqrt(1 - np.abs(cand) ** 2)[:, None] / (1 - np.conj(cand)[:, None] * z[None]) * pref[None]


def test_m1_matches_complex_reference():
    # classical complex AFD on the same grid, inner products by circle quadrature
    rng = np.random.default_rng(15)
    f, _ = random_h2_function(rng, 1, 6, 0.8)
    grid = SearchGrid(1, refine_rounds=0)
    state = afd_run(f, 5, 0.0, grid)
    th = 2 * np.pi * np.arange(2048) / 2048
    z = np.exp(1j * th)
    fv = f.value(np.stack([z.real, z.imag], axis=1))
    fz = fv[:, 0] + 1j * fv[:, 1]
    cand = grid.points() @ np.array([1, 1j])
    chosen = []
    energies = []
    for _ in range(5):
        B = complex_tm_last(chosen, cand, z)
        en = np.abs(np.mean(fz[None] * np.conj(B), axis=1)) ** 2
        k = int(np.argmax(en))
        chosen.append(cand[k])
        energies.append(en[k])
    assert np.allclose(state.poles @ np.array([1, 1j]), chosen, atol=1e-12)
    assert np.allclose(state.term_energies, energies, rtol=1e-8)


def test_boundary_backed_input():
    grid = build_grid(1, 80)
    b = np.array([0.3, -0.4])
    samples = kernel_value("ball", b, grid.nodes)
    f = BoundaryBacked(grid, samples)
    assert f.norm_sq == pytest.approx((1 - b @ b) ** -1, rel=1e-10)
    assert np.allclose(f.value(np.array([0.1, 0.2])), kernel_value("ball", b, np.array([0.1, 0.2])), atol=1e-10)
    state = afd_run(f, 2, 1e-10, SearchGrid(1), first_pole=b)
    assert state.residual_energy < 1e-9 * f.norm_sq


def test_halfspace_smoke():
    b = np.array([0.5, 0.3])
    f = AtomCombo.from_poles("halfspace", [b, [1.2, -0.5]], [[1.0, 0.0], [0.0, 0.5]])
    state = afd_run(f, 6, 0.0, HalfSpaceSearchGrid(1))
    assert np.all(np.diff(state.residual_energies) <= 1e-12)
    assert state.residual_energy < 0.05 * f.norm_sq


# -- estimator -------------------------------------------------------------


def test_estimator_api():
    f = combo(np.random.default_rng(16), 2)
    est = AdaptiveFourierDecomposition(n_max=4, radial_step=0.1)
    assert est.get_params()["n_max"] == 4
    with pytest.raises(NotFittedError):
        est.predict(np.zeros((1, 3)))
    c = clone(est)
    assert c.get_params() == est.get_params()
    est.fit(f)
    assert est.n_steps_ == 4
    assert est.poles_.shape == (4, 3)
    x = random_ball_points(np.random.default_rng(17), 5, 2, 0.5)
    assert est.predict(x).shape == (5, 4)
    assert 0.0 < est.score(f) <= 1.0
    with pytest.raises(ValueError):
        est.predict(np.zeros((1, 4)))
    with pytest.raises(ConfigError):
        AdaptiveFourierDecomposition(n_max=-1).fit(f)
    with pytest.raises(TypeError):
        est.fit(np.zeros(3))


def test_grid_layout():
    grid = SearchGrid(2)
    assert np.array_equal(grid.params[0], np.zeros(3))
    assert len(grid) == 1 + 19 * 24 * 24
    assert np.all(np.linalg.norm(grid.points(), axis=1) <= 0.95 + 1e-12)
    with pytest.raises(ConfigError):
        SearchGrid(2, r_max=1.0)
    p = polar_to_cartesian(np.array([[0.5, np.pi / 2, 0.0]]))
    assert np.allclose(np.linalg.norm(p), 0.5)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_bessel_and_monotone(m, seed):
    rng = np.random.default_rng(seed)
    f, _ = random_h2_function(rng, m, 4)
    state = afd_run(f, 4, 0.0, SearchGrid(m, radial_step=0.15, n_angular=8, refine_rounds=1))
    assert np.all(state.term_energies >= 0)
    assert state.term_energies.sum() <= f.norm_sq * (1 + 1e-10)
    assert np.all(np.diff(state.residual_energies) <= 1e-12 * f.norm_sq)
