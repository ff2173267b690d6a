import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as spi

from cliffordtm import clifford as cl
from cliffordtm.exceptions import DomainMismatch, EvaluationSingularity, PoleOutsideDomain
from cliffordtm.kernels import (
    KernelAtom,
    atom_eval,
    cauchy_kernel,
    gram_entry,
    kernel_value,
    kernel_value_fd,
    self_gram_plain,
    szego_eval,
)
from cliffordtm.sphere import build_grid, integrate, sphere_area


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def central(fn, z, d, h=1e-5):
    return (fn(z + h * d) - fn(z - h * d)) / (2 * h)


def dirac_fd(fn, x, m, h=1e-5):
    out = 0.0
    for i in range(m + 1):
        e = np.zeros(m + 1)
        e[i] = 1.0
        ei = np.zeros(1 << m)
        ei[0 if i == 0 else 1 << (i - 1)] = 1
        out = out + cl.gp(ei, central(fn, x, e, h))
    return out


def test_m1_ball_is_classical():
    # S_a(z) = 1 / (1 - conj(a) z) in complex notation
    a = np.array([0.3, -0.4])
    x = np.array([[0.1, 0.5], [-0.6, 0.2]])
    got = szego_eval("ball", a, x)
    z = x[:, 0] + 1j * x[:, 1]
    ref = 1 / (1 - np.conj(a[0] + 1j * a[1]) * z)
    assert np.allclose(got[:, 0] + 1j * got[:, 1], ref)


def test_self_gram_closed_forms():
    a = np.array([0.2, -0.3, 0.4])
    assert self_gram_plain("ball", a) == pytest.approx((1 - a @ a) ** -2)
    assert np.allclose(szego_eval("ball", a, a), [(1 - a @ a) ** -2, 0, 0, 0])
    b = np.array([0.7, 0.1, -2.0])
    assert self_gram_plain("halfspace", b) == pytest.approx(1.4**-2)
    assert np.allclose(szego_eval("halfspace", b, b), [1.4**-2, 0, 0, 0])


@pytest.mark.parametrize("m", [1, 2, 3])
def test_reproducing_by_quadrature(m):
    rng = np.random.default_rng(m)
    for _ in range(3):
        a = rng.normal(size=m + 1)
        a *= rng.uniform(0.1, 0.6) / np.linalg.norm(a)
        b = rng.normal(size=m + 1)
        b *= rng.uniform(0.1, 0.6) / np.linalg.norm(b)
        grid = build_grid(m, 60 if m < 3 else 50)
        Sa = kernel_value("ball", a, grid.nodes)
        Sb = kernel_value("ball", b, grid.nodes)
        quad = integrate(grid, cl.gp(cl.conj(Sa), Sb))
        assert np.allclose(quad, kernel_value("ball", b, a), atol=1e-9)


def test_halfspace_self_gram_by_integration_m1():
    a = np.array([0.6, 0.3])
    val = spi.quad(lambda t: np.sum(szego_eval("halfspace", a, np.array([0.0, t])) ** 2), -np.inf, np.inf)[0]
    assert val / sphere_area(1) == pytest.approx(self_gram_plain("halfspace", a), rel=1e-8)


def test_halfspace_self_gram_by_integration_m2():
    a = np.array([0.5, 0.2, -0.1])

    def integrand(r, phi):
        x = np.array([0.0, a[1] + r * np.cos(phi), a[2] + r * np.sin(phi)])
        return r * np.sum(szego_eval("halfspace", a, x) ** 2)

    val = spi.dblquad(integrand, 0, 2 * np.pi, 0, np.inf, epsabs=1e-12, epsrel=1e-10)[0]
    assert val / sphere_area(2) == pytest.approx(self_gram_plain("halfspace", a), rel=1e-7)


@pytest.mark.parametrize("domain,pole", [("ball", [0.3, -0.2, 0.5]), ("halfspace", [0.8, 0.4, -0.3])])
def test_pole_derivative_matches_fd(domain, pole):
    pole = np.array(pole)
    rng = np.random.default_rng(7)
    x = rng.normal(size=(6, 3)) * 0.3
    if domain == "halfspace":
        x[:, 0] = np.abs(x[:, 0])
    d = unit(rng.normal(size=3))
    ana = kernel_value(domain, pole, x, dy=d)
    fd = central(lambda y: kernel_value(domain, y, x), pole, d)
    assert np.allclose(ana, fd, atol=1e-8)
    e = unit(rng.normal(size=3))
    mixed = kernel_value(domain, pole, x, dy=d, dx=e)
    fd2 = central(lambda y: kernel_value(domain, y, x, dx=e), pole, d)
    assert np.allclose(mixed, fd2, atol=1e-7)
    assert np.allclose(kernel_value_fd(domain, pole, x, dy=d, dx=e), mixed, atol=1e-7)


@pytest.mark.parametrize("domain", ["ball", "halfspace"])
def test_kernel_and_derivative_monogenic(domain):
    a = np.array([0.6, 0.2, -0.1, 0.3]) if domain == "halfspace" else np.array([0.2, 0.2, -0.1, 0.3])
    d = unit([1.0, -1.0, 0.5, 0.2])
    x = np.array([[0.3, 0.1, 0.2, -0.1], [0.2, -0.4, 0.0, 0.3]])
    assert np.abs(dirac_fd(lambda z: kernel_value(domain, a, z), x, 3)).max() < 1e-7
    assert np.abs(dirac_fd(lambda z: kernel_value(domain, a, z, dy=d), x, 3)).max() < 1e-6


def test_derivative_gram_entries_by_quadrature():
    rng = np.random.default_rng(11)
    a = np.array([0.3, 0.1, -0.2])
    b = np.array([-0.1, 0.4, 0.2])
    d1, d2 = unit(rng.normal(size=3)), unit(rng.normal(size=3))
    A = KernelAtom("ball", a, d1)
    B = KernelAtom("ball", b, d2)
    grid = build_grid(2, 60)
    va, vb = atom_eval(A, grid.nodes), atom_eval(B, grid.nodes)
    # <A, B> = integral conj(B) A
    quad = integrate(grid, cl.gp(cl.conj(vb), va))
    assert np.allclose(gram_entry(A, B), quad, atol=1e-9)
    assert np.allclose(gram_entry(A, B, method="richardson"), quad, atol=1e-7)
    plain = KernelAtom("ball", b)
    quad2 = integrate(grid, cl.gp(cl.conj(atom_eval(plain, grid.nodes)), va))
    assert np.allclose(gram_entry(A, plain), quad2, atol=1e-9)


def test_cauchy_kernel():
    x = np.array([[1.0, 2.0, -1.0]])
    r = np.sqrt(6.0)
    assert np.allclose(cauchy_kernel(x), [[1 / r**3, -2 / r**3, 1 / r**3, 0]])
    with pytest.raises(EvaluationSingularity):
        cauchy_kernel(np.zeros((1, 3)))


def test_errors():
    with pytest.raises(PoleOutsideDomain):
        szego_eval("ball", [0.8, 0.6, 0.0], np.zeros((1, 3)))
    with pytest.raises(PoleOutsideDomain):
        szego_eval("halfspace", [0.0, 0.3], np.ones((1, 2)))
    with pytest.raises(ValueError):
        szego_eval("ball", [0.1, 0.0], np.array([[2.0, 0.0]]))
    with pytest.raises(ValueError):
        KernelAtom("ball", [0.1, 0.0], [2.0, 0.0])
    with pytest.raises(DomainMismatch):
        gram_entry(KernelAtom("ball", [0.1, 0.0]), KernelAtom("halfspace", [0.1, 0.0]))
    with pytest.raises(ValueError):
        szego_eval("disk", [0.1, 0.0], np.zeros((1, 2)))


def test_atom_json_round_trip():
    A = KernelAtom("ball", [0.1, 0.2, 0.0], unit([1, 1, 0]))
    assert KernelAtom.from_json(A.to_json()) == A


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_hermitian_symmetry(m, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, m + 1))
    a *= 0.8 * rng.uniform() / np.linalg.norm(a)
    b *= 0.8 * rng.uniform() / np.linalg.norm(b)
    d = unit(rng.normal(size=m + 1))
    A, B = KernelAtom("ball", a, d), KernelAtom("ball", b)
    assert np.allclose(gram_entry(A, B), cl.conj(gram_entry(B, A)), atol=1e-10)
    assert np.allclose(kernel_value("ball", a, b), cl.conj(kernel_value("ball", b, a)))
