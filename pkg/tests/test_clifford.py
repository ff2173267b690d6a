import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cliffordtm import clifford as cl
from cliffordtm.clifford import Multivector
from cliffordtm.exceptions import NotInvertible, UnsupportedDimension


def brute_blade_product(a, b, m):
    """Multiply blades by writing out generator words and bubble sorting them."""
    word = [i for i in range(1, m + 1) if a >> (i - 1) & 1] + [i for i in range(1, m + 1) if b >> (i - 1) & 1]
    sign = 1
    changed = True
    while changed:
        changed = False
        for k in range(len(word) - 1):
            if word[k] > word[k + 1]:
                word[k], word[k + 1] = word[k + 1], word[k]
                sign = -sign
                changed = True
    out = []
    k = 0
    while k < len(word):
        if k + 1 < len(word) and word[k] == word[k + 1]:
            sign = -sign  # e_i e_i = -1
            k += 2
        else:
            out.append(word[k])
            k += 1
    mask = sum(1 << (i - 1) for i in out)
    return sign, mask


@pytest.mark.parametrize("a,b,expected", [(0b01, 0b10, (1, 0b11)), (0b01, 0b01, (-1, 0)), (0b11, 0b01, (1, 0b10))])
def test_blade_product_examples(a, b, expected):
    assert cl.blade_product(a, b) == expected


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_blade_product_matches_word_reduction(m):
    for a, b in itertools.product(range(1 << m), repeat=2):
        assert cl.blade_product(a, b) == brute_blade_product(a, b, m)


def test_sign_table_values():
    S = cl.sign_table(2)
    assert S.shape == (4, 4)
    assert set(np.unique(S)) <= {-1, 1}


def test_paravector_products():
    e1 = Multivector.basis(2, 1)
    e2 = Multivector.basis(2, 2)
    got = (e1 + e2) * (e1 - e2)
    assert got == Multivector.basis(2, 1, 2) * -2


def test_pseudoscalar_square_m3():
    e123 = Multivector.basis(3, 1, 2, 3)
    assert e123 * e123 == Multivector.scalar(3)


def test_a1_is_complex():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = rng.normal(size=2), rng.normal(size=2)
        prod = cl.gp(x, y)
        z = complex(*x) * complex(*y)
        assert np.allclose(prod, [z.real, z.imag])
    L = cl.left_matrix(np.array([1.0, 2.0]))
    assert np.array_equal(L, [[1.0, -2.0], [2.0, 1.0]])


def test_matrix_layers_agree():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 8))
    assert np.allclose(cl.left_matrix(x) @ y, cl.gp(x, y))
    assert np.allclose(cl.right_matrix(y) @ x, cl.gp(x, y))


def test_conj_signs():
    # grades 0..3 carry + - - +
    c = cl.conj(np.ones(8))
    grades = [bin(k).count("1") for k in range(8)]
    assert all(c[k] == [1, -1, -1, 1][grades[k]] for k in range(8))


def test_fraction_exact_arithmetic():
    a = Multivector(2, [Fraction(1, 3), Fraction(0), Fraction(1, 2), Fraction(0)])
    b = a * a
    assert all(isinstance(v, Fraction) for v in b.coeffs)
    assert b.coeffs[0] == Fraction(1, 9) - Fraction(1, 4)


def test_inverse_examples():
    a = Multivector.scalar(2) + Multivector.basis(2, 1, 2)
    inv = cl.try_inverse(a)
    assert np.allclose(inv.coeffs, [0.5, 0, 0, -0.5])
    with pytest.raises(NotInvertible):
        cl.try_inverse(Multivector.scalar(3) + Multivector.basis(3, 1, 2, 3))
    with pytest.raises(NotInvertible):
        cl.try_inverse(Multivector(2))


def test_paravector_inverse_closed_form():
    x = Multivector.paravector([0.3, -1.2, 0.7, 2.0])
    expected = x.conj() / float(np.sum(np.array([0.3, -1.2, 0.7, 2.0]) ** 2))
    assert np.allclose(cl.try_inverse(x).coeffs, expected.coeffs, atol=1e-14)


def test_unsupported_dimension():
    with pytest.raises(UnsupportedDimension):
        Multivector(7)
    with pytest.raises(UnsupportedDimension):
        Multivector(0)


def test_json_round_trip():
    a = Multivector(3, np.arange(8) * 0.25)
    assert Multivector.from_json(a.to_json()) == a


def test_parts_and_norm():
    a = Multivector(2, [1.0, 2.0, -2.0, 4.0])
    sc, nsc, size = a.parts()
    assert sc == 1.0
    assert np.array_equal(nsc.coeffs, [0.0, 2.0, -2.0, 4.0])
    assert size == pytest.approx(5.0)
    assert a.is_paravector() is False
    assert Multivector.paravector([1, 2, 3]).is_paravector()


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def triples(draw):
    m = draw(st.integers(1, 5))
    arr = arrays(np.float64, (3, 1 << m), elements=finite)
    return draw(arr)


@settings(max_examples=200, deadline=None)
@given(triples())
def test_associativity_and_distributivity(xyz):
    x, y, z = xyz
    scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z))
    assert np.linalg.norm(cl.gp(cl.gp(x, y), z) - cl.gp(x, cl.gp(y, z))) <= 1e-11 * scale
    assert np.allclose(cl.gp(x, y + z), cl.gp(x, y) + cl.gp(x, z), atol=1e-10 * scale)


@settings(max_examples=200, deadline=None)
@given(triples())
def test_conj_antihomomorphism_and_norm_bound(xyz):
    x, y, _ = xyz
    m = cl.dim_from_size(x.shape[0])
    lhs = cl.conj(cl.gp(x, y))
    rhs = cl.gp(cl.conj(y), cl.conj(x))
    assert np.allclose(lhs, rhs, atol=1e-12 * max(1.0, np.linalg.norm(x) * np.linalg.norm(y)))
    assert cl.norm(cl.gp(x, y)) <= 2 ** (m / 2) * cl.norm(x) * cl.norm(y) * (1 + 1e-12) + 1e-300


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.data())
def test_paravector_norm_multiplicative(m, data):
    p = data.draw(arrays(np.float64, (m + 1,), elements=finite))
    x = data.draw(arrays(np.float64, (1 << m,), elements=finite))
    P = cl.paravector_array(p)
    assert cl.norm(cl.gp(P, x)) == pytest.approx(np.linalg.norm(p) * cl.norm(x), rel=1e-12, abs=1e-12)


def test_conj_exact_on_blades():
    for m in range(1, 6):
        eye = np.eye(1 << m)
        for a, b in itertools.product(range(1 << m), repeat=2):
            assert np.array_equal(cl.conj(cl.gp(eye[a], eye[b])), cl.gp(cl.conj(eye[b]), cl.conj(eye[a])))
