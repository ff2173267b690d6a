"""Fueter polynomials and orthogonal bases of inner spherical monogenics.

Polynomials in ``x_0..x_m`` carry Clifford coefficients on the right of the
monomial.  Coefficients built from integers stay exact
(:class:`fractions.Fraction`), so the Dirac operator and inner products of
Fueter polynomials are computed without rounding.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import clifford as cl
from .clifford import Multivector, check_dim
from .cmodule import GramSchmidtResult, gram_schmidt
from .exceptions import NotInvertible
from .sphere import monomial_moment_exact

MAX_ORDER = 6


def _fraction_zero(n):
    return np.array([Fraction(0)] * n, dtype=object)


class HyperPoly:
    """Polynomial ``sum_alpha x^alpha c_alpha`` with Clifford coefficients.

    Parameters
    ----------
    m : int
    terms : mapping
        Exponent tuple of length ``m+1`` -> coefficient (``Multivector`` or
        array of length ``2**m``).  Zero coefficients are dropped.
    """

    __slots__ = ("m", "terms")

    def __init__(self, m: int, terms: Mapping | None = None):
        m = check_dim(m)
        n = 1 << m
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != m + 1 or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent {alpha} for m={m}")
            arr = np.array(c.coeffs if isinstance(c, Multivector) else c)
            if arr.shape != (n,):
                raise ValueError(f"coefficient for {alpha} has shape {arr.shape}")
            if arr.dtype != object:
                arr = arr.astype(float)
            if any(v != 0 for v in arr):
                arr.setflags(write=False)
                clean[alpha] = arr
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("HyperPoly is immutable")

    @classmethod
    def constant(cls, m: int, value: Multivector) -> "HyperPoly":
        return cls(m, {(0,) * (m + 1): value})

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(np.max(np.abs(c.astype(float))) <= atol for c in self.terms.values())

    def max_abs_coeff(self) -> float:
        return max((float(np.max(np.abs(c.astype(float)))) for c in self.terms.values()), default=0.0)

    def is_exact(self) -> bool:
        return all(c.dtype == object for c in self.terms.values())

    def astype_float(self) -> "HyperPoly":
        return HyperPoly(self.m, {a: c.astype(float) for a, c in self.terms.items()})

    def _combine(self, other, sign):
        if other.m != self.m:
            raise ValueError("polynomials over different algebras")
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + sign * c if a in out else sign * c
        return HyperPoly(self.m, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return HyperPoly(self.m, {a: -c for a, c in self.terms.items()})

    def __mul__(self, other):
        """Polynomial product, or right multiplication by a Clifford constant."""
        if isinstance(other, Multivector):
            return HyperPoly(self.m, {a: cl.gp(c, other.coeffs) for a, c in self.terms.items()})
        if isinstance(other, HyperPoly):
            if other.m != self.m:
                raise ValueError("polynomials over different algebras")
            out: dict = {}
            for a, c in self.terms.items():
                for b, d in other.terms.items():
                    key = tuple(i + j for i, j in zip(a, b))
                    v = cl.gp(c, d)
                    out[key] = out[key] + v if key in out else v
            return HyperPoly(self.m, out)
        return HyperPoly(self.m, {a: c * other for a, c in self.terms.items()})

    def __rmul__(self, other):
        if isinstance(other, HyperPoly):
            return other.__mul__(self)
        return HyperPoly(self.m, {a: c * other for a, c in self.terms.items()})

    def partial(self, i: int) -> "HyperPoly":
        """``d/dx_i``."""
        out = {}
        for a, c in self.terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return HyperPoly(self.m, out)

    def conj(self) -> "HyperPoly":
        return HyperPoly(self.m, {a: cl.conj(c) for a, c in self.terms.items()})

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., m+1)``; returns ``(..., 2**m)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.m + 1:
            raise ValueError(f"points must have {self.m + 1} coordinates")
        out = np.zeros(x.shape[:-1] + (1 << self.m,))
        for a, c in self.terms.items():
            mono = np.prod(x ** np.array(a), axis=-1)
            out += mono[..., None] * c.astype(float)
        return out

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "terms": [
                {"exponent": list(a), "coeffs": [float(v) for v in c]} for a, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HyperPoly":
        m = int(obj["m"])
        return cls(m, {tuple(t["exponent"]): np.array(t["coeffs"], dtype=float) for t in obj["terms"]})

    def __repr__(self):
        return f"HyperPoly(m={self.m}, degree={self.degree}, terms={len(self.terms)})"


def hyper_variable(m: int, l: int) -> HyperPoly:
    """``z_l = x_l e_0 - x_0 e_l`` with exact coefficients."""
    m = check_dim(m)
    if not 1 <= l <= m:
        raise ValueError(f"hypercomplex variable index {l} outside 1..{m}")
    n = 1 << m
    one = _fraction_zero(n)
    one[0] = Fraction(1)
    el = _fraction_zero(n)
    el[1 << (l - 1)] = Fraction(-1)
    xl = [0] * (m + 1)
    xl[l] = 1
    x0 = [0] * (m + 1)
    x0[0] = 1
    return HyperPoly(m, {tuple(xl): one, tuple(x0): el})


def _distinct_permutations(items: Sequence[int]):
    items = sorted(items)
    n = len(items)
    used = [False] * n
    cur: list = []

    def rec():
        if len(cur) == n:
            yield tuple(cur)
            return
        prev = None
        for i in range(n):
            if used[i] or items[i] == prev:
                continue
            prev = items[i]
            used[i] = True
            cur.append(items[i])
            yield from rec()
            cur.pop()
            used[i] = False

    return rec()


def fueter(m: int, idx: Sequence[int]) -> HyperPoly:
    """Fueter polynomial ``V_{l_1..l_k}``; ``V_() = e_0``.

    Each distinct ordering of the multiset appears once, weighted by the
    number of full permutations it stands for, and the sum is divided by
    ``k!``.  So ``V_(1,1) = z_1^2`` and ``V_(1,2) = (z_1 z_2 + z_2 z_1)/2``.
    """
    m = check_dim(m)
    idx = tuple(sorted(int(i) for i in idx))
    if any(not 1 <= i <= m for i in idx):
        raise ValueError(f"Fueter index {idx} has entries outside 1..{m}")
    n = 1 << m
    one = _fraction_zero(n)
    one[0] = Fraction(1)
    k = len(idx)
    if k == 0:
        return HyperPoly.constant(m, one)
    weight = 1
    for l in set(idx):
        weight *= factorial(idx.count(l))
    z = {l: hyper_variable(m, l) for l in set(idx)}
    total = HyperPoly(m)
    for perm in _distinct_permutations(idx):
        term = z[perm[0]]
        for l in perm[1:]:
            term = term * z[l]
        total = total + term
    return total * Fraction(weight, factorial(k))


def dirac_apply(p: HyperPoly) -> HyperPoly:
    """``D p = sum_i e_i dp/dx_i`` with left multiplication by ``e_i``."""
    m = p.m
    n = 1 << m
    out = HyperPoly(m)
    for i in range(m + 1):
        ei = np.zeros(n, dtype=object) if p.is_exact() else np.zeros(n)
        ei[:] = 0
        ei[0 if i == 0 else 1 << (i - 1)] = 1
        d = p.partial(i)
        out = out + HyperPoly(m, {a: cl.gp(ei, c) for a, c in d.terms.items()})
    return out


def exact_inner(p: HyperPoly, q: HyperPoly) -> Multivector:
    """``<p, q> = (1/omega_m) * integral over S^m of conj(q) p`` via exact moments."""
    if p.m != q.m:
        raise ValueError("polynomials over different algebras")
    m = p.m
    exact = p.is_exact() and q.is_exact()
    acc = _fraction_zero(1 << m) if exact else np.zeros(1 << m)
    for b, d in q.terms.items():
        dc = cl.conj(d)
        for a, c in p.terms.items():
            mom = monomial_moment_exact(m, tuple(i + j for i, j in zip(a, b)))
            if mom:
                acc = acc + cl.gp(dc, c) * (mom if exact else float(mom))
    return Multivector(m, acc)


def fueter_indices(m: int, k: int) -> list:
    """Sorted index tuples of M_k in lexicographic order."""
    return list(combinations_with_replacement(range(1, check_dim(m) + 1), k))


class MonogenicBasis:
    """Orthogonal basis ``U_1..U_n`` of M_k obtained by Gram-Schmidt.

    Attributes
    ----------
    indices : list of tuple
        Fueter indices in the (lexicographic) order used.
    fueter : list of HyperPoly
        ``V_j``.
    basis : list of HyperPoly
        ``U_j = sum_i V_i lam[j, i]``.
    normalized : list of HyperPoly
        ``U_j / ||U_j||`` with ``||U|| = sqrt(Sc<U, U>)``.
    result : GramSchmidtResult
    """

    def __init__(self, m, k, indices, fueter_polys, result: GramSchmidtResult):
        self.m = m
        self.k = k
        self.indices = indices
        self.fueter = fueter_polys
        self.result = result
        self.basis = []
        for j in range(len(indices)):
            u = HyperPoly(m)
            for i in range(j + 1):
                u = u + fueter_polys[i] * Multivector(m, result.lam[j, i])
            self.basis.append(u.astype_float())
        self.norms = [float(np.sqrt(result.self_grams[j, 0])) for j in range(len(indices))]
        self.normalized = [u * (1.0 / s) for u, s in zip(self.basis, self.norms)]

    @property
    def self_grams(self) -> list:
        return [Multivector(self.m, g) for g in self.result.self_grams]

    def gram_matrix(self) -> np.ndarray:
        """``<U_j, U_l>`` recomputed from exact moments, shape ``(n, n, 2**m)``."""
        n = len(self.basis)
        out = np.zeros((n, n, 1 << self.m))
        for j in range(n):
            for l in range(n):
                out[j, l] = exact_inner(self.basis[j], self.basis[l]).coeffs.astype(float)
        return out

    def to_json(self) -> dict:
        gram = self.gram_matrix()
        n = len(self.basis)
        off = max((float(np.linalg.norm(gram[j, l])) for j in range(n) for l in range(n) if j != l), default=0.0)
        return {
            "m": self.m,
            "k": self.k,
            "indices": [list(i) for i in self.indices],
            "lambda": [[[float(v) for v in self.result.lam[j, i]] for i in range(j + 1)] for j in range(n)],
            "self_grams": [[float(v) for v in g] for g in self.result.self_grams],
            "basis": [u.to_json() for u in self.basis],
            "normalized_basis": [u.to_json() for u in self.normalized],
            "certificate": {
                "gram": [[[float(v) for v in gram[j, l]] for l in range(n)] for j in range(n)],
                "max_offdiagonal": off,
            },
        }


def orthobasis_Mk(m: int, k: int, max_order: int = MAX_ORDER) -> MonogenicBasis:
    """Orthogonal basis of the degree-``k`` inner spherical monogenics.

    ``M_k`` is enumerated lexicographically (``C(m+k-1, k)`` elements) and
    orthogonalized with :func:`gram_schmidt` using exact sphere moments as the
    inner product oracle.  Every self-Gram value is checked for invertibility.
    """
    m = check_dim(m)
    if not 0 <= k <= max_order:
        raise ValueError(f"order k={k} outside 0..{max_order}")
    indices = fueter_indices(m, k)
    assert len(indices) == comb(m + k - 1, k)
    polys = [fueter(m, idx) for idx in indices]
    cache: dict = {}

    def inner(p, q):
        if (p, q) not in cache:
            cache[(p, q)] = exact_inner(polys[p], polys[q]).coeffs.astype(float)
        return cache[(p, q)]

    result = gram_schmidt(inner, len(polys))
    for j, g in enumerate(result.self_grams):
        try:
            cl.try_inverse(Multivector(m, g))
        except NotInvertible as exc:  # pragma: no cover - excluded by the basis theorem
            raise AssertionError(f"<U_{j + 1}, U_{j + 1}> is not invertible") from exc
    return MonogenicBasis(m, k, indices, polys, result)
