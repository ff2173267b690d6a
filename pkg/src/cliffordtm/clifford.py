"""Real Clifford algebra A_m with negative-definite generators.

Elements are stored as coefficient vectors of length ``2**m`` indexed by
blade bitmask: bit ``i-1`` of the mask is set when ``e_i`` is a factor, and
mask ``0`` is the unit ``e_0``.  The module has two layers:

* array functions (:func:`gp`, :func:`conj`, :func:`left_matrix`, ...) that act
  on the last axis of numpy arrays and broadcast over any leading batch axes;
* the immutable :class:`Multivector` value type wrapping a single element.

Both layers accept ``dtype=object`` arrays of :class:`fractions.Fraction`, which
the polynomial code uses for exact arithmetic.
"""

from __future__ import annotations

from functools import lru_cache
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from .exceptions import NotInvertible, UnsupportedDimension

MAX_DIM = 6
INVERSE_RTOL = 1e-12
TWO_SIDED_ATOL = 1e-10


def check_dim(m) -> int:
    """Validate an algebra dimension and return it as an ``int``."""
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise UnsupportedDimension(f"algebra dimension must be an integer, got {m!r}")
    if not 1 <= m <= MAX_DIM:
        raise UnsupportedDimension(f"algebra dimension m={m} outside 1..{MAX_DIM}")
    return int(m)


def dim_from_size(n: int) -> int:
    """Recover ``m`` from a coefficient-vector length ``2**m``."""
    m = int(n).bit_length() - 1
    if n < 2 or (1 << m) != n:
        raise UnsupportedDimension(f"coefficient length {n} is not 2**m with m >= 1")
    return check_dim(m)


# ---------------------------------------------------------------------------
# blade level
# ---------------------------------------------------------------------------


def _popcount(x: int) -> int:
    return bin(x).count("1")


def blade_product(a: int, b: int) -> tuple[int, int]:
    """Product of two basis blades.

    Parameters
    ----------
    a, b : int
        Blade bitmasks.

    Returns
    -------
    sign : int
        ``+1`` or ``-1``.
    mask : int
        ``a ^ b``, the symmetric difference of the index sets.
    """
    if a < 0 or b < 0:
        raise ValueError("blade masks must be non-negative")
    # transpositions needed to sort e_A e_B: pairs i in A, j in B with i > j
    swaps = 0
    shifted = a >> 1
    while shifted:
        swaps += _popcount(shifted & b)
        shifted >>= 1
    # each shared generator squares to -1
    swaps += _popcount(a & b)
    return (-1 if swaps & 1 else 1), a ^ b


def blade_grade(mask: int) -> int:
    return _popcount(mask)


def blade_name(mask: int) -> str:
    if mask == 0:
        return "e0"
    idx = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    return "e" + "".join(idx)


@lru_cache(maxsize=None)
def _tables(m: int):
    """Cached sign/index tables for A_m.

    ``sign[a, b]`` is the sign of ``e_a e_b``.  For left-multiplication
    matrices ``L[k, b] = sign[k ^ b, b] * x[k ^ b]``, so ``lidx[k, b] = k ^ b``
    and ``lsign[k, b] = sign[k ^ b, b]``.
    """
    n = 1 << m
    sign = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            sign[a, b] = blade_product(a, b)[0]
    ar = np.arange(n)
    lidx = ar[:, None] ^ ar[None, :]
    lsign = sign[lidx, ar[None, :]]
    grades = np.array([_popcount(k) for k in range(n)])
    # conj(e_T) = (-1)^|T| * reverse(e_T)
    conj_sign = np.where(((grades + grades * (grades - 1) // 2) % 2) == 1, -1, 1)
    for arr in (sign, lidx, lsign, grades, conj_sign):
        arr.setflags(write=False)
    return sign, lidx, lsign, grades, conj_sign


def sign_table(m: int) -> np.ndarray:
    """``2**m x 2**m`` table of blade-product signs."""
    return _tables(check_dim(m))[0]


# ---------------------------------------------------------------------------
# array layer
# ---------------------------------------------------------------------------


def _as_coeffs(x):
    x = np.asarray(x)
    if x.dtype != object and not np.issubdtype(x.dtype, np.floating):
        x = x.astype(float)
    return x


def left_matrix(x) -> np.ndarray:
    """Matrix of ``y -> x y`` acting on coefficient vectors (batched)."""
    x = _as_coeffs(x)
    m = dim_from_size(x.shape[-1])
    _, lidx, lsign, _, _ = _tables(m)
    return x[..., lidx] * lsign


def right_matrix(x) -> np.ndarray:
    """Matrix of ``y -> y x`` acting on coefficient vectors (batched)."""
    x = _as_coeffs(x)
    m = dim_from_size(x.shape[-1])
    sign = _tables(m)[0]
    n = 1 << m
    ar = np.arange(n)
    # (y x)[k] = sum_a sign[a, k^a] y[a] x[k^a]
    idx = ar[:, None] ^ ar[None, :]
    return x[..., idx] * sign[ar[None, :], idx]


def gp(x, y) -> np.ndarray:
    """Clifford (geometric) product ``x y`` broadcasting over leading axes."""
    x = _as_coeffs(x)
    y = _as_coeffs(y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("operands belong to different algebras")
    L = left_matrix(x)
    if L.dtype == object or y.dtype == object:
        return (L * y[..., None, :]).sum(axis=-1)
    return np.einsum("...kb,...b->...k", L, y)


def conj(x) -> np.ndarray:
    """Clifford conjugate (anti-automorphism with ``conj(e_i) = -e_i``)."""
    x = _as_coeffs(x)
    m = dim_from_size(x.shape[-1])
    return x * _tables(m)[4]


def scalar_part(x) -> np.ndarray:
    return _as_coeffs(x)[..., 0]


def norm(x) -> np.ndarray:
    """Euclidean norm of the coefficient vector."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1))


def unit(m: int, batch: tuple = (), dtype=float) -> np.ndarray:
    out = np.zeros(batch + (1 << check_dim(m),), dtype=dtype)
    out[..., 0] = 1
    return out


def paravector_array(p) -> np.ndarray:
    """Embed points of R^{m+1} (last axis ``m+1``) as multivector arrays."""
    p = np.asarray(p, dtype=float)
    m = check_dim(p.shape[-1] - 1)
    out = np.zeros(p.shape[:-1] + (1 << m,))
    out[..., 0] = p[..., 0]
    for i in range(1, m + 1):
        out[..., 1 << (i - 1)] = p[..., i]
    return out


def vector_indices(m: int) -> np.ndarray:
    """Coefficient positions of ``e_0, e_1, ..., e_m``."""
    return np.array([0] + [1 << (i - 1) for i in range(1, check_dim(m) + 1)])


def inverse_array(x, rtol: float = INVERSE_RTOL) -> np.ndarray:
    """Batched inverse through the left-multiplication matrix.

    Raises :class:`NotInvertible` if any element of the batch is singular.
    """
    x = np.asarray(x, dtype=float)
    L = left_matrix(x)
    s = np.linalg.svd(L, compute_uv=False)
    if np.any(s[..., -1] <= rtol * s[..., 0]) or np.any(s[..., 0] == 0):
        raise NotInvertible("left-multiplication matrix is singular")
    rhs = unit(dim_from_size(x.shape[-1]), x.shape[:-1])
    return np.linalg.solve(L, rhs[..., None])[..., 0]


# ---------------------------------------------------------------------------
# value layer
# ---------------------------------------------------------------------------


class Multivector:
    """Immutable element of A_m.

    Parameters
    ----------
    m : int
        Number of generators, ``1 <= m <= 6``.
    coeffs : array_like, optional
        ``2**m`` coefficients in mask order; zero if omitted.
    """

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs=None):
        m = check_dim(m)
        n = 1 << m
        if coeffs is None:
            arr = np.zeros(n)
        else:
            arr = np.array(coeffs, dtype=object if _is_exact(coeffs) else float)
            if arr.shape != (n,):
                raise ValueError(f"expected {n} coefficients for m={m}, got shape {arr.shape}")
            if arr.dtype != object and not np.all(np.isfinite(arr)):
                raise ValueError("multivector coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # construction helpers
    @classmethod
    def scalar(cls, m: int, value=1.0) -> "Multivector":
        c = [0.0] * (1 << check_dim(m))
        c[0] = value
        return cls(m, c)

    @classmethod
    def blade(cls, m: int, mask: int, value=1.0) -> "Multivector":
        n = 1 << check_dim(m)
        if not 0 <= mask < n:
            raise ValueError(f"blade mask {mask} invalid for m={m}")
        c = [0.0] * n
        c[mask] = value
        return cls(m, c)

    @classmethod
    def basis(cls, m: int, *indices: int) -> "Multivector":
        """``e_{i_1} e_{i_2} ...`` for generator indices in 1..m (0 is the unit)."""
        out = cls.scalar(m)
        for i in indices:
            if i == 0:
                continue
            if not 1 <= i <= m:
                raise ValueError(f"generator index {i} outside 1..{m}")
            out = out * cls.blade(m, 1 << (i - 1))
        return out

    @classmethod
    def paravector(cls, components: Sequence[float]) -> "Multivector":
        return cls(len(components) - 1, paravector_array(components))

    @classmethod
    def from_json(cls, obj: dict) -> "Multivector":
        return cls(int(obj["m"]), [float(c) for c in obj["coeffs"]])

    def to_json(self) -> dict:
        return {"m": self.m, "coeffs": [float(c) for c in self.coeffs]}

    def astype_float(self) -> "Multivector":
        return Multivector(self.m, self.coeffs.astype(float))

    # algebra
    def _coerce(self, other):
        if isinstance(other, Multivector):
            if other.m != self.m:
                raise ValueError(f"cannot combine A_{self.m} with A_{other.m}")
            return other.coeffs
        if isinstance(other, Real) or _is_fraction(other):
            c = np.zeros(1 << self.m, dtype=object if _is_fraction(other) else float)
            c[0] = other
            return c
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        return Multivector(self.m, self.coeffs + c)

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        return Multivector(self.m, self.coeffs - c)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        return Multivector(self.m, c - self.coeffs)

    def __neg__(self):
        return Multivector(self.m, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            self._coerce(other)
            return Multivector(self.m, gp(self.coeffs, other.coeffs))
        if isinstance(other, Real) or _is_fraction(other):
            return Multivector(self.m, self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real) or _is_fraction(other):
            return Multivector(self.m, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Real) or _is_fraction(other):
            return Multivector(self.m, self.coeffs / other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.m == other.m and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash((self.m, tuple(self.coeffs.tolist())))

    def conj(self) -> "Multivector":
        return Multivector(self.m, conj(self.coeffs))

    @property
    def sc(self):
        return self.coeffs[0]

    @property
    def nsc(self) -> "Multivector":
        c = self.coeffs.copy()
        c[0] = 0
        return Multivector(self.m, c)

    @property
    def norm(self) -> float:
        return float(norm(self.coeffs.astype(float)))

    def parts(self):
        """``(Sc x, NSc x, |x|)``."""
        return self.sc, self.nsc, self.norm

    def is_paravector(self, atol: float = 0.0) -> bool:
        mask = np.ones(1 << self.m, dtype=bool)
        mask[vector_indices(self.m)] = False
        return bool(np.all(np.abs(self.coeffs[mask].astype(float)) <= atol))

    def left_mul_matrix(self) -> np.ndarray:
        return left_mul_matrix(self)

    def inverse(self) -> "Multivector":
        return try_inverse(self)

    def __repr__(self):
        terms = []
        for mask, c in enumerate(self.coeffs):
            if c != 0:
                val = str(c) if _is_fraction(c) else f"{float(c):.12g}"
                terms.append(f"{val}*{blade_name(mask)}")
        return f"Multivector(m={self.m}, " + (" + ".join(terms) or "0") + ")"


def _is_fraction(x) -> bool:
    from fractions import Fraction

    return isinstance(x, Fraction)


def _is_exact(coeffs) -> bool:
    if isinstance(coeffs, np.ndarray):
        return coeffs.dtype == object
    if isinstance(coeffs, Iterable):
        return any(_is_fraction(c) for c in coeffs)
    return False


def mul(x: Multivector, y: Multivector) -> Multivector:
    return x * y


def parts(x: Multivector):
    return x.parts()


def left_mul_matrix(a: Multivector) -> np.ndarray:
    """Real ``2**m x 2**m`` matrix whose column ``T`` is ``a e_T``."""
    return left_matrix(np.asarray(a.coeffs, dtype=float))


def try_inverse(a: Multivector, rtol: float = INVERSE_RTOL) -> Multivector:
    """Two-sided inverse of ``a``.

    Solves ``L(a) b = e_0`` where ``L(a)`` is the left-multiplication matrix.
    Non-singularity of ``L(a)`` is equivalent to invertibility, and a right
    inverse obtained this way is automatically a left inverse.

    Raises
    ------
    NotInvertible
        If the smallest singular value of ``L(a)`` is ``<= rtol`` times the
        largest (``a`` is a zero divisor or zero).
    """
    L = left_mul_matrix(a)
    s = np.linalg.svd(L, compute_uv=False)
    if s[0] == 0 or s[-1] <= rtol * s[0]:
        raise NotInvertible(f"{a!r} is a zero divisor (singular value ratio {s[-1] / max(s[0], 1e-300):.3e})")
    rhs = np.zeros(1 << a.m)
    rhs[0] = 1.0
    b = Multivector(a.m, np.linalg.solve(L, rhs))
    one = Multivector.scalar(a.m)
    scale = max(1.0, a.norm * b.norm)
    err = max((a * b - one).norm, (b * a - one).norm)
    assert err <= TWO_SIDED_ATOL * scale, f"inverse not two-sided (error {err:.3e})"
    return b
