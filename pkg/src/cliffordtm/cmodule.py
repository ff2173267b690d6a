"""Gram-Schmidt orthogonalization in right A_m-module inner product spaces.

The inner product is Clifford valued, right linear in the first slot and
Hermitian: ``<f l, g> = <f, g> l`` and ``<f, g> = conj(<g, f>)``; hence
``<f, g l> = conj(l) <f, g>``.  Everything here works on the matrix of raw
inner products ``G[p, q] = <alpha_p, alpha_q>`` stored as an array of shape
``(n, n, 2**m)``; the elements themselves are never touched, so the same code
serves polynomials (exact sphere moments) and Szego kernels (reproducing
identity).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import clifford as cl
from .clifford import Multivector
from .exceptions import DegenerateElement, InconsistentSystem

PINV_RCOND = 1e-12
CONSISTENCY_TOL = 1e-10
DEGENERACY_RTOL = 1e-12


def solve_coefficient(gram, cross, atol: float = CONSISTENCY_TOL):
    """Projection coefficient of ``alpha`` onto ``span{beta}``.

    Solves ``<beta, beta> c = <alpha, beta>`` via the pseudo-inverse of the
    left-multiplication matrix of the Gram value.  When the Gram value is a
    zero divisor the coefficient is not unique; the minimal Euclidean norm
    solution is returned (the projection ``beta c`` is unique regardless).

    Parameters
    ----------
    gram, cross : Multivector or ndarray
        ``<beta, beta>`` and ``<alpha, beta>``.

    Returns
    -------
    Multivector or ndarray
        Same kind as ``gram``.

    Raises
    ------
    InconsistentSystem
        If the least-squares residual exceeds ``atol`` (relative to
        ``max(1, |cross|)``).
    """
    as_mv = isinstance(gram, Multivector)
    g = np.asarray(gram.coeffs if as_mv else gram, dtype=float)
    x = np.asarray(cross.coeffs if isinstance(cross, Multivector) else cross, dtype=float)
    L = cl.left_matrix(g)
    c = np.linalg.pinv(L, rcond=PINV_RCOND) @ x
    resid = np.linalg.norm(L @ c - x)
    if resid > atol * max(1.0, np.linalg.norm(x)):
        raise InconsistentSystem(f"<b,b> c = <a,b> has no solution (residual {resid:.3e})")
    return Multivector(len(g).bit_length() - 1, c) if as_mv else c


def combine(G: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``< sum_p alpha_p left[p], sum_q alpha_q right[q] >`` from the raw Gram array."""
    n = left.shape[0]
    out = np.zeros(G.shape[-1])
    for q in range(n):
        inner = np.zeros(G.shape[-1])
        for p in range(n):
            if np.any(left[p]):
                inner += cl.gp(G[p, q], left[p])
        if np.any(right[q]):
            out += cl.gp(cl.conj(right[q]), inner)
    return out


@dataclass(frozen=True)
class GramSchmidtResult:
    """Output of :func:`gram_schmidt`.

    Attributes
    ----------
    lam : ndarray, shape (n, n, 2**m)
        Lower-triangular table with ``beta_j = sum_i alpha_i lam[j, i]`` and
        ``lam[j, j] = 1``.
    self_grams : ndarray, shape (n, 2**m)
        ``<beta_j, beta_j>``.
    gram : ndarray, shape (n, n, 2**m)
        Raw inner products ``<alpha_p, alpha_q>`` the table was built from.
    """

    lam: np.ndarray
    self_grams: np.ndarray
    gram: np.ndarray

    @property
    def m(self) -> int:
        return cl.dim_from_size(self.gram.shape[-1])

    def __len__(self):
        return self.lam.shape[0]

    def coefficient(self, j: int, i: int) -> Multivector:
        return Multivector(self.m, self.lam[j, i])

    def self_gram(self, j: int) -> Multivector:
        return Multivector(self.m, self.self_grams[j])

    def inner(self, j: int, l: int) -> Multivector:
        """``<beta_j, beta_l>`` recomputed from the raw Gram array."""
        return Multivector(self.m, combine(self.gram, self.lam[j], self.lam[l]))

    def orthogonality_defect(self) -> float:
        """Largest Clifford norm of an off-diagonal ``<beta_j, beta_l>``."""
        n = len(self)
        worst = 0.0
        for j in range(n):
            for l in range(j):
                worst = max(worst, self.inner(j, l).norm)
        return worst


def next_row(G: np.ndarray, lam: np.ndarray, self_grams: np.ndarray, n: int):
    """Orthogonalize element ``n`` against ``beta_0..beta_{n-1}``.

    ``G`` must hold raw inner products for indices ``0..n``; ``lam`` and
    ``self_grams`` the rows already computed.  Returns the new ``lam`` row
    (length ``n+1``) and ``<beta_n, beta_n>``.
    """
    size = G.shape[-1]
    row = np.zeros((n + 1, size))
    row[n, 0] = 1.0
    self_gram = np.array(G[n, n], dtype=float)
    for i in range(n):
        # <alpha_n, beta_i> = sum_l conj(lam[i, l]) <alpha_n, alpha_l>
        cross = np.zeros(size)
        for l in range(i + 1):
            cross += cl.gp(cl.conj(lam[i, l]), G[n, l])
        c = solve_coefficient(self_grams[i], cross)
        for l in range(i + 1):
            row[l] -= cl.gp(lam[i, l], c)
        self_gram -= cl.gp(cl.conj(c), cross)
    # exact Hermitian part: <b,b> is self-conjugate
    self_gram = 0.5 * (self_gram + cl.conj(self_gram))
    ref = float(G[n, n, 0])
    if self_gram[0] <= DEGENERACY_RTOL * max(ref, 0.0) or self_gram[0] <= 0.0:
        raise DegenerateElement(
            f"element {n} lies in the span of its predecessors "
            f"(Sc<b,b> = {self_gram[0]:.3e}, Sc<a,a> = {ref:.3e})",
            index=n,
        )
    return row, self_gram


def gram_schmidt(inner: Callable[[int, int], object], n: int) -> GramSchmidtResult:
    """Gram-Schmidt process for ``n`` module elements.

    Parameters
    ----------
    inner : callable
        ``inner(p, q)`` returns ``<alpha_p, alpha_q>`` (``Multivector`` or
        coefficient array), zero-based.  Only ``q <= p`` is queried; the upper
        triangle is filled by Hermitian symmetry.
    n : int
        Number of elements.

    Raises
    ------
    DegenerateElement
        If ``Sc<beta_j, beta_j>`` falls below ``1e-12 * Sc<alpha_j, alpha_j>``.
    """
    if n < 1:
        raise ValueError("need at least one element")
    first = inner(0, 0)
    first = np.asarray(first.coeffs if isinstance(first, Multivector) else first, dtype=float)
    size = first.shape[-1]
    G = np.zeros((n, n, size))
    lam = np.zeros((n, n, size))
    self_grams = np.zeros((n, size))
    for p in range(n):
        for q in range(p + 1):
            v = first if p == q == 0 else inner(p, q)
            v = np.asarray(v.coeffs if isinstance(v, Multivector) else v, dtype=float)
            G[p, q] = v
            G[q, p] = cl.conj(v)
        row, sg = next_row(G, lam, self_grams, p)
        lam[p, : p + 1] = row
        self_grams[p] = sg
    return GramSchmidtResult(lam=lam, self_grams=self_grams, gram=G)
