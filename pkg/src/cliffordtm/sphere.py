"""Integration over the unit sphere S^m in R^{m+1}.

Two independent routes are provided: closed-form monomial moments (used for
exact polynomial inner products) and a tensor-product quadrature grid (used for
kernels and as the cross-check).  All integrals are normalized by the sphere
area, so the constant function 1 integrates to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gamma, pi
from typing import Sequence

import numpy as np
from scipy.special import roots_gegenbauer

from .clifford import check_dim
from .exceptions import LengthMismatch


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^m in R^{m+1}."""
    m = check_dim(m)
    return 2.0 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def _double_factorial_odd(k: int) -> int:
    # (2k - 1)!!, with (-1)!! = 1
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


@lru_cache(maxsize=None)
def monomial_moment_exact(m: int, alpha: tuple) -> Fraction:
    """Normalized sphere moment of ``x^alpha`` as an exact fraction."""
    if len(alpha) != m + 1:
        raise ValueError(f"multi-index must have length m+1 = {m + 1}")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be non-negative")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    beta = [a // 2 for a in alpha]
    d = m + 1
    num = 1
    for b in beta:
        num *= _double_factorial_odd(b)
    den = 1
    for j in range(1, sum(beta) + 1):
        den *= d + 2 * j - 2
    return Fraction(num, den)


def monomial_moment(m: int, alpha: Sequence[int]) -> float:
    """``(1/omega_m) * integral over S^m of x^alpha``."""
    return float(monomial_moment_exact(check_dim(m), tuple(int(a) for a in alpha)))


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature rule on S^m.

    Attributes
    ----------
    m : int
    degree : int
        Total polynomial degree integrated exactly.
    nodes : ndarray, shape (n, m+1)
        Unit vectors.
    weights : ndarray, shape (n,)
        Positive, summing to 1.
    """

    m: int
    degree: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.weights)

    def to_json(self) -> dict:
        return {"m": self.m, "degree": self.degree}


def _polar_rule(n: int, power: int):
    """Nodes/weights in ``t = cos(theta)`` for the weight ``sin(theta)**power``.

    ``sin^p(theta) d(theta) = (1 - t^2)^((p-1)/2) dt``, a Gegenbauer weight with
    parameter ``p/2``; for ``p = 1`` this is plain Gauss-Legendre.
    """
    if power == 1:
        t, w = np.polynomial.legendre.leggauss(n)
    else:
        t, w = roots_gegenbauer(n, power / 2.0)
    return np.asarray(t), np.asarray(w)


@lru_cache(maxsize=32)
def _cached_grid(m: int, degree: int) -> SphereGrid:
    n_az = degree + 1
    phi = 2.0 * pi * np.arange(n_az) / n_az
    # the last two coordinates are (cos phi, sin phi) scaled by the product of sines
    coords = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    weights = np.full(n_az, 1.0 / n_az)
    n_polar = degree // 2 + 1
    # build outward: polar angle theta_k carries sin^(m-k) in the measure
    for power in range(1, m):
        t, w = _polar_rule(n_polar, power)
        s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        new = np.concatenate(
            [
                np.repeat(t, len(coords))[:, None],
                (s[:, None, None] * coords[None, :, :]).reshape(-1, coords.shape[1]),
            ],
            axis=1,
        )
        weights = (w[:, None] * weights[None, :]).ravel()
        coords = new
    weights = weights / weights.sum()
    coords = coords / np.linalg.norm(coords, axis=1, keepdims=True)
    coords.setflags(write=False)
    weights.setflags(write=False)
    return SphereGrid(m=m, degree=degree, nodes=coords, weights=weights)


def build_grid(m: int, degree: int) -> SphereGrid:
    """Quadrature grid on S^m exact for polynomials of total degree ``degree``.

    Gauss rules in the cosine of each polar angle (Gauss-Legendre when the
    measure factor is ``sin(theta)``, Gauss-Gegenbauer otherwise) and the
    trapezoid rule in the final azimuth.
    """
    m = check_dim(m)
    if isinstance(degree, bool) or int(degree) != degree or degree < 1:
        raise ValueError(f"grid degree must be a positive integer, got {degree!r}")
    return _cached_grid(m, int(degree))


def integrate(grid: SphereGrid, samples) -> np.ndarray:
    """Normalized integral ``sum_j w_j samples[j]``.

    ``samples`` has the node axis first; trailing axes (e.g. multivector
    coefficients) are carried along.
    """
    samples = np.asarray(samples)
    if samples.shape[0] != len(grid):
        raise LengthMismatch(f"{samples.shape[0]} samples for {len(grid)} nodes")
    return np.tensordot(grid.weights, samples, axes=(0, 0))
