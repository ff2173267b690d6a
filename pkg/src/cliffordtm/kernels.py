"""Szego kernels of the unit ball and the half space, and their pole derivatives.

Both kernels have the form ``S_y(x) = g(w) = conj(w) / |w|^(m+1)`` with

* ball:       ``w = 1 - conj(y) x``
* half space: ``w = x + conj(y)``

so first derivatives in the pole ``y`` and mixed second derivatives in
``(x, y)`` follow from the chain rule on ``g``.  The closed forms are the
default; central differences with Richardson extrapolation are available as an
independent route (``method="richardson"``).

Gram entries use the reproducing identity ``<f, d^k_y S_y> = (d^k_x f)(y)``:
``<atom_i, atom_j>`` is atom ``i`` evaluated (and differentiated along the
direction of atom ``j``, if any) at the pole of atom ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import clifford as cl
from .exceptions import DomainMismatch, EvaluationSingularity, PoleOutsideDomain

SINGULAR_TOL = 1e-14
BOUNDARY_SLACK = 1e-12


class Domain(str, Enum):
    BALL = "ball"
    HALFSPACE = "halfspace"

    @classmethod
    def parse(cls, value) -> "Domain":
        if isinstance(value, Domain):
            return value
        try:
            return cls(str(value).lower().replace("-", "").replace("_", ""))
        except ValueError:
            raise ValueError(f"unknown domain {value!r}; expected 'ball' or 'halfspace'") from None


def check_pole(domain, a) -> np.ndarray:
    domain = Domain.parse(domain)
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("a pole is a single point of R^{m+1}")
    cl.check_dim(a.shape[0] - 1)
    if not np.all(np.isfinite(a)):
        raise PoleOutsideDomain("pole has non-finite coordinates")
    if domain is Domain.BALL and not np.linalg.norm(a) < 1.0:
        raise PoleOutsideDomain(f"ball pole must satisfy |a| < 1, got |a| = {np.linalg.norm(a):.6g}")
    if domain is Domain.HALFSPACE and not a[0] > 0.0:
        raise PoleOutsideDomain(f"half-space pole must satisfy Sc(a) > 0, got {a[0]:.6g}")
    return a


def _check_points(domain: Domain, x: np.ndarray):
    if domain is Domain.BALL:
        if np.any(np.linalg.norm(x, axis=-1) > 1.0 + BOUNDARY_SLACK):
            raise ValueError("ball kernel evaluated outside the closed unit ball")
    elif np.any(x[..., 0] < -BOUNDARY_SLACK):
        raise ValueError("half-space kernel evaluated at Sc(x) < 0")


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _w_and_derivs(domain: Domain, y, x, dy, dx):
    P = cl.paravector_array
    X = P(x)
    Y = P(np.broadcast_to(y, x.shape))
    if domain is Domain.BALL:
        w = cl.unit(X.shape[-1].bit_length() - 1, X.shape[:-1]) - cl.gp(cl.conj(Y), X)
        wy = None if dy is None else -cl.gp(cl.conj(P(np.broadcast_to(dy, x.shape))), X)
        wx = None if dx is None else -cl.gp(cl.conj(Y), P(np.broadcast_to(dx, x.shape)))
        wxy = None
        if dy is not None and dx is not None:
            wxy = -cl.gp(cl.conj(P(np.broadcast_to(dy, x.shape))), P(np.broadcast_to(dx, x.shape)))
    else:
        w = X + cl.conj(Y)
        wy = None if dy is None else cl.conj(P(np.broadcast_to(dy, x.shape)))
        wx = None if dx is None else P(np.broadcast_to(dx, x.shape))
        wxy = None if (dy is None or dx is None) else np.zeros_like(w)
    return w, wy, wx, wxy


def kernel_value(domain, y, x, dy=None, dx=None) -> np.ndarray:
    """``S_y(x)`` and its directional derivatives, closed form.

    Parameters
    ----------
    domain : Domain or str
    y : array_like, shape (m+1,)
        Pole.
    x : array_like, shape (..., m+1)
        Evaluation points.
    dy, dx : array_like, shape (m+1,), optional
        Differentiate in the pole along ``dy`` and/or in ``x`` along ``dx``.

    Returns
    -------
    ndarray, shape (..., 2**m)
    """
    domain = Domain.parse(domain)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    m = cl.check_dim(y.shape[-1] - 1)
    if x.shape[-1] != m + 1:
        raise ValueError(f"points must have {m + 1} coordinates")
    p = m + 1
    w, wy, wx, wxy = _w_and_derivs(domain, y, x, dy, dx)
    r2 = _dot(w, w)
    if np.any(r2 < SINGULAR_TOL**2):
        raise EvaluationSingularity("kernel evaluated at its singularity")
    cw = cl.conj(w)
    s = r2 ** (-p / 2)

    def d1(u):
        return cl.conj(u) * s[..., None] - (p * _dot(w, u) * s / r2)[..., None] * cw

    if wy is None and wx is None:
        return cw * s[..., None]
    if wy is None or wx is None:
        return d1(wy if wx is None else wx)
    u, v = wy, wx
    wu, wv, uv = _dot(w, u), _dot(w, v), _dot(u, v)
    s1 = s / r2
    s2 = s1 / r2
    second = (
        -(p * s1)[..., None] * (wv[..., None] * cl.conj(u) + uv[..., None] * cw + wu[..., None] * cl.conj(v))
        + (p * (p + 2) * wu * wv * s2)[..., None] * cw
    )
    return second + d1(wxy)


def kernel_value_fd(domain, y, x, dy=None, dx=None, h=None) -> np.ndarray:
    """Same quantity as :func:`kernel_value`, derivatives by central differences.

    Richardson extrapolation over steps ``h`` and ``h/2``.  The default step
    is ``1e-4 * (1 - |y|)`` for the ball and ``1e-4 * Sc(y)`` for the half
    space.
    """
    domain = Domain.parse(domain)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-4 * ((1.0 - np.linalg.norm(y)) if domain is Domain.BALL else y[0])
    if dy is not None:
        dy = np.asarray(dy, dtype=float)

        def f(step):
            return (
                kernel_value_fd(domain, y + step * dy, x, None, dx, h)
                - kernel_value_fd(domain, y - step * dy, x, None, dx, h)
            ) / (2 * step)

        return (4 * f(h / 2) - f(h)) / 3
    if dx is not None:
        dx = np.asarray(dx, dtype=float)

        def g(step):
            return (kernel_value(domain, y, x + step * dx) - kernel_value(domain, y, x - step * dx)) / (2 * step)

        return (4 * g(h / 2) - g(h)) / 3
    return kernel_value(domain, y, x)


def szego_eval(domain, a, x) -> np.ndarray:
    """Szego kernel ``S_a(x)`` for the ball or the half space."""
    domain = Domain.parse(domain)
    a = check_pole(domain, a)
    x = np.asarray(x, dtype=float)
    _check_points(domain, x)
    return kernel_value(domain, a, x)


def cauchy_kernel(x) -> np.ndarray:
    """``E(x) = conj(x) / |x|^(m+1)``."""
    x = np.asarray(x, dtype=float)
    m = cl.check_dim(x.shape[-1] - 1)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < SINGULAR_TOL):
        raise EvaluationSingularity("Cauchy kernel evaluated at the origin")
    return cl.conj(cl.paravector_array(x)) / (r ** (m + 1))[..., None]


@dataclass(frozen=True, eq=False)
class KernelAtom:
    """Szego kernel ``S_a`` or its first pole derivative along a unit ``direction``."""

    domain: Domain
    pole: np.ndarray
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain.parse(self.domain))
        pole = check_pole(self.domain, self.pole).copy()
        pole.setflags(write=False)
        object.__setattr__(self, "pole", pole)
        if self.direction is not None:
            d = np.asarray(self.direction, dtype=float).copy()
            if d.shape != pole.shape:
                raise ValueError("direction must live in the same R^{m+1} as the pole")
            nd = np.linalg.norm(d)
            if abs(nd - 1.0) > 1e-9:
                raise ValueError(f"direction must be a unit vector (|w| = {nd:.6g})")
            d = d / nd
            d.setflags(write=False)
            object.__setattr__(self, "direction", d)

    @property
    def m(self) -> int:
        return self.pole.shape[0] - 1

    @property
    def is_derivative(self) -> bool:
        return self.direction is not None

    def __eq__(self, other):
        if not isinstance(other, KernelAtom):
            return NotImplemented
        same_dir = (self.direction is None and other.direction is None) or (
            self.direction is not None
            and other.direction is not None
            and np.array_equal(self.direction, other.direction)
        )
        return self.domain is other.domain and np.array_equal(self.pole, other.pole) and same_dir

    __hash__ = object.__hash__

    def to_json(self) -> dict:
        return {
            "domain": self.domain.value,
            "pole": [float(v) for v in self.pole],
            "direction": None if self.direction is None else [float(v) for v in self.direction],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KernelAtom":
        return cls(obj["domain"], np.array(obj["pole"], dtype=float), None if obj.get("direction") is None else np.array(obj["direction"], dtype=float))


def atom_eval(atom: KernelAtom, x, method: str = "analytic") -> np.ndarray:
    """Value of an atom at points ``x`` (shape ``(..., m+1)``)."""
    x = np.asarray(x, dtype=float)
    _check_points(atom.domain, x)
    if method == "analytic":
        return kernel_value(atom.domain, atom.pole, x, dy=atom.direction)
    if method == "richardson":
        return kernel_value_fd(atom.domain, atom.pole, x, dy=atom.direction)
    raise ValueError(f"unknown method {method!r}")


def atom_derivative(atom: KernelAtom, x, direction) -> np.ndarray:
    """Directional derivative in ``x`` of an atom along ``direction``."""
    return kernel_value(atom.domain, atom.pole, np.asarray(x, dtype=float), dy=atom.direction, dx=direction)


def gram_entry(atom_i: KernelAtom, atom_j: KernelAtom, method: str = "analytic") -> np.ndarray:
    """``<atom_i, atom_j>`` by the reproducing identity (no quadrature)."""
    if atom_i.domain is not atom_j.domain:
        raise DomainMismatch(f"{atom_i.domain.value} atom paired with {atom_j.domain.value} atom")
    if atom_i.m != atom_j.m:
        raise ValueError("atoms over different algebras")
    fn = kernel_value if method == "analytic" else kernel_value_fd
    return fn(atom_i.domain, atom_i.pole, atom_j.pole, dy=atom_i.direction, dx=atom_j.direction)


def self_gram_plain(domain, a) -> float:
    """``<S_a, S_a>``: ``(1-|a|^2)^(-m)`` (ball) or ``(2 Sc a)^(-m)`` (half space)."""
    domain = Domain.parse(domain)
    a = check_pole(domain, a)
    m = a.shape[0] - 1
    if domain is Domain.BALL:
        return (1.0 - float(a @ a)) ** (-m)
    return (2.0 * a[0]) ** (-m)
