"""Monogenic lifts of real boundary data.

* Ball: the Schwarz integral ``F(x) = int_{S^m} (P + Q)(x, w) f(w) dS(w)``,
  where ``P`` is the Poisson kernel and ``Q`` its Cauchy-type harmonic
  conjugate, a radial integral times ``NSc(conj(w) x)``.
* Half space: the Cauchy integral of a real function on ``R^m`` truncated to
  a box and discretized with composite Gauss-Legendre panels.

In both cases ``Sc F`` recovers ``f`` on the boundary (``2 Sc F`` for the
half space).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec
from sklearn.base import BaseEstimator, TransformerMixin

from . import clifford as cl
from .exceptions import EvaluationSingularity, LengthMismatch, TruncationWarning
from .hardy import HardyFunction
from .kernels import Domain
from .sphere import SphereGrid, build_grid, integrate, sphere_area

QUAD_TOL = 1e-10
FD_STEP = 1e-4
TAIL_FRACTION = 0.01


def _as_points(x, m=None):
    x = np.asarray(x, dtype=float)
    if m is not None and x.shape[-1] != m + 1:
        raise ValueError(f"points must have {m + 1} coordinates")
    return x


def poisson_kernel(x, omega) -> np.ndarray:
    """``(1/omega_m) (1 - |x|^2) / |x - w|^(m+1)``, broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    m = x.shape[-1] - 1
    d = np.linalg.norm(x - omega, axis=-1)
    if np.any(d < 1e-12):
        raise EvaluationSingularity("Poisson kernel evaluated at its boundary singularity")
    return (1.0 - np.sum(x * x, axis=-1)) / d ** (m + 1) / sphere_area(m)


def conjugate_radial(x, omegas, tol: float = QUAD_TOL) -> np.ndarray:
    """``(1/omega_m) int_0^1 (m+1) t^(m-1) (1 - t^2|x|^2) / |t x - w|^(m+3) dt`` for each ``w``.

    One adaptive vector quadrature (``scipy.integrate.quad_vec``) over all
    boundary nodes at once.
    """
    x = np.asarray(x, dtype=float)
    omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
    m = x.shape[-1] - 1
    r2 = float(x @ x)

    def integrand(t):
        return (m + 1) * t ** (m - 1) * (1.0 - t * t * r2) / np.linalg.norm(t * x - omegas, axis=-1) ** (m + 3)

    val, _ = quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol)
    return val / sphere_area(m)


def _nsc_conj_prod(omegas, x):
    """``NSc(conj(w) x)`` for paravectors, shape ``(n, 2**m)``."""
    P = cl.paravector_array
    out = cl.gp(cl.conj(P(omegas)), P(np.broadcast_to(x, omegas.shape)))
    out[..., 0] = 0.0
    return out


def conjugate_kernel(x, omega, tol: float = QUAD_TOL) -> np.ndarray:
    """``Q(x, w)`` as a multivector (``(..., 2**m)`` for ``omega`` of shape ``(..., m+1)``)."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.linalg.norm(x) >= 1.0:
        raise ValueError("conjugate Poisson kernel needs |x| < 1")
    flat = np.atleast_2d(omega)
    out = _nsc_conj_prod(flat, x) * conjugate_radial(x, flat, tol)[:, None]
    return out.reshape(omega.shape[:-1] + (out.shape[-1],))


def schwarz_kernel(x, omega, tol: float = QUAD_TOL) -> np.ndarray:
    """``S(x, w) = P(x, w) + Q(x, w)``."""
    Q = conjugate_kernel(x, omega, tol)
    Q[..., 0] += poisson_kernel(x, omega)
    return Q


@dataclass(frozen=True)
class BoundarySignal:
    """Real samples of a function on the nodes of a sphere grid."""

    grid: SphereGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(-1)
        if s.shape[0] != len(self.grid):
            raise LengthMismatch(f"{s.shape[0]} samples for {len(self.grid)} grid nodes")
        if not np.all(np.isfinite(s)):
            raise ValueError("boundary samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: SphereGrid, fn) -> "BoundarySignal":
        return cls(grid, fn(grid.nodes))

    @property
    def m(self) -> int:
        return self.grid.m

    def energy(self) -> float:
        """``(1/omega_m) int f^2 dS``."""
        return float(integrate(self.grid, self.samples**2))


class _FDLift(HardyFunction):
    def derivative(self, x, direction):
        x = np.asarray(x, dtype=float)
        d = np.asarray(direction, dtype=float)

        def c(h):
            return (self.value(x + h * d) - self.value(x - h * d)) / (2 * h)

        return (4 * c(FD_STEP / 2) - c(FD_STEP)) / 3


class SchwarzLiftFunction(_FDLift):
    """``F = T(f)`` on the unit ball, evaluated by quadrature over the signal grid.

    Parameters
    ----------
    signal : BoundarySignal
    tol : float
        Tolerance of the radial integral in ``Q``.
    norm_radius : float, optional
        ``||F||^2`` is estimated as the mean of ``|F|^2`` on the sphere of
        this radius, sampled on the signal grid.  The estimate is a lower
        bound that increases to ``||F||^2`` as the radius tends to 1.  The
        default ``min(0.9, 1e-6 ** (1 / degree))`` keeps the quadrature error
        of the lift, which grows like ``radius ** degree``, near ``1e-6``.
    """

    def __init__(self, signal: BoundarySignal, tol: float = QUAD_TOL, norm_radius: float = None):
        if norm_radius is None:
            norm_radius = min(0.9, 1e-6 ** (1.0 / signal.grid.degree))
        self.signal = signal
        self.tol = tol
        self.norm_radius = norm_radius
        self.domain = Domain.BALL
        self.m = signal.m
        self._norm_sq = None

    def _check(self, x):
        x = _as_points(x, self.m)
        if np.any(np.linalg.norm(x, axis=-1) >= 1.0):
            raise ValueError("Schwarz lift evaluated outside the open unit ball")
        return x

    def scalar_value(self, x) -> np.ndarray:
        """``Sc F(x)``: the Poisson integral alone (``Q`` has no scalar part)."""
        x = self._check(x)
        flat = x.reshape(-1, self.m + 1)
        nodes, w, f = self.signal.grid.nodes, self.signal.grid.weights, self.signal.samples
        area = sphere_area(self.m)
        out = np.array([area * np.sum(w * poisson_kernel(p, nodes) * f) for p in flat])
        return out.reshape(x.shape[:-1])

    def value(self, x) -> np.ndarray:
        x = self._check(x)
        flat = x.reshape(-1, self.m + 1)
        grid, f = self.signal.grid, self.signal.samples
        area = sphere_area(self.m)
        out = np.empty((flat.shape[0], 1 << self.m))
        for i, p in enumerate(flat):
            S = schwarz_kernel(p, grid.nodes, self.tol)
            out[i] = area * integrate(grid, S * f[:, None])
        return out.reshape(x.shape[:-1] + (1 << self.m,))

    @property
    def norm_sq(self) -> float:
        if self._norm_sq is None:
            grid = self.signal.grid
            vals = self.value(self.norm_radius * grid.nodes)
            self._norm_sq = float(integrate(grid, np.sum(vals**2, axis=1)))
        return self._norm_sq

    def to_json(self) -> dict:
        return {
            "type": "schwarz_lift",
            "domain": "ball",
            "m": self.m,
            "grid_degree": self.signal.grid.degree,
            "samples": [float(v) for v in self.signal.samples],
        }


def schwarz_lift(signal: BoundarySignal, tol: float = QUAD_TOL) -> SchwarzLiftFunction:
    """Monogenic Schwarz lift of real boundary data on the unit sphere."""
    return SchwarzLiftFunction(signal, tol)


# ---------------------------------------------------------------------------
# half space


@dataclass(frozen=True)
class FlatGrid:
    """Composite Gauss-Legendre product grid on the box ``[-R, R]^m``.

    Attributes
    ----------
    nodes : ndarray, shape (n, m)
    weights : ndarray, shape (n,)
        Lebesgue weights (they sum to ``(2R)^m``).
    """

    m: int
    half_width: float
    n_panels: int
    order: int = 8
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cl.check_dim(self.m)
        if self.half_width <= 0 or self.n_panels < 1 or self.order < 1:
            raise ValueError("flat grid needs R > 0, n_panels >= 1, order >= 1")
        t, w = np.polynomial.legendre.leggauss(self.order)
        edges = np.linspace(-self.half_width, self.half_width, self.n_panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x1 = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        w1 = (half[:, None] * w[None, :]).ravel()
        mesh = np.stack(np.meshgrid(*([x1] * self.m), indexing="ij"), axis=-1).reshape(-1, self.m)
        wm = np.ones(1)
        for _ in range(self.m):
            wm = np.multiply.outer(wm, w1).ravel()
        mesh.setflags(write=False)
        wm.setflags(write=False)
        object.__setattr__(self, "nodes", mesh)
        object.__setattr__(self, "weights", wm)

    def __len__(self):
        return self.weights.shape[0]

    def to_json(self) -> dict:
        return {"m": self.m, "half_width": self.half_width, "n_panels": self.n_panels, "order": self.order}


class CauchyLiftFunction(_FDLift):
    """Truncated Cauchy integral ``-(1/omega_m) int conj(y - x) / |y - x|^(m+1) f(y) dy``."""

    def __init__(self, grid: FlatGrid, samples):
        s = np.asarray(samples, dtype=float).reshape(-1)
        if s.shape[0] != len(grid):
            raise LengthMismatch(f"{s.shape[0]} samples for {len(grid)} grid nodes")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        self.grid = grid
        self.samples = s
        self.domain = Domain.HALFSPACE
        self.m = grid.m
        # boundary points y as paravectors with zero scalar part
        self._y = np.hstack([np.zeros((len(grid), 1)), grid.nodes])

    def value(self, x) -> np.ndarray:
        x = _as_points(x, self.m)
        if np.any(x[..., 0] <= 0):
            raise ValueError("half-space lift evaluated at Sc(x) <= 0")
        flat = x.reshape(-1, self.m + 1)
        area = sphere_area(self.m)
        gw = self.grid.weights * self.samples
        out = np.empty((flat.shape[0], 1 << self.m))
        for i, p in enumerate(flat):
            d = self._y - p
            k = cl.conj(cl.paravector_array(d)) / (np.linalg.norm(d, axis=1) ** (self.m + 1))[:, None]
            out[i] = -(gw @ k) / area
        return out.reshape(x.shape[:-1] + (1 << self.m,))

    @property
    def norm_sq(self) -> float:
        """``||F||^2 = ||f||^2 / (2 omega_m)``; the Riesz transforms are L^2 isometric."""
        return float(self.grid.weights @ self.samples**2) / (2.0 * sphere_area(self.m))

    def to_json(self) -> dict:
        return {"type": "cauchy_lift", "domain": "halfspace", "m": self.m, "grid": self.grid.to_json(), "samples": [float(v) for v in self.samples]}


def tail_fraction(grid: FlatGrid, samples, shell: float = 0.1) -> float:
    """Share of signal energy within ``shell * R`` of the truncation boundary."""
    s = np.asarray(samples, dtype=float)
    outer = np.max(np.abs(grid.nodes), axis=1) > (1.0 - shell) * grid.half_width
    total = float(grid.weights @ s**2)
    return 0.0 if total == 0 else float(grid.weights[outer] @ s[outer] ** 2) / total


def cauchy_lift_halfspace(grid: FlatGrid, samples) -> CauchyLiftFunction:
    """Cauchy lift of real data on the truncated box; warns if the truncation is felt."""
    frac = tail_fraction(grid, samples)
    if frac > TAIL_FRACTION:
        warnings.warn(f"{100 * frac:.2f}% of the signal energy lies near the truncation boundary", TruncationWarning, stacklevel=2)
    return CauchyLiftFunction(grid, samples)


def default_flat_grid(m: int, support_radius: float, n_panels: int = None, order: int = 8) -> FlatGrid:
    """Box of half width ``8 * support_radius``; 40 panels per support radius by default."""
    R = 8.0 * support_radius
    return FlatGrid(m, R, n_panels or int(8 * 40), order)


# ---------------------------------------------------------------------------
# transformers


class SchwarzLift(TransformerMixin, BaseEstimator):
    """Transformer wrapping :func:`schwarz_lift`.

    ``fit(y)`` stores real boundary samples on a degree-``quad_degree`` sphere
    grid; ``transform(X)`` evaluates the lift at interior points ``X`` and
    returns ``(n, 2**m)`` multivector coefficients.
    """

    def __init__(self, m: int = 2, quad_degree: int = 40, tol: float = QUAD_TOL):
        self.m = m
        self.quad_degree = quad_degree
        self.tol = tol

    def fit(self, y, X=None):
        from .validation import check_samples

        grid = build_grid(self.m, self.quad_degree)
        if callable(y):
            y = y(grid.nodes)
        self.signal_ = BoundarySignal(grid, check_samples(y, len(grid)))
        self.lift_ = schwarz_lift(self.signal_, self.tol)
        return self

    def transform(self, X):
        from .validation import check_points

        return self.lift_.value(check_points(X, self.m))

    def fit_transform(self, y, X=None):
        return self.fit(y).transform(X)


class HalfSpaceCauchyLift(TransformerMixin, BaseEstimator):
    """Transformer wrapping :func:`cauchy_lift_halfspace`."""

    def __init__(self, m: int = 1, support_radius: float = 1.0, n_panels=None, order: int = 8):
        self.m = m
        self.support_radius = support_radius
        self.n_panels = n_panels
        self.order = order

    def fit(self, y, X=None):
        grid = default_flat_grid(self.m, self.support_radius, self.n_panels, self.order)
        if callable(y):
            y = y(grid.nodes)
        self.grid_ = grid
        self.lift_ = cauchy_lift_halfspace(grid, y)
        return self

    def transform(self, X):
        from .validation import check_points

        return self.lift_.value(check_points(X, self.m))

    def fit_transform(self, y, X=None):
        return self.fit(y).transform(X)
