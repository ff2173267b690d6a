"""Adaptive Fourier decomposition in the monogenic Hardy space.

At step ``n`` the next pole ``a`` is chosen to maximize the energy captured
by the new TM function,

    E(a) = Sc( conj(h) G^{-1} h ),   h = <f_n, D>,   G = <D, D> - sum_i t_i G_i^{-1} conj(t_i),

where ``D`` is the candidate atom (``S_a``, or a pole derivative when ``a``
repeats an earlier pole), ``t_i = <T_i, D>`` and ``f_n`` is the residual after
``n - 1`` steps.  Everything is evaluated through the reproducing identity, so
for an :class:`~cliffordtm.hardy.AtomCombo` the search never integrates.

For a plain candidate, ``<T_i, S_a> = T_i(a)``, so ``h`` and the
accumulated correction to ``G`` are fields over the search grid that are
updated once per step (see :class:`SearchCache`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from . import clifford as cl
from .exceptions import ConfigError
from .hardy import AtomCombo, HardyFunction
from .kernels import Domain, KernelAtom, atom_derivative, atom_eval, gram_entry, kernel_value
from .sphere import build_grid
from .tm import POLE_MATCH_TOL, TMSystem

DEGENERATE_RTOL = 1e-10
ENERGY_FLOOR = 1e-14


def _default_angular(m: int) -> int:
    return {1: 48, 2: 24, 3: 12}.get(m, 8)


# ---------------------------------------------------------------------------
# search grids


def polar_to_cartesian(params: np.ndarray) -> np.ndarray:
    """``(r, theta_1, ..., theta_{m-1}, phi) -> x`` in R^{m+1}."""
    params = np.asarray(params, dtype=float)
    r = params[..., 0]
    ang = params[..., 1:]
    m = ang.shape[-1]
    out = np.empty(params.shape)
    s = np.ones(r.shape)
    for k in range(m - 1):
        out[..., k] = s * np.cos(ang[..., k])
        s = s * np.sin(ang[..., k])
    out[..., m - 1] = s * np.cos(ang[..., m - 1])
    out[..., m] = s * np.sin(ang[..., m - 1])
    return out * r[..., None]


class SearchGrid:
    """Polar product grid over the ball used by the pole search.

    Parameters
    ----------
    m : int
    radial_step : float
        Spacing of the radial levels ``0, dr, 2 dr, ..., r_max``.
    r_max : float
        Outermost level; must be ``< 1``.
    n_angular : int, optional
        Points per angle.  Polar angles sit at midpoints of ``(0, pi)``, the
        azimuth covers ``[0, 2 pi)``.  Defaults to 48, 24, 12 for m = 1, 2, 3.
    refine_rounds : int
        Local refinement rounds, each halving the spacing around the incumbent.

    Grid points are ordered lexicographically in ``(r, theta_1, ..., phi)``
    indices; the origin is a single point with index 0.
    """

    domain = Domain.BALL

    def __init__(self, m: int, radial_step: float = 0.05, r_max: float = 0.95, n_angular: Optional[int] = None, refine_rounds: int = 2):
        self.m = cl.check_dim(m)
        if not 0.0 < r_max < 1.0:
            raise ConfigError("r_max", f"search radius must lie in (0, 1), got {r_max}")
        if not 0.0 < radial_step <= r_max:
            raise ConfigError("radial_step", f"radial step must lie in (0, r_max], got {radial_step}")
        self.radial_step = float(radial_step)
        self.r_max = float(r_max)
        self.n_angular = int(n_angular or _default_angular(self.m))
        if self.n_angular < 1:
            raise ConfigError("n_angular", "need at least one angular point")
        self.refine_rounds = int(refine_rounds)
        if self.refine_rounds < 0:
            raise ConfigError("refine_rounds", "refinement rounds must be >= 0")
        n_levels = int(np.floor(self.r_max / self.radial_step + 1e-9))
        radii = self.radial_step * np.arange(1, n_levels + 1)
        na = self.n_angular
        polar = (np.arange(na) + 0.5) * np.pi / na
        azim = 2.0 * np.pi * np.arange(na) / na
        axes = [radii] + [polar] * (self.m - 1) + [azim]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.m + 1)
        origin = np.zeros((1, self.m + 1))
        self.params = np.vstack([origin, mesh])
        self.params.setflags(write=False)
        self.spacing = np.array([self.radial_step] + [np.pi / na] * (self.m - 1) + [2.0 * np.pi / na])

    def __len__(self):
        return self.params.shape[0]

    def to_points(self, params) -> np.ndarray:
        return polar_to_cartesian(params)

    def points(self) -> np.ndarray:
        return self.to_points(self.params)

    def clip(self, params: np.ndarray) -> np.ndarray:
        params = params.copy()
        params[..., 0] = np.clip(params[..., 0], 0.0, self.r_max)
        return params

    def get_params(self) -> dict:
        return {"m": self.m, "radial_step": self.radial_step, "r_max": self.r_max, "n_angular": self.n_angular, "refine_rounds": self.refine_rounds}

    def to_json(self) -> dict:
        return {"domain": "ball", **self.get_params()}


class HalfSpaceSearchGrid:
    """Cartesian box grid ``x_0 in {h, 2h, ..., x0_max}``, ``x_1..x_m in [-L, L]``."""

    domain = Domain.HALFSPACE

    def __init__(self, m: int, x0_step: float = 0.1, x0_max: float = 2.0, extent: float = 3.0, n_lateral: int = 25, refine_rounds: int = 2):
        self.m = cl.check_dim(m)
        if not 0.0 < x0_step <= x0_max:
            raise ConfigError("x0_step", "need 0 < x0_step <= x0_max")
        if extent <= 0 or n_lateral < 1:
            raise ConfigError("extent", "lateral box must be nonempty")
        self.x0_step, self.x0_max, self.extent = float(x0_step), float(x0_max), float(extent)
        self.n_lateral = int(n_lateral)
        self.refine_rounds = int(refine_rounds)
        n_levels = int(np.floor(self.x0_max / self.x0_step + 1e-9))
        levels = self.x0_step * np.arange(1, n_levels + 1)
        lateral = np.linspace(-self.extent, self.extent, self.n_lateral)
        axes = [levels] + [lateral] * self.m
        self.params = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.m + 1)
        self.params.setflags(write=False)
        dl = lateral[1] - lateral[0] if self.n_lateral > 1 else self.extent
        self.spacing = np.array([self.x0_step] + [dl] * self.m)

    def __len__(self):
        return self.params.shape[0]

    def to_points(self, params) -> np.ndarray:
        return np.asarray(params, dtype=float)

    def points(self) -> np.ndarray:
        return np.array(self.params)

    def clip(self, params: np.ndarray) -> np.ndarray:
        params = params.copy()
        params[..., 0] = np.clip(params[..., 0], 0.5 * self.x0_step, self.x0_max)
        return params

    def get_params(self) -> dict:
        return {"m": self.m, "x0_step": self.x0_step, "x0_max": self.x0_max, "extent": self.extent, "n_lateral": self.n_lateral, "refine_rounds": self.refine_rounds}

    def to_json(self) -> dict:
        return {"domain": "halfspace", **self.get_params()}


def grid_from_json(obj: dict):
    obj = dict(obj)
    domain = Domain.parse(obj.pop("domain", "ball"))
    try:
        return SearchGrid(**obj) if domain is Domain.BALL else HalfSpaceSearchGrid(**obj)
    except TypeError as exc:
        raise ConfigError("grid", str(exc)) from None


def default_grid(domain, m: int):
    return SearchGrid(m) if Domain.parse(domain) is Domain.BALL else HalfSpaceSearchGrid(m)


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class AfdState:
    """Value passed between decomposition steps.

    Attributes
    ----------
    tm : TMSystem
    f_atoms : ndarray, shape (n, 2**m)
        ``<f, atom_l>`` for the atoms of ``tm``.
    tm_coeffs : ndarray, shape (n, 2**m)
        ``d_n = <T_n, T_n>^{-1} <f, T_n>`` so that ``f_{n+1} = f_n - T_n d_n``.
    coefficients : ndarray, shape (n, 2**m)
        ``c_n = ||T_n|| d_n``, the coefficients of ``B_n``.
    term_energies : ndarray, shape (n,)
        ``||B_n c_n||^2``.
    norm_sq : float
        ``||f||^2``.
    """

    tm: TMSystem
    norm_sq: float
    f_atoms: np.ndarray = field(default=None, repr=False)
    tm_coeffs: np.ndarray = field(default=None, repr=False)
    coefficients: np.ndarray = field(default=None, repr=False)
    term_energies: np.ndarray = field(default=None)

    def __post_init__(self):
        size = 1 << self.tm.m
        n = len(self.tm)
        for name, shape in (("f_atoms", (n, size)), ("tm_coeffs", (n, size)), ("coefficients", (n, size)), ("term_energies", (n,))):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.zeros(shape))
            getattr(self, name).setflags(write=False)

    @classmethod
    def initial(cls, f: HardyFunction) -> "AfdState":
        return cls(tm=TMSystem.empty(f.domain, f.m), norm_sq=float(f.norm_sq))

    @property
    def m(self) -> int:
        return self.tm.m

    @property
    def n_steps(self) -> int:
        return len(self.tm)

    @property
    def poles(self) -> np.ndarray:
        return self.tm.poles

    @property
    def residual_energies(self) -> np.ndarray:
        """``||f_1||^2, ..., ||f_{N+1}||^2`` (energy before each step, then the final residual)."""
        return self.norm_sq - np.concatenate([[0.0], np.cumsum(self.term_energies)])

    @property
    def residual_energy(self) -> float:
        return float(self.residual_energies[-1])

    def residual_at(self, f: HardyFunction, x) -> np.ndarray:
        """``f_{N+1}(x) = f(x) - sum_n T_n(x) d_n``."""
        return f.value(x) - reconstruct(self, x)

    def to_rows(self) -> list:
        """One record per step for CSV output."""
        rows = []
        res = self.residual_energies
        for n in range(self.n_steps):
            atom = self.tm.atoms[n]
            c = self.coefficients[n]
            rows.append(
                {
                    "step": n + 1,
                    "pole": [float(v) for v in atom.pole],
                    "direction": None if atom.direction is None else [float(v) for v in atom.direction],
                    "coeff_sc": float(c[0]),
                    "coeff_nsc": [float(v) for v in c[1:]],
                    "term_energy": float(self.term_energies[n]),
                    "residual_energy": float(res[n + 1]),
                }
            )
        return rows


def _solve_batch(G: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``G^{-1} h`` for batches of multivectors."""
    if G.shape[-1] == 1:
        return h / G
    return np.linalg.solve(cl.left_matrix(G), h[..., None])[..., 0]


def _energies(h, acc_gram, self_gram):
    """Candidate energies from ``h``, the correction ``sum t G^{-1} conj(t)`` and ``<D, D>``."""
    G = self_gram - acc_gram
    scale = self_gram[..., 0]
    ok = G[..., 0] > DEGENERATE_RTOL * scale
    out = np.zeros(G.shape[:-1])
    if np.any(ok):
        x = _solve_batch(G[ok], h[ok])
        out[ok] = _sc_conj_prod(h[ok], x)
    return np.maximum(out, 0.0)


def _sc_conj_prod(a, b):
    """``Sc(conj(a) b)`` for arrays of multivectors."""
    return np.sum(a * b, axis=-1)


def _atom_self_gram(domain, poles) -> np.ndarray:
    poles = np.asarray(poles, dtype=float)
    m = poles.shape[-1] - 1
    out = np.zeros(poles.shape[:-1] + (1 << m,))
    if Domain.parse(domain) is Domain.BALL:
        out[..., 0] = (1.0 - np.sum(poles**2, axis=-1)) ** (-m)
    else:
        out[..., 0] = (2.0 * poles[..., 0]) ** (-m)
    return out


def _tm_values(state: AfdState, vals: np.ndarray) -> np.ndarray:
    """``T_i`` from atom values ``vals`` of shape ``(n, ..., 2**m)``."""
    if state.n_steps == 0:
        return np.zeros_like(vals)
    R = cl.right_matrix(state.tm.lam)  # (n, n, S, S); lower triangular in (j, i)
    return np.einsum("i...b,jiab->j...a", vals, R)


def _corrections(state: AfdState, t: np.ndarray, fval: np.ndarray):
    """``h`` and the Gram correction from ``t_i = <T_i, D>`` and ``<f, D>``."""
    h = np.array(fval, dtype=float)
    if state.n_steps == 0:
        return h, np.zeros_like(h)
    ginv = cl.inverse_array(state.tm.self_grams)
    h -= np.einsum("i...b,iab->...a", t, cl.right_matrix(state.tm_coeffs))
    u = np.einsum("i...b,iab->i...a", t, cl.right_matrix(ginv))
    acc = cl.gp(u, cl.conj(t)).sum(axis=0)
    return h, acc


def _excluded(state: AfdState, points: np.ndarray) -> np.ndarray:
    mask = np.zeros(points.shape[:-1], dtype=bool)
    for p in state.poles:
        mask |= np.linalg.norm(points - p, axis=-1) <= POLE_MATCH_TOL
    return mask


def plain_energies(state: AfdState, f: HardyFunction, points) -> np.ndarray:
    """Energies of plain candidates ``S_a`` at ``points`` (shape ``(..., m+1)``).

    Points that coincide with a selected pole get energy 0; those candidates
    are scored through :func:`derivative_energies`.
    """
    points = np.asarray(points, dtype=float)
    t = _tm_values(state, state.tm.atom_values(points))
    h, acc = _corrections(state, t, f.value(points))
    e = _energies(h, acc, _atom_self_gram(state.tm.domain, points))
    e[_excluded(state, points)] = 0.0
    return e


def direction_grid(m: int, degree: int = 6) -> np.ndarray:
    """Unit directions tried for derivative atoms: the axes, then sphere nodes."""
    return np.vstack([np.eye(m + 1), build_grid(m, degree).nodes])


def derivative_energies(state: AfdState, f: HardyFunction, poles, directions) -> np.ndarray:
    """Energies of derivative atoms ``d_w S_b`` at selected poles ``b``.

    All quantities are linear (or quadratic, for ``<D, D>``) in the direction,
    so they are assembled from the ``m + 1`` coordinate partials.

    Parameters
    ----------
    poles : array_like, shape (P, m+1) or (m+1,)
    directions : array_like, shape (W, m+1)

    Returns
    -------
    ndarray, shape (P, W) (or (W,) for a single pole)
    """
    B = np.asarray(poles, dtype=float)
    single = B.ndim == 1
    B = np.atleast_2d(B)
    eye = np.eye(state.m + 1)
    W = np.asarray(directions, dtype=float)
    # partials of every atom at every pole: (n, P, m+1, S)
    dvals = np.stack([np.stack([atom_derivative(a, B, e) for e in eye], axis=1) for a in state.tm.atoms])
    t = np.einsum("wk,ipkc->ipwc", W, _tm_values(state, dvals))
    df = np.stack([f.derivative(B, e) for e in eye], axis=1)
    fval = np.einsum("wk,pkc->pwc", W, df)
    K = np.stack([np.stack([kernel_value(state.tm.domain, B, B, dy=ek, dx=el) for el in eye], axis=1) for ek in eye], axis=1)
    DD = np.einsum("wk,wl,pklc->pwc", W, W, K)
    h, acc = _corrections(state, t, fval)
    e = _energies(h, acc, DD)
    return e[0] if single else e


def term_energy(state: AfdState, a, f: HardyFunction, direction=None) -> float:
    """Energy captured by appending pole ``a`` to the state.

    Computed from Gram entries of the candidate atom against the existing
    atoms, independently of the grid caches used by :func:`msp_search`.
    """
    atom = state.tm.next_atom(a, direction)
    return atom_energy(state, atom, f)


def atom_energy(state: AfdState, atom: KernelAtom, f: HardyFunction) -> float:
    n = state.n_steps
    size = 1 << state.m
    g = np.array([gram_entry(at, atom) for at in state.tm.atoms]).reshape(n, size)
    t = np.zeros((n, size))
    for i in range(n):
        for l in range(i + 1):
            t[i] += cl.gp(g[l], state.tm.lam[i, l])
    h, acc = _corrections(state, t, f.inner_atom(atom))
    return float(_energies(h[None], acc[None], gram_entry(atom, atom)[None])[0])


class Selection(NamedTuple):
    atom: KernelAtom
    energy: float
    grid_index: int


class SearchCache:
    """Per-grid fields ``h = f_n(a)`` and ``sum_i T_i(a) G_i^{-1} conj(T_i(a))``.

    Bound to one ``(f, grid)`` pair, updated lazily as the state grows.
    """

    def __init__(self, f: HardyFunction, grid):
        self.f = f
        self.grid = grid
        self.points = grid.points()
        self.self_gram = _atom_self_gram(grid.domain, self.points)
        self.h = np.asarray(f.value(self.points), dtype=float).copy()
        self.acc = np.zeros_like(self.h)
        self.atom_vals = []
        self.excluded = np.zeros(len(grid), dtype=bool)
        self.n_done = 0

    def update(self, state: AfdState):
        if state.n_steps < self.n_done:
            raise ValueError("search cache is ahead of the state")
        tm = state.tm
        while self.n_done < state.n_steps:
            n = self.n_done
            atom = tm.atoms[n]
            self.atom_vals.append(atom_eval(atom, self.points))
            T = np.zeros_like(self.h)
            for i in range(n + 1):
                T += cl.gp(self.atom_vals[i], tm.lam[n, i])
            ginv = cl.inverse_array(tm.self_grams[n])
            self.h -= cl.gp(T, state.tm_coeffs[n])
            self.acc += cl.gp(cl.gp(T, ginv), cl.conj(T))
            self.excluded |= np.linalg.norm(self.points - atom.pole, axis=-1) <= POLE_MATCH_TOL
            self.n_done += 1

    def energies(self, state: AfdState) -> np.ndarray:
        self.update(state)
        e = _energies(self.h, self.acc, self.self_gram)
        e[self.excluded] = 0.0
        return e


def _refine(state, f, grid, center_params, best_energy):
    offsets = np.array(list(itertools.product((0.0, -1.0, 1.0), repeat=grid.m + 1)))
    step = grid.spacing
    params, energy = center_params, best_energy
    for _ in range(grid.refine_rounds):
        step = step / 2.0
        cand = grid.clip(params + offsets * step)
        e = plain_energies(state, f, grid.to_points(cand))
        k = int(np.argmax(e))
        if e[k] > energy:
            params, energy = cand[k], float(e[k])
    return params, energy


def msp_search(state: AfdState, f: HardyFunction, grid, cache: Optional[SearchCache] = None, direction_degree: int = 6) -> Selection:
    """Maximum selection over the grid, local refinement, and repeated-pole candidates.

    Returns the selected atom.  Ties go to the lowest grid index; a plain
    candidate beats a derivative candidate of equal energy.
    """
    if len(grid) == 0:
        raise ValueError("empty search grid")
    if cache is None:
        cache = SearchCache(f, grid)
    e = cache.energies(state)
    k = int(np.argmax(e))
    params, best = _refine(state, f, grid, grid.params[k], float(e[k]))
    atom = KernelAtom(state.tm.domain, grid.to_points(params))
    if best <= 0.0 and e[k] <= 0.0:
        atom = KernelAtom(state.tm.domain, grid.to_points(grid.params[0]))
    poles = []
    for at in state.tm.atoms:
        if any(np.array_equal(at.pole, p) for p in poles):
            continue
        if state.tm.multiplicity(at.pole) < state.m + 1:
            poles.append(at.pole)
    if poles:
        W = direction_grid(state.m, direction_degree)
        de = derivative_energies(state, f, np.array(poles), W)
        p, j = np.unravel_index(int(np.argmax(de)), de.shape)
        if de[p, j] > best:
            best = float(de[p, j])
            atom = KernelAtom(state.tm.domain, poles[p], W[j])
            k = -1
    return Selection(atom, float(best), k)


def afd_step(state: AfdState, f: HardyFunction, grid=None, cache: Optional[SearchCache] = None, atom: Optional[KernelAtom] = None) -> AfdState:
    """One decomposition step; ``atom`` overrides the search (e.g. a user-given first pole)."""
    if grid is None:
        grid = default_grid(state.tm.domain, state.m)
    if atom is None:
        atom = msp_search(state, f, grid, cache).atom
    tm = state.tm.extend_atom(state.tm.next_atom(atom.pole, atom.direction) if atom.direction is None else atom)
    n = state.n_steps
    fa = np.vstack([state.f_atoms, np.asarray(f.inner_atom(tm.atoms[n]), dtype=float)[None]])
    fT = np.zeros(1 << state.m)
    for l in range(n + 1):
        fT += cl.gp(cl.conj(tm.lam[n, l]), fa[l])
    d = cl.gp(cl.inverse_array(tm.self_grams[n]), fT)
    energy = max(float(_sc_conj_prod(fT, d)), 0.0)
    return AfdState(
        tm=tm,
        norm_sq=state.norm_sq,
        f_atoms=fa,
        tm_coeffs=np.vstack([state.tm_coeffs, d[None]]),
        coefficients=np.vstack([state.coefficients, (tm.norms[n] * d)[None]]),
        term_energies=np.append(state.term_energies, energy),
    )


def afd_run(f: HardyFunction, n_max: int, stop_tol: float = 1e-8, grid=None, first_pole=None, direction_degree: int = 6, callback=None) -> AfdState:
    """Iterate :func:`afd_step` until ``n_max`` steps or ``||f_N||^2 < stop_tol ||f||^2``."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if grid is None:
        grid = default_grid(f.domain, f.m)
    state = AfdState.initial(f)
    cache = SearchCache(f, grid)
    for n in range(n_max):
        if state.residual_energy <= stop_tol * state.norm_sq:
            break
        if n == 0 and first_pole is not None:
            state = afd_step(state, f, grid, cache, atom=KernelAtom(f.domain, np.asarray(first_pole, dtype=float)))
        else:
            sel = msp_search(state, f, grid, cache, direction_degree)
            if sel.energy <= ENERGY_FLOOR * state.norm_sq:
                break
            state = afd_step(state, f, grid, cache, atom=sel.atom)
        if callback is not None:
            callback(state)
    return state


def reconstruct(state: AfdState, x) -> np.ndarray:
    """Partial sum ``sum_n B_n(x) c_n``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (1 << state.m,))
    if state.n_steps == 0:
        return out
    T = _tm_values(state, state.tm.atom_values(x))
    for n in range(state.n_steps):
        out += cl.gp(T[n], state.tm_coeffs[n])
    return out


def partial_function(state: AfdState) -> Optional[AtomCombo]:
    """The partial sum as an :class:`AtomCombo` over the selected atoms."""
    n = state.n_steps
    if n == 0:
        return None
    coeffs = np.zeros((n, 1 << state.m))
    for j in range(n):
        for l in range(j + 1):
            coeffs[l] += cl.gp(state.tm.lam[j, l], state.tm_coeffs[j])
    return AtomCombo(state.tm.atoms, coeffs)


def residual_function(state: AfdState, f: AtomCombo) -> AtomCombo:
    """``f - sum_n T_n d_n`` as an explicit atom combination."""
    p = partial_function(state)
    return f if p is None else f - p


def project(tm: TMSystem, f: HardyFunction) -> AtomCombo:
    """Orthogonal projection of ``f`` onto the right span of ``tm``."""
    n = len(tm)
    fa = np.array([f.inner_atom(a) for a in tm.atoms]).reshape(n, -1)
    coeffs = np.zeros((n, 1 << tm.m))
    for j in range(n):
        fT = np.zeros(1 << tm.m)
        for l in range(j + 1):
            fT += cl.gp(cl.conj(tm.lam[j, l]), fa[l])
        d = cl.gp(cl.inverse_array(tm.self_grams[j]), fT)
        for l in range(j + 1):
            coeffs[l] += cl.gp(tm.lam[j, l], d)
    return AtomCombo(tm.atoms, coeffs)


def reorder_projection_check(poles: Sequence, f: HardyFunction, order: Optional[Sequence[int]] = None, rng=None) -> float:
    """Norm of the difference between projections onto two orderings of a pole set.

    ``order`` defaults to the reversed sequence when ``rng`` is None, else a
    random permutation.
    """
    poles = [np.asarray(p, dtype=float) for p in poles]
    if len(poles) < 2:
        return 0.0
    if order is None:
        order = list(reversed(range(len(poles)))) if rng is None else list(np.random.default_rng(rng).permutation(len(poles)))
    p1 = project(TMSystem.from_poles(f.domain, poles), f)
    p2 = project(TMSystem.from_poles(f.domain, [poles[i] for i in order]), f)
    diff = p1 - p2
    return float(np.sqrt(max(diff.norm_sq, 0.0)))


# ---------------------------------------------------------------------------
# estimator


class AdaptiveFourierDecomposition(BaseEstimator):
    """Greedy TM-system expansion of a Hardy function.

    Parameters
    ----------
    n_max : int
        Maximum number of steps.
    stop_tol : float
        Stop once ``||f_N||^2 < stop_tol * ||f||^2``.
    radial_step, r_max, n_angular, refine_rounds
        Ball search grid (see :class:`SearchGrid`).
    direction_degree : int
        Sphere-rule degree for the derivative-atom direction grid.
    first_pole : array_like, optional
        Use this pole for the first step instead of searching.

    Attributes
    ----------
    state_ : AfdState
    poles_ : ndarray, shape (n_steps, m+1)
    coefficients_ : ndarray, shape (n_steps, 2**m)
    term_energies_, residual_energies_ : ndarray
    n_steps_ : int
    """

    def __init__(self, n_max: int = 10, stop_tol: float = 1e-8, radial_step: float = 0.05, r_max: float = 0.95, n_angular=None, refine_rounds: int = 2, direction_degree: int = 6, first_pole=None):
        self.n_max = n_max
        self.stop_tol = stop_tol
        self.radial_step = radial_step
        self.r_max = r_max
        self.n_angular = n_angular
        self.refine_rounds = refine_rounds
        self.direction_degree = direction_degree
        self.first_pole = first_pole

    def _grid(self, f: HardyFunction):
        if f.domain is Domain.BALL:
            return SearchGrid(f.m, self.radial_step, self.r_max, self.n_angular, self.refine_rounds)
        return HalfSpaceSearchGrid(f.m, refine_rounds=self.refine_rounds)

    def fit(self, f: HardyFunction, y=None, grid=None):
        if not isinstance(f, HardyFunction):
            raise TypeError("fit expects a HardyFunction")
        if int(self.n_max) < 0:
            raise ConfigError("n_max", "n_max must be >= 0")
        if not self.stop_tol >= 0:
            raise ConfigError("stop_tol", "stop_tol must be >= 0")
        grid = grid if grid is not None else self._grid(f)
        self.grid_ = grid
        self.state_ = afd_run(f, int(self.n_max), self.stop_tol, grid, self.first_pole, self.direction_degree)
        self.poles_ = self.state_.poles
        self.coefficients_ = np.array(self.state_.coefficients)
        self.term_energies_ = np.array(self.state_.term_energies)
        self.residual_energies_ = self.state_.residual_energies
        self.n_steps_ = self.state_.n_steps
        self.m_ = f.m
        return self

    def _check_fitted(self):
        if not hasattr(self, "state_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("call fit before using this estimator")

    def predict(self, X) -> np.ndarray:
        """Reconstruction ``sum B_n(x) c_n`` at points ``X`` of shape ``(n, m+1)``."""
        self._check_fitted()
        from .validation import check_points

        return reconstruct(self.state_, check_points(X, self.m_))

    def score(self, f: HardyFunction, y=None) -> float:
        """Captured energy fraction ``1 - ||f_N||^2 / ||f||^2``."""
        self._check_fitted()
        if self.state_.norm_sq == 0:
            return 1.0
        return 1.0 - self.state_.residual_energy / self.state_.norm_sq
