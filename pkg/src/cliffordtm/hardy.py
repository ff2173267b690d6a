"""Elements of the monogenic Hardy space used as AFD inputs.

Every function exposes the data the adaptive decomposition needs through the
reproducing identity: values ``f(a) = <f, S_a>``, pole-direction derivatives
``<f, d_w S_a>``, and ``||f||^2``.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from . import clifford as cl
from .clifford import Multivector
from .kernels import Domain, KernelAtom, atom_derivative, atom_eval, gram_entry, kernel_value, self_gram_plain
from .sphere import SphereGrid, build_grid, integrate



class HardyFunction(ABC):
    """Abstract left-monogenic function with Hardy-space norm."""

    domain: Domain
    m: int

    @abstractmethod
    def value(self, x) -> np.ndarray:
        """``f(x)`` for points of shape ``(..., m+1)``."""

    @abstractmethod
    def derivative(self, x, direction) -> np.ndarray:
        """Directional derivative of ``f`` along ``direction``."""

    @property
    @abstractmethod
    def norm_sq(self) -> float:
        """``||f||^2 = Sc <f, f>``."""

    def inner_atom(self, atom: KernelAtom) -> np.ndarray:
        """``<f, atom>``."""
        if atom.direction is None:
            return self.value(atom.pole)
        return self.derivative(atom.pole, atom.direction)

    def __call__(self, x):
        return self.value(x)


class AtomCombo(HardyFunction):
    """Finite combination ``sum_k atom_k c_k``.

    Parameters
    ----------
    atoms : sequence of KernelAtom
    coeffs : sequence of Multivector or ndarray, shape (n, 2**m)
    """

    def __init__(self, atoms: Sequence[KernelAtom], coeffs):
        if len(atoms) == 0:
            raise ValueError("an AtomCombo needs at least one atom")
        self.atoms = tuple(atoms)
        self.domain = self.atoms[0].domain
        self.m = self.atoms[0].m
        if any(a.domain is not self.domain or a.m != self.m for a in self.atoms):
            raise ValueError("atoms must share domain and dimension")
        c = np.array([x.coeffs if isinstance(x, Multivector) else x for x in coeffs], dtype=float)
        if c.shape != (len(self.atoms), 1 << self.m):
            raise ValueError(f"coefficients must have shape ({len(self.atoms)}, {1 << self.m})")
        c.setflags(write=False)
        self.coeffs = c
        self._norm_sq = None

    @classmethod
    def from_poles(cls, domain, poles, coeffs, normalized: bool = False) -> "AtomCombo":
        """``sum S_{b_k} c_k``, or ``sum B_{b_k} c_k`` with ``B_b = S_b / ||S_b||``."""
        atoms = [KernelAtom(domain, np.asarray(p, dtype=float)) for p in poles]
        c = np.array([x.coeffs if isinstance(x, Multivector) else x for x in coeffs], dtype=float)
        if normalized:
            scale = np.array([self_gram_plain(domain, a.pole) ** -0.5 for a in atoms])
            c = c * scale[:, None]
        return cls(atoms, c)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (1 << self.m,))
        for a, c in zip(self.atoms, self.coeffs):
            out += cl.gp(atom_eval(a, x), c)
        return out

    def derivative(self, x, direction):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (1 << self.m,))
        for a, c in zip(self.atoms, self.coeffs):
            out += cl.gp(atom_derivative(a, x, direction), c)
        return out

    def gram(self) -> np.ndarray:
        n = len(self.atoms)
        G = np.zeros((n, n, 1 << self.m))
        for p in range(n):
            for q in range(p + 1):
                G[p, q] = gram_entry(self.atoms[p], self.atoms[q])
                G[q, p] = cl.conj(G[p, q])
        return G

    def inner_self(self) -> Multivector:
        from .cmodule import combine

        return Multivector(self.m, combine(self.gram(), self.coeffs, self.coeffs))

    @property
    def norm_sq(self) -> float:
        if self._norm_sq is None:
            self._norm_sq = float(self.inner_self().sc)
        return self._norm_sq

    def __add__(self, other: "AtomCombo") -> "AtomCombo":
        return AtomCombo(self.atoms + other.atoms, np.vstack([self.coeffs, other.coeffs]))

    def __sub__(self, other: "AtomCombo") -> "AtomCombo":
        return AtomCombo(self.atoms + other.atoms, np.vstack([self.coeffs, -other.coeffs]))

    def scale(self, s: float) -> "AtomCombo":
        return AtomCombo(self.atoms, self.coeffs * s)

    def to_json(self) -> dict:
        return {
            "type": "atom_combo",
            "domain": self.domain.value,
            "m": self.m,
            "atoms": [a.to_json() for a in self.atoms],
            "coeffs": [[float(v) for v in c] for c in self.coeffs],
        }


class BoundaryBacked(HardyFunction):
    """Hardy function known through boundary samples on a sphere grid.

    Interior values come from the Szego-kernel quadrature
    ``f(a) = sum_j w_j conj(S_a(eta_j)) F_j``.  Accuracy degrades as
    ``|a|**grid.degree`` when ``a`` approaches the sphere.
    """

    def __init__(self, grid: SphereGrid, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (len(grid), 1 << grid.m):
            raise ValueError(f"samples must have shape ({len(grid)}, {1 << grid.m})")
        samples.setflags(write=False)
        self.grid = grid
        self.samples = samples
        self.domain = Domain.BALL
        self.m = grid.m

    def _reproduce(self, x, dy=None):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.m + 1)
        out = np.empty((flat.shape[0], 1 << self.m))
        for i, a in enumerate(flat):
            k = kernel_value(self.domain, a, self.grid.nodes, dy=dy)
            out[i] = integrate(self.grid, cl.gp(cl.conj(k), self.samples))
        return out.reshape(x.shape[:-1] + (1 << self.m,))

    def value(self, x):
        return self._reproduce(x)

    def derivative(self, x, direction):
        return self._reproduce(x, dy=np.asarray(direction, dtype=float))

    @property
    def norm_sq(self) -> float:
        return float(integrate(self.grid, np.sum(self.samples**2, axis=1)))

    def to_json(self) -> dict:
        return {
            "type": "boundary",
            "domain": self.domain.value,
            "m": self.m,
            "grid_degree": self.grid.degree,
            "samples": [[float(v) for v in s] for s in self.samples],
        }


def hardy_from_json(obj: dict) -> HardyFunction:
    """Parse the JSON encodings produced by ``to_json``."""
    kind = obj.get("type", "atom_combo")
    if kind == "atom_combo":
        atoms = [KernelAtom.from_json(a) for a in obj["atoms"]]
        return AtomCombo(atoms, np.array(obj["coeffs"], dtype=float))
    if kind == "boundary":
        grid = build_grid(int(obj["m"]), int(obj["grid_degree"]))
        return BoundaryBacked(grid, np.array(obj["samples"], dtype=float))
    if kind == "schwarz_lift":
        from .embed import BoundarySignal, schwarz_lift

        grid = build_grid(int(obj["m"]), int(obj["grid_degree"]))
        return schwarz_lift(BoundarySignal(grid, np.array(obj["samples"], dtype=float)))
    if kind == "cauchy_lift":
        from .embed import CauchyLiftFunction, FlatGrid

        return CauchyLiftFunction(FlatGrid(**obj["grid"]), np.array(obj["samples"], dtype=float))
    raise ValueError(f"unknown Hardy function type {kind!r}")


def load_hardy(path) -> HardyFunction:
    with open(path) as fh:
        return hardy_from_json(json.load(fh))
