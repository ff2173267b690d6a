"""Clifford Takenaka-Malmquist systems.

A :class:`TMSystem` is the Gram-Schmidt orthogonalization of a sequence of
Szego kernel atoms.  A repeated pole contributes a first-order pole
derivative atom instead of a second copy of the kernel, which realizes the
limit of two merging poles.  All Gram data come from the reproducing identity,
so building ``n`` functions costs ``O(n^2)`` kernel evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import clifford as cl
from .clifford import Multivector
from .cmodule import combine, next_row
from .exceptions import NotInvertible, UnsupportedMultiplicity
from .kernels import Domain, KernelAtom, atom_eval, check_pole, gram_entry

POLE_MATCH_TOL = 1e-9


def default_direction(m: int, order: int) -> np.ndarray:
    """Direction of the ``order``-th derivative atom at a repeated pole.

    ``e_0, e_1, ..., e_{m-1}``; the ``e_m`` partial is dependent on the others
    in the module sense.
    """
    d = np.zeros(m + 1)
    d[order - 1] = 1.0
    return d


@dataclass(frozen=True)
class TMSystem:
    """Orthogonal system ``T_n = sum_{i<=n} atom_i lam[n, i]``.

    Attributes
    ----------
    domain : Domain
    m : int
    atoms : tuple of KernelAtom
    gram : ndarray, shape (n, n, 2**m)
        ``<atom_p, atom_q>``.
    lam : ndarray, shape (n, n, 2**m)
        Lower triangular, unit diagonal.
    self_grams : ndarray, shape (n, 2**m)
        ``<T_n, T_n>``.
    norms : ndarray, shape (n,)
        ``||T_n|| = sqrt(Sc <T_n, T_n>)``.
    """

    domain: Domain
    m: int
    atoms: tuple = ()
    gram: np.ndarray = field(default=None, repr=False)
    lam: np.ndarray = field(default=None, repr=False)
    self_grams: np.ndarray = field(default=None, repr=False)
    norms: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain.parse(self.domain))
        object.__setattr__(self, "m", cl.check_dim(self.m))
        size = 1 << self.m
        n = len(self.atoms)
        if self.gram is None:
            object.__setattr__(self, "gram", np.zeros((n, n, size)))
            object.__setattr__(self, "lam", np.zeros((n, n, size)))
            object.__setattr__(self, "self_grams", np.zeros((n, size)))
            object.__setattr__(self, "norms", np.zeros(n))
        for arr in (self.gram, self.lam, self.self_grams, self.norms):
            arr.setflags(write=False)

    @classmethod
    def empty(cls, domain, m: int) -> "TMSystem":
        return cls(domain=domain, m=m)

    @classmethod
    def from_poles(cls, domain, poles: Sequence, directions: Optional[Sequence] = None) -> "TMSystem":
        poles = [np.asarray(p, dtype=float) for p in poles]
        if not poles:
            raise ValueError("need at least one pole")
        tm = cls.empty(domain, poles[0].shape[0] - 1)
        for i, p in enumerate(poles):
            tm = tm.extend(p, None if directions is None else directions[i])
        return tm

    def __len__(self):
        return len(self.atoms)

    @property
    def poles(self) -> np.ndarray:
        return np.array([a.pole for a in self.atoms]).reshape(len(self), self.m + 1)

    def multiplicity(self, a) -> int:
        """Number of atoms whose pole coincides with ``a``."""
        a = np.asarray(a, dtype=float)
        return sum(1 for at in self.atoms if np.linalg.norm(at.pole - a) <= POLE_MATCH_TOL)

    def matching_pole(self, a) -> Optional[np.ndarray]:
        a = np.asarray(a, dtype=float)
        for at in self.atoms:
            if np.linalg.norm(at.pole - a) <= POLE_MATCH_TOL:
                return at.pole
        return None

    def next_atom(self, a, direction=None) -> KernelAtom:
        """Atom that :meth:`extend` would append for pole ``a``."""
        a = check_pole(self.domain, a)
        if a.shape[0] != self.m + 1:
            raise ValueError(f"pole must have {self.m + 1} coordinates")
        existing = self.matching_pole(a)
        if existing is None:
            return KernelAtom(self.domain, a)
        mult = self.multiplicity(existing) + 1
        if mult > self.m + 1:
            raise UnsupportedMultiplicity(
                f"pole multiplicity {mult} exceeds m+1 = {self.m + 1}; second order pole derivatives are not supported"
            )
        if direction is None:
            direction = default_direction(self.m, mult - 1)
        return KernelAtom(self.domain, existing, np.asarray(direction, dtype=float))

    def extend(self, a, direction=None) -> "TMSystem":
        """Append the next TM function for pole ``a``.

        A pole within ``1e-9`` of an existing one adds a derivative atom along
        ``direction`` (default ``e_0``, then ``e_1``, ... for higher
        multiplicities).

        Raises
        ------
        UnsupportedMultiplicity
            If the multiplicity would exceed ``m + 1``.
        DegenerateElement
            If the new atom is numerically dependent on the previous ones.
        """
        return self.extend_atom(self.next_atom(a, direction))

    def extend_atom(self, atom: KernelAtom) -> "TMSystem":
        if atom.domain is not self.domain or atom.m != self.m:
            raise ValueError("atom does not match the system's domain/dimension")
        n = len(self)
        size = 1 << self.m
        G = np.zeros((n + 1, n + 1, size))
        G[:n, :n] = self.gram
        for l in range(n + 1):
            v = gram_entry(atom, self.atoms[l] if l < n else atom)
            G[n, l] = v
            G[l, n] = cl.conj(v)
        lam = np.zeros((n + 1, n + 1, size))
        lam[:n, :n] = self.lam
        row, sg = next_row(G, lam, self.self_grams, n)
        lam[n, : n + 1] = row
        try:
            cl.try_inverse(Multivector(self.m, sg))
        except NotInvertible as exc:  # pragma: no cover - excluded by the realizability theorem
            raise AssertionError(f"<T_{n + 1}, T_{n + 1}> is not invertible") from exc
        return TMSystem(
            domain=self.domain,
            m=self.m,
            atoms=self.atoms + (atom,),
            gram=G,
            lam=lam,
            self_grams=np.vstack([self.self_grams, sg[None, :]]),
            norms=np.append(self.norms, np.sqrt(sg[0])),
        )

    def atom_values(self, x) -> np.ndarray:
        """All atoms at ``x``: shape ``(n, ..., 2**m)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([atom_eval(a, x) for a in self.atoms]) if self.atoms else np.zeros((0,) + x.shape[:-1] + (1 << self.m,))

    def evaluate(self, n: int, x):
        """``(T_n(x), B_n(x))`` for ``1 <= n <= len(self)``."""
        if not 1 <= n <= len(self):
            raise IndexError(f"TM index {n} outside 1..{len(self)}")
        x = np.asarray(x, dtype=float)
        T = np.zeros(x.shape[:-1] + (1 << self.m,))
        for i in range(n):
            T += cl.gp(atom_eval(self.atoms[i], x), self.lam[n - 1, i])
        return T, T / self.norms[n - 1]

    def evaluate_all(self, x) -> np.ndarray:
        """``T_1..T_n`` at ``x``: shape ``(n, ..., 2**m)``."""
        vals = self.atom_values(x)
        out = np.zeros_like(vals)
        for j in range(len(self)):
            for i in range(j + 1):
                out[j] += cl.gp(vals[i], self.lam[j, i])
        return out

    def inner(self, j: int, l: int) -> Multivector:
        """``<T_j, T_l>`` (1-based) recomputed from the atom Gram array."""
        return Multivector(self.m, combine(self.gram, self.lam[j - 1], self.lam[l - 1]))

    def normalized_gram(self) -> np.ndarray:
        """``<B_j, B_l>`` for all pairs, shape ``(n, n, 2**m)``."""
        n = len(self)
        out = np.zeros((n, n, 1 << self.m))
        for j in range(n):
            for l in range(n):
                out[j, l] = combine(self.gram, self.lam[j], self.lam[l]) / (self.norms[j] * self.norms[l])
        return out

    def identity_defect(self) -> float:
        """Max coefficient deviation of the ``{B_n}`` Gram matrix from the identity."""
        n = len(self)
        if n == 0:
            return 0.0
        g = self.normalized_gram()
        target = np.zeros_like(g)
        target[np.arange(n), np.arange(n), 0] = 1.0
        return float(np.max(np.abs(g - target)))

    def scalar_gram_report(self) -> list:
        """``|NSc <T_n,T_n>| / Sc <T_n,T_n>`` for each ``n``."""
        return [float(np.linalg.norm(g[1:]) / g[0]) for g in self.self_grams]

    def to_json(self) -> dict:
        n = len(self)
        return {
            "domain": self.domain.value,
            "m": self.m,
            "atoms": [a.to_json() for a in self.atoms],
            "lambda": [[[float(v) for v in self.lam[j, i]] for i in range(j + 1)] for j in range(n)],
            "self_grams": [[float(v) for v in g] for g in self.self_grams],
            "norms": [float(v) for v in self.norms],
            "nsc_ratio": self.scalar_gram_report(),
            "gram_identity_defect": self.identity_defect(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TMSystem":
        tm = cls.empty(obj["domain"], int(obj["m"]))
        for a in obj["atoms"]:
            tm = tm.extend_atom(KernelAtom.from_json(a))
        return tm
