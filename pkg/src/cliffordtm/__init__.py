"""Clifford algebra, monogenic Hardy spaces and adaptive Takenaka-Malmquist decompositions."""

from .afd import AdaptiveFourierDecomposition, AfdState, SearchGrid, afd_run, afd_step, msp_search, reconstruct, term_energy
from .clifford import Multivector, try_inverse
from .embed import HalfSpaceCauchyLift, SchwarzLift, cauchy_lift_halfspace, schwarz_lift
from .hardy import AtomCombo, BoundaryBacked, HardyFunction
from .kernels import Domain, KernelAtom, gram_entry, szego_eval
from .monogenics import orthobasis_Mk
from .tm import TMSystem

__version__ = "0.1.0"

__all__ = [
    "AdaptiveFourierDecomposition",
    "AfdState",
    "AtomCombo",
    "BoundaryBacked",
    "Domain",
    "HalfSpaceCauchyLift",
    "HardyFunction",
    "KernelAtom",
    "Multivector",
    "SchwarzLift",
    "SearchGrid",
    "TMSystem",
    "afd_run",
    "afd_step",
    "cauchy_lift_halfspace",
    "gram_entry",
    "msp_search",
    "orthobasis_Mk",
    "reconstruct",
    "schwarz_lift",
    "szego_eval",
    "term_energy",
    "try_inverse",
]
