"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from . import clifford as cl


def check_points(X, m: int) -> np.ndarray:
    """Validate an ``(n, m+1)`` array of finite evaluation points."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != m + 1:
        raise ValueError(f"points must have {m + 1} columns, got {X.shape[1]}")
    return X


def check_multivectors(C, m: int) -> np.ndarray:
    """Validate an ``(n, 2**m)`` coefficient array."""
    C = check_array(C, dtype=float, ensure_2d=True)
    if C.shape[1] != 1 << m:
        raise ValueError(f"multivector coefficients must have {1 << m} columns, got {C.shape[1]}")
    return C


def check_dimension(m) -> int:
    return cl.check_dim(m)


def check_samples(y, n_nodes: int) -> np.ndarray:
    """Finite real samples, one per quadrature node."""
    from .exceptions import LengthMismatch

    y = check_array(y, dtype=float, ensure_2d=False)
    if y.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if y.shape[0] != n_nodes:
        raise LengthMismatch(f"{y.shape[0]} samples for {n_nodes} nodes")
    return y
