"""Entropic functionals in bits.

Eigenvalues below 1e-12 are treated as zero; conditional and coherent
information are returned raw (they are legitimately negative), mutual
information is clipped at zero when it dips below by at most 1e-9.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels
from .errors import LabelError
from .linalg import PureState, _as_labels, partial_trace

MI_CLIP_TOL = 1e-9


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log2 rho)``."""
    if isinstance(rho, PureState):
        return 0.0
    return float(kernels.entropy_bits(np.ascontiguousarray(rho.data)))


def _marginal_entropy(rho, labels) -> float:
    labels = _as_labels(labels)
    if isinstance(rho, PureState) and set(labels) == set(rho.shape.labels):
        return 0.0
    if set(labels) == set(rho.shape.labels) and tuple(labels) == rho.shape.labels:
        return von_neumann_entropy(rho)
    return von_neumann_entropy(partial_trace(rho, labels))


def _pair(rho, sys_a, sys_b):
    a = _as_labels(sys_a)
    b = _as_labels(sys_b)
    if not a or not b:
        raise LabelError("both subsystem groups must be non-empty")
    if set(a) & set(b):
        raise LabelError(f"subsystem groups overlap: {sorted(set(a) & set(b))}")
    for lab in a + b:
        rho.shape.index(lab)
    return a, b


def conditional_entropy(rho, sys_a, sys_b) -> float:
    """``H(A|B) = H(AB) - H(B)``; other subsystems are traced out first."""
    a, b = _pair(rho, sys_a, sys_b)
    return _marginal_entropy(rho, a + b) - _marginal_entropy(rho, b)


def mutual_information(rho, sys_a, sys_b) -> float:
    """``I(A;B) = H(A) + H(B) - H(AB)``."""
    a, b = _pair(rho, sys_a, sys_b)
    mi = _marginal_entropy(rho, a) + _marginal_entropy(rho, b) - _marginal_entropy(rho, a + b)
    if -MI_CLIP_TOL <= mi < 0.0:
        return 0.0
    return mi


def coherent_information(rho, sys_a, sys_b) -> float:
    """``I(A>B) = H(B) - H(AB) = -H(A|B)``."""
    return -conditional_entropy(rho, sys_a, sys_b)


def purity(rho) -> float:
    """``Tr rho^2``."""
    if isinstance(rho, PureState):
        return 1.0
    return float(np.real(np.sum(rho.data * rho.data.T)))

