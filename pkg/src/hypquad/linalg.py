"""Small symplectic linear-algebra helpers shared across modules.

Coordinates are ordered ``z = (p_1..p_n, q_1..q_n)`` and the symplectic
form is ``omega = sum dp_i ^ dq_i``, so ``omega(u, v) = u^T Omega v`` with
``Omega = [[0, I], [-I, 0]]``.  Hamiltonian vector fields are
``X_H = J0 grad H`` with ``J0 = -Omega``, i.e. ``pdot = -dH/dq`` and
``qdot = dH/dp``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _omega(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    m = np.block([[zero, eye], [-eye, zero]])
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _field(n: int) -> np.ndarray:
    m = -_omega(n)
    m.setflags(write=False)
    return m


def omega_matrix(n: int) -> np.ndarray:
    """Gram matrix of the standard symplectic form on R^{2n} (read-only, cached)."""
    return _omega(int(n))


def field_matrix(n: int) -> np.ndarray:
    """Matrix ``J0`` with ``X_H = J0 @ grad H`` (read-only, cached)."""
    return _field(int(n))


def symplectic_defect(m: np.ndarray) -> float:
    """Max-abs entry of ``M^T Omega M - Omega``."""
    n = m.shape[-1] // 2
    om = omega_matrix(n)
    return float(np.max(np.abs(np.swapaxes(m, -1, -2) @ om @ m - om)))


def sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def op_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def quadratic_hessian(a: np.ndarray) -> np.ndarray:
    """Hessian ``S`` of ``Q(p, q) = <A p, q>`` so that ``Q(z) = z^T S z / 2``."""
    n = a.shape[0]
    zero = np.zeros((n, n))
    return np.block([[zero, a.T], [a, zero]])
