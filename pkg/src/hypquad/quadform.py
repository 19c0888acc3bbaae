"""Hyperbolic quadratic forms with real spectrum.

A form is specified by its normal blocks ``(sigma, m)``; each block
contributes ``sigma * sum p_i q_i - sum p_i q_{i+1}`` so that the whole form
reads ``Q(p, q) = <A p, q>`` with ``A`` lower bidiagonal.  A symplectic
rescaling ``p_i -> s_i p_i, q_i -> q_i / s_i`` shrinks the strictly lower part
``E`` of ``A = D + E`` until the smallness conditions of the maximum
principle hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .linalg import field_matrix, omega_matrix, op_norm, quadratic_hessian, sym


class BlockSpecError(ValueError):
    """Raised for block specifications outside the supported class."""


class ComplexSpectrumError(BlockSpecError):
    """Raised for forms with complex eigenvalues (not supported)."""


@dataclass(frozen=True)
class BlockSpec:
    """Normal blocks ``(sigma, m)`` of a hyperbolic form with real spectrum."""

    blocks: tuple[tuple[float, int], ...]

    def __post_init__(self):
        blocks = tuple((float(s), int(m)) for s, m in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise BlockSpecError("dimension zero: empty block list")
        for sigma, m in blocks:
            if not np.isfinite(sigma) or sigma <= 0:
                raise BlockSpecError(f"sigma must be a positive real, got {sigma}")
            if m < 1:
                raise BlockSpecError(f"multiplicity must be >= 1, got {m}")

    @property
    def n(self) -> int:
        return sum(m for _, m in self.blocks)

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "BlockSpec":
        """Build from config records ``[{"sigma": .., "m": ..}, ...]``.

        Records carrying a non-zero ``"imag"`` part are rejected with
        :class:`ComplexSpectrumError`.
        """
        blocks = []
        for i, rec in enumerate(records):
            extra = sorted(set(rec) - {"sigma", "m", "imag"})
            if extra:
                raise BlockSpecError(f"blocks[{i}]: unknown key(s) {extra}")
            if float(rec.get("imag", 0.0)) != 0.0:
                raise ComplexSpectrumError(
                    f"blocks[{i}]: complex eigenvalues are not supported")
            blocks.append((rec["sigma"], rec.get("m", 1)))
        return cls(tuple(blocks))

    def to_records(self) -> list[dict]:
        return [{"sigma": s, "m": m} for s, m in self.blocks]


@dataclass(frozen=True)
class NormalFrame:
    """Matrix ``A = D + E`` of ``Q(p, q) = <A p, q>`` in (scaled) normal coordinates.

    ``lambda_`` is the smallest diagonal entry of ``D``; ``lambda_max`` the
    largest eigenvalue modulus of ``A``; ``form_norm`` is
    ``sup |Q(x)| / ||x||^2``, the largest eigenvalue modulus of the form
    ``Q`` with respect to the Euclidean norm.
    """

    A: np.ndarray
    scale: np.ndarray
    spec: BlockSpec | None = None
    D: np.ndarray = field(init=False, repr=False)
    E: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        a.setflags(write=False)
        s = np.array(self.scale, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "scale", s)
        d = np.diag(np.diag(a))
        e = np.tril(a, -1)
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "D", d)
        object.__setattr__(self, "E", e)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def lambda_(self) -> float:
        return float(np.min(np.diag(self.A)))

    @property
    def lambda_max(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    @property
    def form_norm(self) -> float:
        return 0.5 * op_norm(self.A)

    @property
    def hessian(self) -> np.ndarray:
        return quadratic_hessian(self.A)

    def Q(self, z: np.ndarray) -> np.ndarray:
        """Evaluate ``<A p, q>`` on the trailing axis of ``z``."""
        z = np.asarray(z, dtype=float)
        n = self.n
        p, q = z[..., :n], z[..., n:]
        return np.einsum("...i,ij,...j->...", q, self.A, p)

    def grad_Q(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z @ self.hessian.T

    def transport(self, z: np.ndarray, frame: "NormalFrame") -> np.ndarray:
        """Map coordinates of this frame to those of ``frame`` (same form)."""
        ratio = frame.scale / self.scale
        z = np.asarray(z, dtype=float)
        n = self.n
        return np.concatenate([z[..., :n] * ratio, z[..., n:] / ratio], axis=-1)

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "scale": self.scale.tolist(),
                "lambda": self.lambda_, "lambda_max": self.lambda_max,
                "form_norm": self.form_norm}


@dataclass(frozen=True)
class SmallnessReport:
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    cond_lyapunov: bool
    norm_E2: float
    norm_DE: float
    norm_ED: float
    norm_skew: float
    min_sym_A: float
    lam: float

    @property
    def ok(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii and self.cond_lyapunov

    def margins(self) -> dict:
        lam2 = self.lam ** 2
        return {
            "i": lam2 / 10 - self.norm_E2,
            "ii": lam2 / 20 - max(self.norm_DE, self.norm_ED),
            "iii": self.lam / 8 - self.norm_skew,
            "lyapunov": self.min_sym_A - self.lam / 2,
        }


@dataclass(frozen=True)
class AdaptedStructure:
    JQ: np.ndarray
    G: np.ndarray


def build_normal_form(spec: BlockSpec) -> NormalFrame:
    """Assemble the lower-bidiagonal matrix ``A`` from the normal blocks."""
    n = spec.n
    a = np.zeros((n, n))
    i0 = 0
    for sigma, m in spec.blocks:
        for i in range(m):
            a[i0 + i, i0 + i] = sigma
            if i > 0:
                a[i0 + i, i0 + i - 1] = -1.0
        i0 += m
    return NormalFrame(a, np.ones(n), spec)


def vector_field_matrix(frame: NormalFrame) -> np.ndarray:
    """Matrix of ``X_Q``: ``pdot = -A p``, ``qdot = A^T q``."""
    return field_matrix(frame.n) @ frame.hessian


def exact_linear_flow(frame: NormalFrame, t: float, kappa: float = 1.0) -> np.ndarray:
    """Time-``t`` map of the linear flow of ``kappa * Q``."""
    return expm(t * kappa * vector_field_matrix(frame))


def check_smallness(frame: NormalFrame) -> SmallnessReport:
    """Operator-norm form of the three smallness conditions.

    Suprema of the quadratic forms ``<M x, x>`` over the unit sphere are the
    operator norms of the symmetrized ``M``, and the bilinear bound on
    ``E - E^T`` is its operator norm, so the checks are exact.  The extra
    ``cond_lyapunov`` requires ``sym(A) >= lambda/2``, which makes
    ``||p||^2`` decay and ``||q||^2`` grow at rate ``lambda`` along ``X_Q``.
    """
    d, e = frame.D, frame.E
    lam = frame.lambda_
    n_e2 = op_norm(sym(e @ e))
    n_de = op_norm(sym(d @ e))
    n_ed = op_norm(sym(e @ d))
    n_sk = op_norm(e - e.T)
    min_sym = float(np.min(np.linalg.eigvalsh(sym(frame.A))))
    tol = 1e-12 * max(1.0, lam ** 2)
    return SmallnessReport(
        cond_i=n_e2 <= lam ** 2 / 10 + tol,
        cond_ii=(n_de <= lam ** 2 / 20 + tol) and (n_ed <= lam ** 2 / 20 + tol),
        cond_iii=n_sk <= lam / 8 + tol,
        cond_lyapunov=min_sym >= lam / 2 - tol,
        norm_E2=n_e2, norm_DE=n_de, norm_ED=n_ed, norm_skew=n_sk,
        min_sym_A=min_sym, lam=lam,
    )


def apply_scaling(frame: NormalFrame, s: np.ndarray) -> NormalFrame:
    """Rescale ``p_i -> s_i p_i``, ``q_i -> q_i / s_i`` (symplectic)."""
    s = np.asarray(s, dtype=float)
    a = (s[:, None] * frame.A) / s[None, :]
    return replace(frame, A=a, scale=frame.scale * s)


def rescale_to_small(frame: NormalFrame, max_halvings: int = 200) -> NormalFrame:
    """Geometric rescaling ``s_i = c^i`` with ``c`` halved until the checks pass."""
    if check_smallness(frame).ok:
        return frame
    idx = np.arange(frame.n, dtype=float)
    c = 1.0
    for _ in range(max_halvings):
        c *= 0.5
        scaled = apply_scaling(frame, c ** idx)
        if check_smallness(scaled).ok:
            return scaled
    raise RuntimeError("rescaling did not reach the smallness conditions")


def slow_bound(frame: NormalFrame) -> float:
    """Right-hand side of the slow-homotopy condition.

    ``(3 lambda^2 / 20) * inf ||x||^2 / |Q(x)|`` where the infimum equals
    ``1 / form_norm``.
    """
    return 3.0 * frame.lambda_ ** 2 / (20.0 * frame.form_norm)


def sampled_inverse_form_norm(frame: NormalFrame, samples: int = 200_000,
                              seed: int = 0, polish: bool = True) -> float:
    """Independent estimate of ``inf ||x||^2 / |Q(x)|`` by sphere sampling."""
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, 2 * frame.n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    vals = np.abs(frame.Q(x))
    best = x[np.argmax(vals)]
    sup = float(vals.max())
    if polish:
        def neg(y):
            y = y / np.linalg.norm(y)
            return -abs(float(frame.Q(y)))
        res = minimize(neg, best, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        sup = max(sup, -res.fun)
    return 1.0 / sup


def adapted_structure(frame: NormalFrame) -> AdaptedStructure:
    """Complex structure making ``omega(., J .)`` the Euclidean product.

    With ``omega = dp ^ dq`` this is ``J = -Omega`` (``J d_p = d_q``), so
    ``G = Omega J`` is the identity in scaled normal coordinates.
    """
    om = omega_matrix(frame.n)
    j = -om
    return AdaptedStructure(JQ=j, G=om @ j)


def lyapunov_rates(frame: NormalFrame, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lie derivatives of ``||p||^2`` and ``||q||^2`` along ``X_Q``."""
    z = np.asarray(z, dtype=float)
    n = frame.n
    p, q = z[..., :n], z[..., n:]
    dp = -p @ frame.A.T
    dq = q @ frame.A
    return 2 * np.sum(p * dp, axis=-1), 2 * np.sum(q * dq, axis=-1)


def random_block_spec(rng: np.random.Generator, n_max: int = 6,
                      sigma_range: tuple[float, float] = (0.2, 3.0)) -> BlockSpec:
    """Random normal-block data with total dimension ``n <= n_max``."""
    n = int(rng.integers(1, n_max + 1))
    blocks = []
    left = n
    while left > 0:
        m = int(rng.integers(1, left + 1))
        blocks.append((float(rng.uniform(*sigma_range)), m))
        left -= m
    return BlockSpec(tuple(blocks))


def block_spec_condition(frame: NormalFrame) -> float:
    """Distance of the spectrum of ``X_Q`` from the imaginary axis."""
    ev = np.linalg.eigvals(vector_field_matrix(frame))
    return float(np.min(np.abs(ev.real)))


__all__ = [
    "AdaptedStructure", "BlockSpec", "BlockSpecError", "ComplexSpectrumError",
    "NormalFrame", "SmallnessReport", "adapted_structure", "apply_scaling",
    "build_normal_form", "check_smallness", "exact_linear_flow",
    "lyapunov_rates", "random_block_spec", "rescale_to_small", "slow_bound",
    "sampled_inverse_form_norm", "vector_field_matrix", "block_spec_condition",
]
