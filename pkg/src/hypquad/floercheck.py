"""Maximum-principle checks on exact solutions of the linear Floer equation.

The equation ``u_s + J u_t = -grad Q(u)`` with constant ``J = J_Q`` admits
separated solutions ``Re(c e^{mu s} e^{2 pi i k t} w)`` where
``(S + 2 pi i k J) w = -mu w``.  Since ``i J`` is Hermitian the exponents
``mu`` are real and the pencil is never defective.  Superpositions of such
modes are exact solutions, so the subharmonicity of ``rho = |u|^2/2`` can
be tested without any PDE solver error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import _ball_grid, hofer_norm
from .quadform import NormalFrame, adapted_structure, slow_bound
from .taming import Cutoff

RESIDUAL_TOL = 1e-9
STENCIL_CONST = 10.0


class UnverifiedFieldError(ValueError):
    pass


class DefectiveModeError(ValueError):
    pass


class UnboundedSupportError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact solutions


@dataclass(frozen=True)
class FloerMode:
    k: int
    mu: float
    w: np.ndarray
    coeff: complex = 1.0


def pencil(frame: NormalFrame, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponents ``mu`` (ascending) and eigenvectors for Fourier mode ``k``."""
    J = adapted_structure(frame).JQ
    M = frame.hessian + 2j * math.pi * k * J
    nu, W = np.linalg.eigh(M)
    return -nu[::-1], W[:, ::-1]


def floer_mode(frame: NormalFrame, k: int, j: int, coeff: complex = 1.0) -> FloerMode:
    mu, W = pencil(frame, k)
    if not 0 <= j < len(mu):
        raise IndexError(f"eigen index {j} out of range 0..{len(mu) - 1}")
    w = W[:, j]
    J = adapted_structure(frame).JQ
    res = np.linalg.norm(mu[j] * w + 2j * math.pi * k * (J @ w) + frame.hessian @ w)
    if res > 1e-10 * max(1.0, abs(mu[j])):
        raise DefectiveModeError(f"mode (k={k}, j={j}) eigenvector residual {res:.2e}")
    return FloerMode(k, float(mu[j]), w, complex(coeff))


@dataclass
class LinearFloerSolution:
    """Finite sum of separated modes; evaluated analytically on any grid."""

    frame: NormalFrame
    modes: list[FloerMode] = field(default_factory=list)

    def _terms(self, s, t):
        s = np.asarray(s, dtype=float)[..., None]
        t = np.asarray(t, dtype=float)[..., None]
        dim = 2 * self.frame.n
        out = {key: np.zeros(np.broadcast(s, t).shape[:-1] + (dim,)) for key in
               ("u", "us", "ut", "lap")}
        for m in self.modes:
            om = 2j * math.pi * m.k
            e = (m.coeff * np.exp(m.mu * s + om * t))
            base = e * m.w
            out["u"] += base.real
            out["us"] += (m.mu * base).real
            out["ut"] += (om * base).real
            out["lap"] += ((m.mu ** 2 + om ** 2) * base).real
        return out

    def u(self, s, t):
        return self._terms(s, t)["u"]

    def sample(self, s0: float, s1: float, n_s: int = 64, n_t: int = 64,
               normalize: bool = True) -> "CylinderField":
        s = np.linspace(s0, s1, n_s)
        t = np.arange(n_t) / n_t
        S, T = np.meshgrid(s, t, indexing="ij")
        d = self._terms(S, T)
        scale = 1.0
        if normalize:
            peak = float(np.max(np.linalg.norm(d["u"], axis=-1)))
            if peak > 0:
                scale = 1.0 / peak
        for key in d:
            d[key] = d[key] * scale
        J = adapted_structure(self.frame).JQ
        r = d["us"] + d["ut"] @ J.T + d["u"] @ self.frame.hessian.T
        resid = float(np.max(np.abs(r))) if r.size else 0.0
        return CylinderField(s, t, d["u"], d["us"], d["ut"], d["lap"], resid,
                             resid < RESIDUAL_TOL)


def make_linear_floer_solution(frame: NormalFrame, k: int, j: int,
                               coeff: complex = 1.0) -> LinearFloerSolution:
    return LinearFloerSolution(frame, [floer_mode(frame, k, j, coeff)])


def gradient_line(frame: NormalFrame, u0) -> LinearFloerSolution:
    """``u(s) = exp(-S s) u0`` written as a sum of ``k = 0`` modes."""
    u0 = np.asarray(u0, dtype=float)
    mu, W = pencil(frame, 0)
    c = W.conj().T @ u0
    return LinearFloerSolution(frame, [FloerMode(0, float(m), W[:, i], complex(c[i]))
                                       for i, m in enumerate(mu)])


def random_solution(frame: NormalFrame, rng: np.random.Generator, max_mode: int = 2,
                    n_terms: int = 3) -> LinearFloerSolution:
    dim = 2 * frame.n
    modes = []
    for _ in range(n_terms):
        k = int(rng.integers(-max_mode, max_mode + 1))
        j = int(rng.integers(0, dim))
        c = complex(rng.standard_normal(), rng.standard_normal())
        modes.append(floer_mode(frame, k, j, c))
    return LinearFloerSolution(frame, modes)


@dataclass(frozen=True)
class CylinderField:
    s: np.ndarray
    t: np.ndarray
    u: np.ndarray          # (n_s, n_t, 2n)
    u_s: np.ndarray
    u_t: np.ndarray
    lap_u: np.ndarray
    residual: float
    verified: bool

    @property
    def h_s(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def h_t(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def rho(self) -> np.ndarray:
        return 0.5 * np.sum(self.u * self.u, axis=-1)

    def exact_laplacian_rho(self) -> np.ndarray:
        return (np.sum(self.u_s ** 2, -1) + np.sum(self.u_t ** 2, -1)
                + np.sum(self.u * self.lap_u, -1))

    def discrete_laplacian_rho(self) -> np.ndarray:
        """5-point stencil; ``nan`` on the two s-boundary rows."""
        r = self.rho
        out = np.full_like(r, np.nan)
        rtt = (np.roll(r, -1, 1) - 2 * r + np.roll(r, 1, 1)) / self.h_t ** 2
        out[1:-1] = (r[2:] - 2 * r[1:-1] + r[:-2]) / self.h_s ** 2 + rtt[1:-1]
        return out

    def write_csv(self, path) -> None:
        lap = self.discrete_laplacian_rho()
        rho = self.rho
        dim = self.u.shape[-1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "t"] + [f"u{i}" for i in range(dim)] + ["rho", "lap_rho"])
            for i, s in enumerate(self.s):
                for j, t in enumerate(self.t):
                    w.writerow([f"{s:.10g}", f"{t:.10g}"]
                               + [f"{x:.12g}" for x in self.u[i, j]]
                               + [f"{rho[i, j]:.12g}", f"{lap[i, j]:.12g}"])


# ---------------------------------------------------------------------------
# subharmonicity


@dataclass(frozen=True)
class SubharmonicityReport:
    min_margin: float
    exact_min_margin: float
    tol: float
    argmax: tuple[int, int]
    argmax_on_boundary: bool
    max_rho: float
    lam: float

    @property
    def ok(self) -> bool:
        return self.min_margin >= -self.tol and (self.argmax_on_boundary or self.max_rho == 0)

    def to_dict(self) -> dict:
        return {"min_margin": self.min_margin, "exact_min_margin": self.exact_min_margin,
                "tol": self.tol, "argmax": list(self.argmax),
                "argmax_on_boundary": self.argmax_on_boundary, "max_rho": self.max_rho,
                "ok": self.ok}


def subharmonicity_check(fld: CylinderField, frame: NormalFrame) -> SubharmonicityReport:
    """Check ``Delta rho >= (3 lam^2 / 10) |u|^2`` at interior nodes."""
    if not fld.verified:
        raise UnverifiedFieldError(
            f"field residual {fld.residual:.2e} exceeds {RESIDUAL_TOL:g}; not a solution")
    lam = frame.lambda_
    nu2 = np.sum(fld.u ** 2, -1)
    margin = fld.discrete_laplacian_rho()[1:-1] - 0.3 * lam ** 2 * nu2[1:-1]
    exact = fld.exact_laplacian_rho() - 0.3 * lam ** 2 * nu2
    rho = fld.rho
    i, j = np.unravel_index(int(np.argmax(rho)), rho.shape)
    mx = float(rho[i, j])
    # ties: accept if some boundary node attains the max
    on_bd = bool(i in (0, rho.shape[0] - 1)
                 or max(rho[0].max(), rho[-1].max()) >= mx * (1 - 1e-12))
    tol = STENCIL_CONST * max(fld.h_s, fld.h_t) ** 2
    mm = float(margin.min()) if margin.size else 0.0
    return SubharmonicityReport(mm, float(exact.min()), tol, (int(i), int(j)), on_bd, mx, lam)


def stencil_errors(sol: LinearFloerSolution, s0: float, s1: float,
                   sizes: Sequence[int] = (32, 64, 128)) -> tuple[np.ndarray, np.ndarray]:
    """Max stencil error on a common set of nodes, and observed orders."""
    errs = []
    base = sizes[0]
    for n in sizes:
        fld = sol.sample(s0, s1, (base - 1) * (n // base) + 1, n, normalize=False)
        d = fld.discrete_laplacian_rho() - fld.exact_laplacian_rho()
        step = n // base
        errs.append(float(np.nanmax(np.abs(d[::step, ::step]))))
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    return errs, orders


# ---------------------------------------------------------------------------
# slow homotopies


@dataclass(frozen=True)
class HomotopyProfile:
    s: np.ndarray
    k: np.ndarray
    dk: np.ndarray

    def __post_init__(self):
        s, k, dk = (np.asarray(a, dtype=float) for a in (self.s, self.k, self.dk))
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "dk", dk)
        if not (s.shape == k.shape == dk.shape) or s.ndim != 1 or len(s) < 2:
            raise ValueError("s, k, dk must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s samples must be strictly increasing")
        if np.any(k <= 0):
            i = int(np.argmin(k))
            raise ValueError(f"k must be positive; k({s[i]:.6g}) = {k[i]:.6g}")
        tol = 1e-12 * float(np.max(k))
        if abs(dk[0]) > tol or abs(dk[-1]) > tol:
            raise ValueError("k must be constant for |s| large (dk != 0 at the ends)")

    @classmethod
    def constant(cls, k: float, s_range=(-1.0, 1.0), n: int = 201) -> "HomotopyProfile":
        s = np.linspace(*s_range, n)
        return cls(s, np.full(n, float(k)), np.zeros(n))

    @classmethod
    def ramp(cls, k0: float, k1: float, s0: float = 0.0, s1: float = 1.0, n: int = 2001,
             pad: float = 1.0, shape: str = "linear") -> "HomotopyProfile":
        s = np.linspace(s0 - pad, s1 + pad, n)
        u = np.clip((s - s0) / (s1 - s0), 0.0, 1.0)
        inside = (s > s0) & (s < s1)
        if shape == "linear":
            g, dg = u, np.where(inside, 1.0 / (s1 - s0), 0.0)
        elif shape == "smooth":
            cut = Cutoff(s0, s1)
            g, dg = cut(s), cut.derivative(s)
        else:
            raise ValueError(f"unknown ramp shape {shape!r}")
        return cls(s, k0 + (k1 - k0) * g, (k1 - k0) * dg)

    @property
    def k_minus(self) -> float:
        return float(self.k[0])

    @property
    def k_plus(self) -> float:
        return float(self.k[-1])

    def max_ratio(self) -> float:
        return float(np.max(np.abs(self.dk) / self.k ** 2))

    def stretch(self, factor: float) -> "HomotopyProfile":
        if factor <= 0:
            raise ValueError("stretch factor must be positive")
        c = 0.5 * (self.s[0] + self.s[-1])
        return HomotopyProfile(c + factor * (self.s - c), self.k, self.dk / factor)


def is_slow(profile: HomotopyProfile, frame: NormalFrame) -> bool:
    return profile.max_ratio() <= slow_bound(frame) * (1 + 1e-12)


def reparametrize_to_slow(profile: HomotopyProfile,
                          frame: NormalFrame) -> tuple[HomotopyProfile, int]:
    """Stretch the s-axis by the least integer factor making ``profile`` slow."""
    r = profile.max_ratio() / slow_bound(frame)
    L = max(1, math.ceil(r - 1e-12))
    return (profile if L == 1 else profile.stretch(L)), L


@dataclass(frozen=True)
class AuditReport:
    min_margin: float
    witness_s: float
    witness_u: np.ndarray
    slow: bool
    n_checked: int

    @property
    def ok(self) -> bool:
        return self.min_margin >= -1e-12

    def to_dict(self) -> dict:
        return {"min_margin": self.min_margin, "witness_s": self.witness_s,
                "witness_u": self.witness_u.tolist(), "slow": self.slow,
                "n_checked": self.n_checked, "ok": self.ok}


def extremal_directions(frame: NormalFrame) -> np.ndarray:
    """Unit vectors where ``|Q(x)| / |x|^2`` is maximal."""
    vals, vecs = np.linalg.eigh(0.5 * frame.hessian)
    top = np.abs(vals) >= np.abs(vals).max() * (1 - 1e-12)
    return vecs[:, top].T


def slow_inequality_audit(frame: NormalFrame, profile: HomotopyProfile,
                          sample_points=None, n_random: int = 1000, seed: int = 0,
                          include_extremal: bool = True) -> AuditReport:
    """Pointwise ``(3 lam^2/10) k^2 |u|^2 - 2 |k'| |Q(u)| >= 0``, per unit ``|u|^2``."""
    if sample_points is None:
        sample_points = np.random.default_rng(seed).standard_normal((n_random, 2 * frame.n))
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if include_extremal:
        pts = np.concatenate([pts, extremal_directions(frame)])
    nrm = np.linalg.norm(pts, axis=1)
    pts = pts[nrm > 0] / nrm[nrm > 0, None]
    q = np.abs(frame.Q(pts))
    lam = frame.lambda_
    m = (0.3 * lam ** 2 * profile.k[:, None] ** 2
         - 2 * np.abs(profile.dk)[:, None] * q[None, :])
    i, j = np.unravel_index(int(np.argmin(m)), m.shape)
    return AuditReport(float(m[i, j]), float(profile.s[i]), pts[j], is_slow(profile, frame),
                       int(m.size))


# ---------------------------------------------------------------------------
# continuation shifts


def _frame_of(H):
    return getattr(H, "frame", None)


def _declared_support(H):
    r = getattr(H, "support_radius", None)
    if r is None and hasattr(H, "H"):
        r = getattr(H.H, "support_radius", None)
    return r


def continuation_shift(H0, H1, ball_radius: float, *, grid_density: int = 41,
                       n_t: int = 16, dim: int | None = None, refine: bool = True,
                       assume_supported: bool = False) -> float:
    """``||H1 - H0||_B`` for the linear homotopy from ``H0`` to ``H1``."""
    f0, f1 = _frame_of(H0), _frame_of(H1)
    if f0 is not None and f1 is not None:
        if f0.A.shape != f1.A.shape or not np.allclose(f0.A, f1.A):
            raise ValueError("H0 and H1 must share the quadratic form")
    if not assume_supported:
        for H in (H0, H1):
            r = _declared_support(H)
            if r is None:
                raise UnboundedSupportError(
                    "perturbation support is not declared; the homotopy may be unbounded")
            if r > ball_radius:
                raise UnboundedSupportError(
                    f"perturbation support radius {r:g} exceeds ball radius {ball_radius:g}")
    if dim is None:
        dim = 2 * getattr(H0, "n", getattr(H1, "n", 0))
    v0 = H0.value if hasattr(H0, "value") else H0
    v1 = H1.value if hasattr(H1, "value") else H1
    auto = bool(getattr(H0, "autonomous", False) and getattr(H1, "autonomous", False))
    res = hofer_norm(lambda t, z: v1(t, z) - v0(t, z), ball_radius, grid_density, dim=dim,
                     n_t=n_t, autonomous=auto, refine=refine)
    return res.value


def homotopy_shift(dF_ds: Callable, s_grid, ball_radius: float, dim: int, *,
                   grid_density: int = 31, n_t: int = 8) -> float:
    """Quadrature of ``int ds int dt sup_B dF/ds``."""
    s_grid = np.asarray(s_grid, dtype=float)
    pts, _ = _ball_grid(dim, ball_radius, grid_density)
    ts = np.arange(n_t) / n_t
    sups = np.array([[float(np.max(dF_ds(s, t, pts))) for t in ts] for s in s_grid])
    per_s = sups.mean(axis=1)
    return float(np.trapezoid(per_s, s_grid))


class LinearHomotopy:
    """``F_s = (1 - g(s)) H0 + g(s) H1`` with a smootherstep ``g`` on [s0, s1]."""

    def __init__(self, H0, H1, s0: float = 0.0, s1: float = 1.0):
        self.H0, self.H1, self.g = H0, H1, Cutoff(s0, s1)

    def value(self, s, t, z):
        g = float(self.g(s))
        return (1 - g) * self.H0.value(t, z) + g * self.H1.value(t, z)

    def ds(self, s, t, z):
        return float(self.g.derivative(s)) * (self.H1.value(t, z) - self.H0.value(t, z))
