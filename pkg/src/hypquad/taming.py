"""Taming the quadratic part at infinity: ``Q -> Q_tilde`` and the iteration shift bound.

``Q_tilde`` equals ``Q`` on the ball ``V`` of radius ``r`` and ``eps*Q``
outside the ball of radius ``R = C1/sqrt(eps)``, with no periodic orbits
besides the origin.  Construction:

* ``eta``: odd, ``eta(x) = x`` for ``|x| <= c``, ``eta(x) = eps*x`` for
  ``|x| >= c' = 2c/eps`` and ``eta' >= eps/2`` (a C^2 quartic spline),
* ``Q_hat = phi(|q|) eps Q + (1 - phi(|q|)) eta(Q)`` with ``phi`` switching on
  ``[a0, a1]``,
* ``Q_tilde = psi(|p|) eps Q + (1 - psi(|p|)) Q_hat`` with ``psi`` switching
  on ``[b0, b1]``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .dynamics import (
    Hamiltonian, HamiltonianSystem, Iterate, Periodized, Ramp, hofer_norm, rk4_flow,
)
from .quadform import NormalFrame, vector_field_matrix


class ShiftPreconditionError(ValueError):
    def __init__(self, msg: str, max_epsilon: float):
        super().__init__(msg)
        self.max_epsilon = max_epsilon


# ---------------------------------------------------------------------------
# one-dimensional building blocks


def _blend(u):
    """``B(u) = 1 - 3u^2 + 2u^3`` on [0, 1], 1 below, 0 above."""
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - 3.0 * u ** 2 + 2.0 * u ** 3


def _blend_int(u):
    """``int_0^u B``; equals 1/2 for ``u >= 1``."""
    u = np.clip(u, 0.0, 1.0)
    return u - u ** 3 + 0.5 * u ** 4


def smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u ** 2)


def smootherstep_d(u):
    inside = (u > 0.0) & (u < 1.0)
    uc = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * uc ** 2 * (1.0 - uc) ** 2, 0.0)


@dataclass(frozen=True)
class Eta:
    """Odd monotone transition from slope 1 to slope ``eps``.

    On ``[c, c']`` the derivative is
    ``m + (1-m) B((x-c)/w) + (eps-m) B((c'-x)/w)``, where the constant ``m``
    is fixed by ``eta(c') = eps c'``.  Choosing ``w <= c eps / 2`` forces
    ``m >= eps/2``.
    """

    epsilon: float
    c: float
    c_prime: float
    w: float
    m: float

    @classmethod
    def build(cls, c: float, epsilon: float) -> "Eta":
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if c <= 0:
            raise ValueError("c must be positive")
        cp = 2.0 * c / epsilon
        L = cp - c
        w = 0.5 * min(c * epsilon, 0.5 * L)
        m = (c - 0.5 * (1.0 + epsilon) * w) / (L - w)
        return cls(epsilon, c, cp, w, m)

    def _pos(self, x):
        c, cp, w, m, e = self.c, self.c_prime, self.w, self.m, self.epsilon
        L = cp - c
        mid = (c + m * (x - c) + (1 - m) * w * _blend_int((x - c) / w)
               + (e - m) * w * (_blend_int(L / w) - _blend_int((cp - x) / w)))
        return np.where(x <= c, x, np.where(x >= cp, e * x, mid))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self._pos(np.abs(x))

    def derivative(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        c, cp, w, m, e = self.c, self.c_prime, self.w, self.m, self.epsilon
        mid = m + (1 - m) * _blend((x - c) / w) + (e - m) * _blend((cp - x) / w)
        return np.where(x <= c, 1.0, np.where(x >= cp, e, mid))

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "c": self.c, "c_prime": self.c_prime,
                "knot_width": self.w, "plateau_slope": self.m}


@dataclass(frozen=True)
class Cutoff:
    """Smootherstep from 0 at ``x0`` to 1 at ``x1``; ``max |f'| = 1.875/(x1-x0)``."""

    x0: float
    x1: float

    def __call__(self, x):
        return smootherstep((np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0))

    def derivative(self, x):
        return smootherstep_d((np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0)) \
            / (self.x1 - self.x0)

    @property
    def max_slope(self) -> float:
        return 1.875 / (self.x1 - self.x0)


# ---------------------------------------------------------------------------
# the profile


@dataclass(frozen=True)
class QTildeProfile:
    frame: NormalFrame
    epsilon: float
    r: float
    c: float
    c_prime: float
    a0: float
    a1: float
    b0: float
    b1: float
    R: float
    C1: float
    M: float
    C2: float
    sup_f: float
    C3: float
    eta: Eta = field(repr=False)

    @property
    def phi(self) -> Cutoff:
        return Cutoff(self.a0, self.a1)

    @property
    def psi(self) -> Cutoff:
        return Cutoff(self.b0, self.b1)

    @property
    def lam(self) -> float:
        return self.frame.lambda_

    def constants(self) -> dict:
        keys = ("epsilon", "r", "c", "c_prime", "a0", "a1", "b0", "b1", "R", "C1", "M",
                "C2", "sup_f", "C3")
        return {k: float(getattr(self, k)) for k in keys}

    def to_dict(self) -> dict:
        d = self.constants()
        d["eta"] = self.eta.to_dict()
        d["frame"] = self.frame.to_dict()
        return d

    # evaluation -----------------------------------------------------------
    def _split(self, z):
        z = np.asarray(z, dtype=float)
        n = self.frame.n
        return z, z[..., :n], z[..., n:]

    def value(self, z):
        z, p, q = self._split(z)
        Q = self.frame.Q(z)
        e = self.epsilon
        ph = self.phi(np.linalg.norm(q, axis=-1))
        ps = self.psi(np.linalg.norm(p, axis=-1))
        qhat = ph * e * Q + (1 - ph) * self.eta(Q)
        return ps * e * Q + (1 - ps) * qhat

    def gradient(self, z):
        z, p, q = self._split(z)
        n = self.frame.n
        Q = self.frame.Q(z)
        gQ = self.frame.grad_Q(z)
        e = self.epsilon
        np_, nq = np.linalg.norm(p, axis=-1), np.linalg.norm(q, axis=-1)
        ph, dph = self.phi(nq), self.phi.derivative(nq)
        ps, dps = self.psi(np_), self.psi.derivative(np_)
        etaQ = self.eta(Q)
        qhat = ph * e * Q + (1 - ph) * etaQ
        coef = ps * e + (1 - ps) * (ph * e + (1 - ph) * self.eta.derivative(Q))
        g = coef[..., None] * gQ
        with np.errstate(invalid="ignore", divide="ignore"):
            up = np.where(np_[..., None] > 0, p / np_[..., None], 0.0)
            uq = np.where(nq[..., None] > 0, q / nq[..., None], 0.0)
        g[..., :n] += (dps * (e * Q - qhat))[..., None] * up
        g[..., n:] += ((1 - ps) * dph * (e * Q - etaQ))[..., None] * uq
        return g

    def field(self, z):
        g = self.gradient(z)
        n = self.frame.n
        return np.concatenate([-g[..., n:], g[..., :n]], axis=-1)

    def lie_p2(self, z):
        """``L_X ||p||^2 = 2 <p, pdot>``."""
        z, p, _ = self._split(z)
        return 2 * np.sum(p * self.field(z)[..., :self.frame.n], axis=-1)

    def lie_q2(self, z):
        z, _, q = self._split(z)
        return 2 * np.sum(q * self.field(z)[..., self.frame.n:], axis=-1)


def sup_abs_f(H: HamiltonianSystem, samples: int = 2048) -> float:
    """``sup |f|`` with exact spatial maxima at bump centers (bounded by the sum
    over bumps when several bumps are present)."""
    if not H.bumps:
        return 0.0
    ts = np.arange(samples) / samples
    if len(H.bumps) == 1:
        b = H.bumps[0]
        return float(abs(b.amplitude) * np.max(np.abs(b.time_profile(ts))))
    return float(sum(abs(b.amplitude) * np.max(np.abs(b.time_profile(ts))) for b in H.bumps))


def build_profile(H: HamiltonianSystem, epsilon: float, r: float | None = None) -> QTildeProfile:
    """All constants of the construction for ``H = Q + f`` supported in radius ``r``."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    frame = H.frame
    r = H.support_radius if r is None else r
    if r <= 0:
        raise ValueError("support radius must be positive")
    M = frame.form_norm                   # sup_{B(1)} |Q|, exact
    c = M * r ** 2                        # sup_V |Q|
    lam = frame.lambda_
    se = math.sqrt(epsilon)
    a0 = r / se
    b0 = max(r, 32.0 * c / (lam * r * se))
    R = math.hypot(2 * a0, 2 * b0)
    C1 = R * se
    C2 = 3 * C1 ** 2 * M + 4 * c
    sf = sup_abs_f(H)
    C3 = 7 * C1 ** 2 * M + C2 + sf
    return QTildeProfile(frame, float(epsilon), float(r), c, 2 * c / epsilon, a0, 2 * a0,
                         b0, 2 * b0, R, C1, M, C2, sf, C3, Eta.build(c, epsilon))


# ---------------------------------------------------------------------------
# Hamiltonians built from a profile


class QTilde(Hamiltonian):
    def __init__(self, profile: QTildeProfile):
        self.profile, self.n = profile, profile.frame.n

    def value(self, t, z):
        return self.profile.value(z)

    def gradient(self, t, z):
        return self.profile.gradient(z)


class HTilde(Hamiltonian):
    """``H_tilde = Q_tilde + f``."""

    def __init__(self, profile: QTildeProfile, H: HamiltonianSystem):
        if H.kappa != 1.0:
            raise ValueError("taming applies to H = Q + f (kappa = 1)")
        self.profile, self.H, self.n = profile, H, H.n

    def value(self, t, z):
        return self.profile.value(z) + self.H.perturbation(t, z)

    def gradient(self, t, z):
        return self.profile.gradient(z) + self.H.perturbation_gradient(t, z)


class IterateRemainder(Hamiltonian):
    """``h_k = H_tilde^{#k} - k eps Q`` (values only)."""

    def __init__(self, Ht: HTilde, k: int, step: float = 0.02):
        self.it = Iterate(Ht, k, step)
        self.k, self.n, self.frame = k, Ht.n, Ht.profile.frame
        self.eps = Ht.profile.epsilon

    def value(self, t, z):
        return self.it.value(t, z) - self.k * self.eps * self.frame.Q(z)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CheckRow:
    name: str
    ok: bool
    margin: float
    witness: list | None = None
    detail: str = ""


@dataclass
class VerificationReport:
    epsilon: float
    rows: list[CheckRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def write_csv(self, path, mode: str = "w", header: bool = True) -> None:
        with open(path, mode, newline="") as fh:
            w = csv.writer(fh)
            if header:
                w.writerow(["epsilon", "check", "ok", "margin", "witness", "detail"])
            for r in self.rows:
                wit = "" if r.witness is None else " ".join(f"{v:.9g}" for v in r.witness)
                w.writerow([self.epsilon, r.name, int(r.ok), f"{r.margin:.9g}", wit, r.detail])


def _sample_pq(rng, n, count, p_range, q_range):
    """Points with ``|p|`` and ``|q|`` uniform in the given ranges, random directions."""
    def dirs():
        d = rng.standard_normal((count, n))
        return d / np.linalg.norm(d, axis=1, keepdims=True)
    rp = rng.uniform(*p_range, count)[:, None]
    rq = rng.uniform(*q_range, count)[:, None]
    return np.concatenate([rp * dirs(), rq * dirs()], axis=1)


def _sample_ball(rng, dim, count, radius, inner=0.0):
    d = rng.standard_normal((count, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    u = rng.uniform(inner ** dim / radius ** dim if radius else 0, 1.0, count)
    return d * (radius * u ** (1.0 / dim))[:, None]


def _worst(vals, pts, larger_is_worse=True):
    i = int(np.argmax(vals) if larger_is_worse else np.argmin(vals))
    return float(vals[i]), pts[i].tolist()


def verify_profile(profile: QTildeProfile, sample_count: int = 20_000, seed: int = 0,
                   trajectories: int = 0, traj_steps: int = 60) -> VerificationReport:
    """Dense-sampling checks of the construction; every row carries a margin
    (positive = satisfied) and the worst sampled point."""
    rng = np.random.default_rng(seed)
    P = profile
    n, e, lam = P.frame.n, P.epsilon, P.lam
    rows: list[CheckRow] = []
    N = sample_count

    # (i) Q_tilde = Q on V, exactly
    z = _sample_ball(rng, 2 * n, N, P.r)
    d = np.abs(P.value(z) - P.frame.Q(z))
    v, w = _worst(d, z)
    rows.append(CheckRow("i_equal_on_V", v == 0.0, -v, w))

    # (ii) Q_tilde = eps Q outside V_eps, exactly
    z = _sample_ball(rng, 2 * n, N, 2 * P.R, inner=P.R)
    # psi*eps*Q + (1-psi)*eps*Q is eps*Q up to rounding
    d = np.abs(P.value(z) - e * P.frame.Q(z)) / np.maximum(1.0, np.abs(e * P.frame.Q(z)))
    v, w = _worst(d, z)
    rows.append(CheckRow("ii_eps_outside", v <= 1e-12, -v, w))

    # (iii) sup_{V_eps} |Q_tilde| <= C2, with extra samples where the cutoffs act
    z = np.concatenate([
        _sample_ball(rng, 2 * n, N, P.R),
        _sample_pq(rng, n, N, (0, P.b1), (P.a0 * 0.5, P.a1 * 1.2)),
        _sample_pq(rng, n, N, (P.b0 * 0.8, P.b1 * 1.1), (0, P.a1 * 1.2)),
    ])
    z = z[np.linalg.norm(z, axis=1) <= P.R]
    vals = np.abs(P.value(z))
    v, w = _worst(vals, z)
    rows.append(CheckRow("iii_sup_bound", v <= P.C2, P.C2 - v, w, f"sup={v:.6g} C2={P.C2:.6g}"))

    # eta: slope and the 4c estimate
    xs = np.linspace(0, 1.2 * P.c_prime, 200_001)
    slope = P.eta.derivative(xs)
    i = int(np.argmin(slope))
    rows.append(CheckRow("eta_slope", bool(slope[i] >= e / 2), float(slope[i] - e / 2), [xs[i]]))
    dev = np.abs(P.eta(xs) - e * xs)
    i = int(np.argmax(dev))
    rows.append(CheckRow("eq_4c", bool(dev[i] <= 4 * P.c), float(4 * P.c - dev[i]), [xs[i]],
                         f"sup|eta-eps x|={dev[i]:.6g}"))
    rows.append(CheckRow("phi_slope", P.phi.max_slope <= 2 / P.a0,
                         2 / P.a0 - P.phi.max_slope))

    # (a) Q_tilde = Q (with gradient) where |Q|<=c, |q|<=a0, |p|<=b0
    z = _sample_pq(rng, n, N, (0, P.b0), (0, P.a0))
    z = z[np.abs(P.frame.Q(z)) <= P.c]
    if len(z):
        dg = np.max(np.abs(P.gradient(z) - P.frame.grad_Q(z)), axis=1)
        v, w = _worst(dg, z)
        rows.append(CheckRow("a_flow_equal", v == 0.0, -v, w))

    # (b) L ||q||^2 >= (eps lam / 2) ||q||^2 for |p| <= b0
    z = np.concatenate([_sample_pq(rng, n, N, (0, P.b0), (0, 1.5 * P.a1)),
                        _sample_pq(rng, n, N, (0.9 * P.b0, P.b0), (0.5 * P.a0, 1.1 * P.a1))])
    q2 = np.sum(z[:, n:] ** 2, axis=1)
    slack = P.lie_q2(z) - 0.5 * e * lam * q2
    scale = np.maximum(1.0, np.abs(P.lie_q2(z)))
    v, w = _worst(-slack / scale, z)
    rows.append(CheckRow("b_q_grows", v <= 1e-12, -v, w))

    # (c) L ||p||^2 < 0 for |p| >= b0, plus the proof's explicit bound
    z = np.concatenate([_sample_pq(rng, n, N, (P.b0, 1.2 * P.b1), (1e-9, 1.5 * P.a1)),
                        _sample_pq(rng, n, N, (P.b0, 1.05 * P.b0), (P.a0, P.a1))])
    lp = P.lie_p2(z)
    v, w = _worst(lp, z)
    rows.append(CheckRow("c_p_decays", v < 0, -v, w))
    pn = np.linalg.norm(z[:, :n], axis=1)
    bound = -0.5 * e * lam * pn ** 2 + 16 * P.c * math.sqrt(e) / P.r * pn
    over = (lp - bound) / np.maximum(1.0, np.abs(bound))
    v, w = _worst(over, z)
    rows.append(CheckRow("c_proof_bound", v <= 1e-12, -v, w))

    if trajectories:
        rows.append(_trajectory_check(P, rng, trajectories, traj_steps))
    return VerificationReport(P.epsilon, rows)


def _trajectory_check(P: QTildeProfile, rng, count: int, steps: int) -> CheckRow:
    """Along sampled trajectories: ``|p|^2`` decreases while ``|p| >= b0`` and
    ``|q|^2`` increases while ``|p| <= b0`` (q != 0); no trajectory returns."""
    n = P.frame.n
    z0 = np.concatenate([_sample_pq(rng, n, count // 2, (0, 1.2 * P.b1), (0, 1.2 * P.a1)),
                         _sample_ball(rng, 2 * n, count - count // 2, P.R)])
    speed = np.max(np.linalg.norm(P.field(z0), axis=1) / np.maximum(np.linalg.norm(z0, axis=1),
                                                                    1e-12))
    dt = 0.5 / (steps * max(speed, 1e-12))
    z = z0
    worst = -np.inf
    wit = None
    for _ in range(steps):
        lp, lq = P.lie_p2(z), P.lie_q2(z)
        pn = np.linalg.norm(z[:, :n], axis=1)
        qn = np.linalg.norm(z[:, n:], axis=1)
        bad_p = np.where(pn >= P.b0, lp, -np.inf)
        bad_q = np.where((pn <= P.b0) & (qn > 0), -lq, -np.inf)
        bad = np.maximum(bad_p, bad_q)
        i = int(np.argmax(bad))
        if bad[i] > worst:
            worst, wit = float(bad[i]), z[i].tolist()
        z = rk4_flow(lambda t, y: P.field(y), 0.0, dt, z, dt)
    returned = np.linalg.norm(z - z0, axis=1) < 1e-9 * np.maximum(1, np.linalg.norm(z0, axis=1))
    moving = np.linalg.norm(P.field(z0), axis=1) > 0
    ok = worst < 0 and not np.any(returned & moving)
    return CheckRow("iv_trajectories", bool(ok), -worst, wit, f"{count} trajectories")


# ---------------------------------------------------------------------------
# iteration shift


def bk_radius(profile: QTildeProfile, k: int) -> float:
    """``R_k = ||phi_Q^{eps (k-1)}||_op R``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m = expm(profile.epsilon * (k - 1) * vector_field_matrix(profile.frame))
    return float(np.linalg.norm(m, 2)) * profile.R


def iterate_support_check(profile: QTildeProfile, H: HamiltonianSystem, k: int,
                          samples: int = 200, seed: int = 0, step: float = 0.02) -> float:
    """Max ``|h_k|`` over random points in the shell ``1.05 R_k <= |z| <= 1.5 R_k``."""
    rng = np.random.default_rng(seed)
    Rk = bk_radius(profile, k)
    z = _sample_ball(rng, 2 * profile.frame.n, samples, 1.5 * Rk, inner=1.05 * Rk)
    hk = IterateRemainder(HTilde(profile, H), k, step)
    worst = 0.0
    for t in (0.0, 0.37, 0.81):
        worst = max(worst, float(np.max(np.abs(hk.value(t, z)))))
    return worst


def max_epsilon_for(frame: NormalFrame, k: int, l: int) -> float:
    """Largest ``eps`` with ``||phi_Q^{eps (k+l-1)}|| <= 2`` (bisection)."""
    x = vector_field_matrix(frame)
    T = k + l - 1
    if T == 0:
        return 1.0
    norm = lambda e: float(np.linalg.norm(expm(e * T * x), 2))
    if norm(1.0) <= 2:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if norm(mid) <= 2 else (lo, mid)
    return lo


class _Difference(Hamiltonian):
    """``H_tilde^{#(k+l)} - H_tilde^{#k} = sum_{j=k}^{k+l-1} H_tilde o (phi^t)^{-j}``."""

    def __init__(self, Ht: HTilde, k: int, l: int, step: float):
        self.it = Iterate(Ht, k + l, step)
        self.k, self.l, self.n = k, l, Ht.n

    def value(self, t, z):
        return sum(self.it.terms(t, z, start=self.k))


class _PeriodizedDifference(Hamiltonian):
    def __init__(self, Ht: HTilde, k: int, l: int, step: float, ramp: Ramp):
        fr, e = Ht.profile.frame, Ht.profile.epsilon
        self.a = Periodized(fr, (k + l) * e, IterateRemainder(Ht, k + l, step), ramp)
        self.b = Periodized(fr, k * e, IterateRemainder(Ht, k, step), ramp)
        self.n = Ht.n

    def value(self, t, z):
        return self.a.value(t, z) - self.b.value(t, z)


@dataclass
class ShiftReport:
    k: int
    l: int
    epsilon: float
    radius: float
    raw: float
    periodized: float
    bound: float
    grid_spacing: float

    @property
    def ok(self) -> bool:
        return self.raw <= self.bound and self.periodized <= self.bound

    def to_dict(self) -> dict:
        return {"k": self.k, "l": self.l, "epsilon": self.epsilon, "radius": self.radius,
                "raw": self.raw, "periodized": self.periodized, "bound": self.bound,
                "grid_spacing": self.grid_spacing, "ok": self.ok}


def shift_bound_check(profile: QTildeProfile, H: HamiltonianSystem, k: int, l: int, *,
                      grid_density: int = 25, n_t: int = 6, step: float = 0.02,
                      periodized: bool = True) -> ShiftReport:
    """``||H^{#(k+l)} - H^{#k}||_{B_{k+l}} <= C3 l`` by grid sup and t quadrature."""
    if k < 1 or l < 1:
        raise ValueError("k and l must be >= 1")
    emax = max_epsilon_for(profile.frame, k, l)
    if profile.epsilon > emax * (1 + 1e-12):
        raise ShiftPreconditionError(
            f"||phi_Q^(eps(k+l-1))|| > 2 for eps={profile.epsilon}; "
            f"largest admissible eps is {emax:.6g}", emax)
    Ht = HTilde(profile, H)
    radius = bk_radius(profile, k + l)
    dim = 2 * profile.frame.n
    raw = hofer_norm(_Difference(Ht, k, l, step), radius, grid_density, dim=dim, n_t=n_t,
                     refine=False)
    per = raw.value
    if periodized:
        per = hofer_norm(_PeriodizedDifference(Ht, k, l, step, Ramp()), radius, grid_density,
                         dim=dim, n_t=n_t, refine=False).value
    return ShiftReport(k, l, profile.epsilon, radius, raw.value, per, profile.C3 * l,
                       raw.grid_spacing)


__all__ = [
    "CheckRow", "Cutoff", "Eta", "HTilde", "IterateRemainder", "QTilde", "QTildeProfile",
    "ShiftPreconditionError", "ShiftReport", "VerificationReport", "bk_radius",
    "build_profile", "iterate_support_check", "max_epsilon_for", "shift_bound_check",
    "smootherstep", "sup_abs_f", "verify_profile",
]
