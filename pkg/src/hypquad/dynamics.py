"""Flows, iteration, action and norms for Hamiltonians equal to ``kappa*Q`` at infinity.

All evaluators act on batches: ``z`` has shape ``(..., 2n)``.  Time-one maps
are those of the implicit midpoint rule on the uniform grid of ``[0, 1]``
with ``round(1/step)`` steps, so "periodic orbits" are orbits of this
(symplectic) discrete map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import field_matrix
from .quadform import NormalFrame, exact_linear_flow, vector_field_matrix


class IntegrationError(RuntimeError):
    """Newton iteration inside an implicit midpoint step failed."""


class FlowInversionError(IntegrationError):
    pass


# ---------------------------------------------------------------------------
# evaluators


class Hamiltonian:
    """Base evaluator: subclasses provide ``value`` and ``gradient``.

    ``hessian`` defaults to central differences of ``gradient``.
    """

    n: int
    fd_step = 1e-6

    def value(self, t, z):
        raise NotImplementedError

    def gradient(self, t, z):
        raise NotImplementedError

    def hessian(self, t, z):
        z = np.asarray(z, dtype=float)
        d = 2 * self.n
        cols = []
        for i in range(d):
            e = np.zeros(d)
            e[i] = self.fd_step * max(1.0, float(np.max(np.abs(z)))) if z.size else self.fd_step
            cols.append((self.gradient(t, z + e) - self.gradient(t, z - e)) / (2 * e[i]))
        h = np.stack(cols, axis=-1)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    def field(self, t, z):
        return self.gradient(t, z) @ field_matrix(self.n).T

    def __call__(self, t, z):
        return self.value(t, z)


@dataclass(frozen=True)
class TimeProfile:
    """Smooth one-periodic weight ``mean + sum a_j cos(2 pi j t) + b_j sin(2 pi j t)``."""

    mean: float = 1.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        w = np.full_like(t, self.mean)
        for j, a in enumerate(self.cos, start=1):
            w = w + a * np.cos(2 * np.pi * j * t)
        for j, b in enumerate(self.sin, start=1):
            w = w + b * np.sin(2 * np.pi * j * t)
        return w

    @property
    def sup(self) -> float:
        return abs(self.mean) + sum(map(abs, self.cos)) + sum(map(abs, self.sin))

    @property
    def is_constant(self) -> bool:
        return not any(self.cos) and not any(self.sin)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "cos": list(self.cos), "sin": list(self.sin)}

    @classmethod
    def from_dict(cls, d: dict | None) -> "TimeProfile":
        if d is None:
            return cls()
        _reject_unknown(d, {"mean", "cos", "sin"}, "time_profile")
        return cls(float(d.get("mean", 1.0)), tuple(map(float, d.get("cos", ()))),
                   tuple(map(float, d.get("sin", ()))))


def _reject_unknown(d: dict, allowed: set, what: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ValueError(f"unknown {what} key(s) {extra}")


@dataclass(frozen=True)
class Bump:
    """``amplitude * w(t) * (1 - |z - c|^2 / radius^2)^3`` inside the ball, zero outside."""

    center: tuple[float, ...]
    radius: float
    amplitude: float
    time_profile: TimeProfile = field(default_factory=TimeProfile)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")

    def _parts(self, z):
        d = np.asarray(z, dtype=float) - np.asarray(self.center)
        u = 1.0 - np.sum(d * d, axis=-1) / self.radius ** 2
        u = np.maximum(u, 0.0)
        return d, u

    def value(self, t, z):
        _, u = self._parts(z)
        return self.amplitude * self.time_profile(t) * u ** 3

    def gradient(self, t, z):
        d, u = self._parts(z)
        w = self.amplitude * self.time_profile(t)
        coef = -6.0 * u ** 2 / self.radius ** 2
        return (np.asarray(w) * coef)[..., None] * d

    def hessian(self, t, z):
        d, u = self._parts(z)
        w = np.asarray(self.amplitude * self.time_profile(t))
        r2 = self.radius ** 2
        dim = d.shape[-1]
        c1 = -6.0 * u ** 2 / r2
        c2 = 24.0 * u / r2 ** 2
        h = c1[..., None, None] * np.eye(dim) + c2[..., None, None] * d[..., :, None] * d[..., None, :]
        return w[..., None, None] * h

    @property
    def sup(self) -> float:
        return abs(self.amplitude) * self.time_profile.sup

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius,
                "amplitude": self.amplitude, "time_profile": self.time_profile.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Bump":
        _reject_unknown(d, {"center", "radius", "amplitude", "time_profile"}, "bump")
        return cls(tuple(d["center"]), float(d["radius"]), float(d["amplitude"]),
                   TimeProfile.from_dict(d.get("time_profile")))


class HamiltonianSystem(Hamiltonian):
    """``H(t, z) = kappa * Q(z) + sum of bumps``, equal to ``kappa*Q`` outside radius ``r``."""

    def __init__(self, frame: NormalFrame, bumps: Sequence[Bump] = (),
                 kappa: float = 1.0, support_radius: float | None = None):
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        self.frame = frame
        self.n = frame.n
        self.kappa = float(kappa)
        self.bumps = tuple(bumps)
        reach = max((np.linalg.norm(b.center) + b.radius for b in self.bumps), default=0.0)
        if support_radius is None:
            support_radius = reach
        if reach > support_radius * (1 + 1e-12):
            raise ValueError(f"bump support reaches radius {reach:.6g} > support radius "
                             f"{support_radius:.6g}")
        for b in self.bumps:
            if len(b.center) != 2 * self.n:
                raise ValueError("bump center has wrong dimension")
        self.support_radius = float(support_radius)
        self._hess_q = kappa * frame.hessian

    @property
    def autonomous(self) -> bool:
        return all(b.time_profile.is_constant for b in self.bumps)

    @property
    def sup_f(self) -> float:
        return sum(b.sup for b in self.bumps)

    def with_kappa(self, kappa: float) -> "HamiltonianSystem":
        return HamiltonianSystem(self.frame, self.bumps, kappa, self.support_radius)

    def perturbation(self, t, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape[:-1])
        for b in self.bumps:
            out = out + b.value(t, z)
        return out

    def perturbation_gradient(self, t, z):
        z = np.asarray(z, dtype=float)
        g = np.zeros_like(z)
        for b in self.bumps:
            g = g + b.gradient(t, z)
        return g

    def value(self, t, z):
        return self.kappa * self.frame.Q(z) + self.perturbation(t, z)

    def gradient(self, t, z):
        z = np.asarray(z, dtype=float)
        return z @ self._hess_q.T + self.perturbation_gradient(t, z)

    def hessian(self, t, z):
        z = np.asarray(z, dtype=float)
        h = np.broadcast_to(self._hess_q, z.shape[:-1] + self._hess_q.shape).copy()
        for b in self.bumps:
            h = h + b.hessian(t, z)
        return h

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "support_radius": self.support_radius,
                "bumps": [b.to_dict() for b in self.bumps], "frame": self.frame.to_dict()}


# ---------------------------------------------------------------------------
# integration


def _midpoint_step(H: Hamiltonian, t: float, z0: np.ndarray, h: float,
                   tol: float = 1e-13, max_iter: int = 40, want_jac: bool = False):
    j0 = field_matrix(H.n)
    tm = t + 0.5 * h
    z1 = z0 + h * H.field(tm, z0)
    eye = np.eye(2 * H.n)
    for _ in range(max_iter):
        zm = 0.5 * (z0 + z1)
        res = z1 - z0 - h * H.field(tm, zm)
        dx = j0 @ H.hessian(tm, zm)
        jac = eye - 0.5 * h * dx
        delta = np.linalg.solve(jac, res[..., None])[..., 0]
        z1 = z1 - delta
        scale = 1.0 + np.max(np.abs(z1))
        if np.max(np.abs(delta)) <= tol * scale:
            break
    else:
        raise IntegrationError(
            f"implicit midpoint Newton did not converge at t={t:.6g} with step {h:.3g}; "
            "try a smaller step")
    if not want_jac:
        return z1, None
    zm = 0.5 * (z0 + z1)
    dx = j0 @ H.hessian(tm, zm)
    step_jac = np.linalg.solve(eye - 0.5 * h * dx, eye + 0.5 * h * dx)
    return z1, step_jac


def n_steps(t0: float, t1: float, step: float) -> int:
    if step <= 0:
        raise ValueError("step must be positive")
    return max(1, int(math.ceil(abs(t1 - t0) / step - 1e-9)))


_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


def flow(H: Hamiltonian, t0: float, t1: float, z0, step: float = 1e-2, *,
         with_jacobian: bool = False, trajectory: bool = False, order: int = 2):
    """Implicit midpoint flow from ``t0`` to ``t1``.

    ``order=4`` uses the symmetric triple-jump composition of midpoint steps
    (still symplectic, and the backward flow is the exact inverse).  Returns
    ``z1`` and, on request, the Jacobian ``d z1 / d z0`` (product of the exact
    derivatives of the discrete steps) and the trajectory at the step nodes.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    z = np.array(z0, dtype=float)
    N = n_steps(t0, t1, step)
    h = (t1 - t0) / N
    weights = (1.0,) if order == 2 else _YOSHIDA
    jac = np.broadcast_to(np.eye(2 * H.n), z.shape[:-1] + (2 * H.n, 2 * H.n)).copy() \
        if with_jacobian else None
    traj = [z.copy()] if trajectory else None
    for i in range(N):
        t = t0 + i * h
        for w in weights:
            z, sj = _midpoint_step(H, t, z, w * h, want_jac=with_jacobian)
            t += w * h
            if with_jacobian:
                jac = sj @ jac
        if trajectory:
            traj.append(z.copy())
    out = [z]
    if with_jacobian:
        out.append(jac)
    if trajectory:
        out.append(np.stack(traj, axis=-2))
    return out[0] if len(out) == 1 else tuple(out)


def time_one_map(H: Hamiltonian, z, step: float = 1e-2, with_jacobian: bool = False,
                 order: int = 2):
    return flow(H, 0.0, 1.0, z, step, with_jacobian=with_jacobian, order=order)


def linearized_flow(H: Hamiltonian, z0, t_grid: Sequence[float], step: float = 1e-2):
    """Sampled ``d phi^t`` along the orbit of ``z0`` at the times ``t_grid``.

    Returns ``(points, SymplecticPath)``; ``t_grid`` must start at 0.
    """
    from .indices import SymplecticPath

    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    z = np.array(z0, dtype=float)
    d = 2 * H.n
    m = np.eye(d)
    mats = [m.copy()]
    pts = [z.copy()]
    for a, b in zip(t_grid[:-1], t_grid[1:]):
        z, j = flow(H, a, b, z, step, with_jacobian=True)
        m = j @ m
        mats.append(m.copy())
        pts.append(z.copy())
    pts_arr, mats_arr = np.array(pts), np.array(mats)

    def sampler(t):
        i = max(0, int(np.searchsorted(t_grid, t, side="right")) - 1)
        if t == t_grid[i]:
            return mats_arr[i]
        _, j = flow(H, t_grid[i], t, pts_arr[i], step, with_jacobian=True)
        return j @ mats_arr[i]

    return pts_arr, SymplecticPath(t_grid, mats_arr, sampler)


def rk4_flow(field_fn: Callable, t0: float, t1: float, z0, step: float = 1e-2):
    """Classical RK4 for evaluators that only expose a vector field."""
    z = np.array(z0, dtype=float)
    N = n_steps(t0, t1, step)
    h = (t1 - t0) / N
    t = t0
    for _ in range(N):
        k1 = field_fn(t, z)
        k2 = field_fn(t + h / 2, z + h / 2 * k1)
        k3 = field_fn(t + h / 2, z + h / 2 * k2)
        k4 = field_fn(t + h, z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return z


# ---------------------------------------------------------------------------
# composition and iteration


class Composition(Hamiltonian):
    """``(K # G)_t = K_t + G_t o (phi_K^t)^{-1}``; its flow is ``phi_K^t o phi_G^t``.

    ``K`` must be integrable by :func:`flow`; ``G`` may be any evaluator with
    ``value`` and ``field``.
    """

    def __init__(self, K: Hamiltonian, G: Hamiltonian, step: float = 1e-2, order: int = 2):
        if K.n != G.n:
            raise ValueError("composed Hamiltonians must share the dimension")
        self.K, self.G, self.n, self.step, self.order = K, G, K.n, step, order

    def _pullback(self, t, z, with_jacobian=False):
        if t == 0:
            w = np.array(z, dtype=float)
            return (w, np.eye(2 * self.n)) if with_jacobian else w
        try:
            return flow(self.K, t, 0.0, z, self.step, with_jacobian=with_jacobian,
                        order=self.order)
        except IntegrationError as exc:
            raise FlowInversionError(str(exc)) from exc

    def value(self, t, z):
        return self.K.value(t, z) + self.G.value(t, self._pullback(t, z))

    def field(self, t, z):
        w, jb = self._pullback(t, z, with_jacobian=True)
        xg = self.G.field(t, w)
        # d phi_K^t at w is the inverse of the backward Jacobian
        return self.K.field(t, z) + np.linalg.solve(jb, xg[..., None])[..., 0]

    def gradient(self, t, z):
        # X = J0 grad  =>  grad = -J0 X
        return -(self.field(t, z) @ field_matrix(self.n).T)


class Iterate(Hamiltonian):
    """``H^{#k}_t = sum_{j<k} H_t o (phi_H^t)^{-j}``."""

    def __init__(self, H: Hamiltonian, k: int, step: float = 1e-2, order: int = 2):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.H, self.k, self.n, self.step, self.order = H, int(k), H.n, step, order

    def pullbacks(self, t, z, count: int | None = None):
        """Points ``(phi_H^t)^{-j} z`` for ``j = 0..count-1``."""
        count = self.k if count is None else count
        out = [np.array(z, dtype=float)]
        for _ in range(count - 1):
            out.append(out[-1] if t == 0
                       else flow(self.H, t, 0.0, out[-1], self.step, order=self.order))
        return out

    def terms(self, t, z, start: int = 0, stop: int | None = None):
        stop = self.k if stop is None else stop
        pts = self.pullbacks(t, z, stop)
        return [self.H.value(t, w) for w in pts[start:stop]]

    def value(self, t, z):
        return sum(self.terms(t, z))

    def field(self, t, z):
        if self.k == 1:
            return self.H.field(t, z)
        inner = Iterate(self.H, self.k - 1, self.step, self.order)
        return Composition(self.H, inner, self.step, self.order).field(t, z)

    def gradient(self, t, z):
        return -(self.field(t, z) @ field_matrix(self.n).T)


def compose_natural(K: Hamiltonian, H: Hamiltonian, step: float = 1e-2,
                    order: int = 2) -> Composition:
    if isinstance(K, HamiltonianSystem) and isinstance(H, HamiltonianSystem):
        if not np.allclose(K.frame.A, H.frame.A):
            raise ValueError("systems must share the normal frame")
    return Composition(K, H, step, order)


def iterate(H: Hamiltonian, k: int, step: float = 1e-2, order: int = 2) -> Hamiltonian:
    if k == 1:
        return H
    return Iterate(H, k, step, order)


# ---------------------------------------------------------------------------
# action and norms


@dataclass(frozen=True)
class LoopSample:
    """Samples of a closed loop ``gamma(t)``, ``t`` in ``[0, period]``.

    ``points`` has shape ``(N+1, 2n)`` with the last point closing the loop.
    """

    points: np.ndarray
    period: int = 1
    close_tol: float = 1e-8

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValueError("loop needs at least two samples")
        gap = float(np.linalg.norm(pts[-1] - pts[0]))
        if gap > self.close_tol * (1.0 + float(np.max(np.abs(pts)))):
            raise ValueError(f"loop is not closed (gap {gap:.3g})")
        if pts.shape[0] - 1 < 16 * self.period:
            raise ValueError("need at least 16 samples per unit period")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.period, self.points.shape[0])


def symplectic_area(points: np.ndarray) -> float:
    """``int_disc omega = 1/2 oint (p dq - q dp)`` by the shoelace rule.

    Positive for loops turning counterclockwise in each ``(p_i, q_i)`` plane.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[1] // 2
    p, q = pts[:, :n], pts[:, n:]
    return 0.5 * float(np.sum(p[:-1] * q[1:] - q[:-1] * p[1:]))


def action(H: Hamiltonian, loop: LoopSample) -> float:
    """``A_H(gamma) = -int omega + int H_t(gamma(t)) dt`` (trapezoidal)."""
    t = loop.times
    vals = np.array([H.value(ti % 1.0, zi) for ti, zi in zip(t, loop.points)], dtype=float)
    return -symplectic_area(loop.points) + float(np.trapezoid(vals, t))


@dataclass(frozen=True)
class HoferNormResult:
    value: float
    sup_per_t: np.ndarray
    times: np.ndarray
    grid_spacing: float
    n_points: int

    def __float__(self):
        return self.value


def _ball_grid(dim: int, radius: float, density: int, center=None) -> tuple[np.ndarray, float]:
    axis = np.linspace(-radius, radius, density)
    mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    mesh = mesh[np.sum(mesh * mesh, axis=1) <= radius ** 2 * (1 + 1e-12)]
    # boundary shell catches suprema on the sphere
    k = max(8, density ** min(dim - 1, 3))
    rng = np.random.default_rng(12345)
    shell = rng.standard_normal((k, dim))
    shell = radius * shell / np.linalg.norm(shell, axis=1, keepdims=True)
    pts = np.concatenate([mesh, shell])
    if center is not None:
        pts = pts + np.asarray(center)
    return pts, 2 * radius / max(density - 1, 1)


def sup_abs_on_ball(F: Callable, t: float, dim: int, radius: float, density: int,
                    refine: bool = True, center=None, n_refine: int = 3) -> float:
    """``sup_{|z - c| <= radius} |F(t, z)|`` by grid search plus local polishing."""
    pts, _ = _ball_grid(dim, radius, density, center)
    vals = np.abs(np.asarray(F(t, pts), dtype=float))
    best = float(vals.max())
    if not refine or best == 0.0:
        return best
    c0 = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def proj(y):
        d = y - c0
        r = np.linalg.norm(d)
        return y if r <= radius else c0 + d * (radius / r)

    for idx in np.argsort(vals)[-n_refine:]:
        res = minimize(lambda y: -abs(float(F(t, proj(y)[None])[0])), pts[idx],
                       method="Nelder-Mead",
                       options={"xatol": 1e-10 * max(radius, 1), "fatol": 1e-13,
                                "maxiter": 400 * dim})
        best = max(best, -float(res.fun))
    return best


def hofer_norm(F: Callable, ball_radius: float, grid_density: int = 41, *,
               dim: int | None = None, n_t: int = 16, autonomous: bool = False,
               refine: bool = True, center=None) -> HoferNormResult:
    """``||F||_B = int_{S^1} sup_B |F_t| dt`` (grid sup, periodic trapezoid in ``t``)."""
    if grid_density <= 0:
        raise ValueError("grid_density must be positive")
    if dim is None:
        dim = 2 * F.n
    value_fn = F.value if hasattr(F, "value") else F
    times = np.array([0.0]) if autonomous else np.arange(n_t) / n_t
    sups = np.array([sup_abs_on_ball(value_fn, float(t), dim, ball_radius, grid_density,
                                     refine=refine, center=center) for t in times])
    _, spacing = _ball_grid(dim, ball_radius, min(grid_density, 3))
    return HoferNormResult(float(np.mean(sups)), sups, times,
                           2 * ball_radius / max(grid_density - 1, 1),
                           grid_density ** dim)


# ---------------------------------------------------------------------------
# periodization


def _smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10 - 15 * u + 6 * u ** 2)


def _smootherstep_d(u):
    inside = (u > 0) & (u < 1)
    uc = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30 * uc ** 2 * (1 - uc) ** 2, 0.0)


class Ramp:
    """Increasing reparametrization ``lambda: [0,1] -> [0,1]``, flat near both ends."""

    def __init__(self, flat: float = 0.1, fn: Callable | None = None,
                 dfn: Callable | None = None, check_samples: int = 2001):
        if fn is None:
            if not 0 <= flat < 0.5:
                raise ValueError("flat must lie in [0, 0.5)")
            width = 1 - 2 * flat
            fn = lambda t: _smootherstep((np.asarray(t) - flat) / width)
            dfn = lambda t: _smootherstep_d((np.asarray(t) - flat) / width) / width
        elif dfn is None:
            raise ValueError("a custom ramp needs its derivative")
        ts = np.linspace(0, 1, check_samples)
        vals = np.asarray(fn(ts))
        if np.any(np.diff(vals) < -1e-14) or np.any(np.asarray(dfn(ts)) < -1e-14):
            raise ValueError("ramp must be non-decreasing")
        if abs(vals[0]) > 1e-12 or abs(vals[-1] - 1) > 1e-12:
            raise ValueError("ramp must map 0 -> 0 and 1 -> 1")
        self.fn, self.dfn = fn, dfn

    def __call__(self, t):
        return self.fn(t)

    def derivative(self, t):
        return self.dfn(t)


class Periodized(Hamiltonian):
    """``G_bar = K + lambda'(t) g_{lambda(t)} o phi_K^{lambda(t) - t}`` for ``K = kappa*Q``."""

    def __init__(self, frame: NormalFrame, kappa: float, g: Hamiltonian, ramp: Ramp):
        self.frame, self.kappa, self.g, self.ramp = frame, float(kappa), g, ramp
        self.n = frame.n
        self._xk = kappa * vector_field_matrix(frame)

    def _lin(self, t):
        from scipy.linalg import expm
        return expm((float(self.ramp(t)) - t) * self._xk)

    def value(self, t, z):
        z = np.asarray(z, dtype=float)
        lam, dlam = float(self.ramp(t)), float(self.ramp.derivative(t))
        base = self.kappa * self.frame.Q(z)
        if dlam == 0.0:
            return base
        return base + dlam * self.g.value(lam, z @ self._lin(t).T)

    def gradient(self, t, z):
        z = np.asarray(z, dtype=float)
        lam, dlam = float(self.ramp(t)), float(self.ramp.derivative(t))
        base = self.kappa * self.frame.grad_Q(z)
        if dlam == 0.0:
            return base
        L = self._lin(t)
        return base + dlam * (self.g.gradient(lam, z @ L.T) @ L)


def periodize(frame: NormalFrame, kappa: float, g: Hamiltonian,
              ramp: Ramp | None = None) -> Periodized:
    return Periodized(frame, kappa, g, ramp or Ramp())


def write_trajectory_csv(path, times, points) -> None:
    """Write columns ``t, p_1..p_n, q_1..q_n``."""
    import csv

    pts = np.asarray(points, dtype=float)
    n = pts.shape[1] // 2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"p{i + 1}" for i in range(n)] + [f"q{i + 1}" for i in range(n)])
        for t, z in zip(times, pts):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in z])


class Perturbation(Hamiltonian):
    """The compactly supported part ``f`` of a :class:`HamiltonianSystem`."""

    def __init__(self, H: HamiltonianSystem):
        self.H, self.n = H, H.n

    def value(self, t, z):
        return self.H.perturbation(t, z)

    def gradient(self, t, z):
        return self.H.perturbation_gradient(t, z)


__all__ = [
    "Bump", "Composition", "FlowInversionError", "Hamiltonian", "HamiltonianSystem",
    "HoferNormResult", "IntegrationError", "Iterate", "LoopSample", "Periodized",
    "Perturbation", "Ramp", "TimeProfile", "action", "compose_natural",
    "exact_linear_flow", "flow", "hofer_norm", "iterate", "linearized_flow",
    "n_steps", "periodize", "rk4_flow", "sup_abs_on_ball", "symplectic_area",
    "time_one_map", "write_trajectory_csv",
]
