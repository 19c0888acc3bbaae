"""Fixed points and periodic orbits of time-one maps, with their invariants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Hamiltonian, LoopSample, flow, n_steps, time_one_map
from .indices import (
    IndexError_, IndexReport, SymplecticPath, hyperbolic_index_2d, index_report,
)
from .linalg import symplectic_defect

CLOSURE_TOL = 1e-9
DEDUP_TOL = 1e-6


class NonIsolatedFixedPoint(ValueError):
    pass


@dataclass
class PeriodicOrbit:
    z0: np.ndarray
    period: int
    points: np.ndarray              # phi^j(z0), j = 0..period
    loop: LoopSample
    path: SymplecticPath
    action: float
    index: IndexReport
    minimal_period: int
    residual: float
    topological_index: int | None = None

    @property
    def simple(self) -> bool:
        return self.minimal_period == self.period

    @property
    def degenerate(self) -> bool:
        return not self.index.nondegenerate

    @property
    def monodromy(self) -> np.ndarray:
        return self.path.monodromy

    @property
    def symplectic_error(self) -> float:
        """Defect of ``M^T Omega M = Omega`` relative to ``max(1, |M|)^2``.

        Rounding alone produces an absolute defect of order ``eps |M|^2``,
        which exceeds any fixed threshold on strongly hyperbolic orbits.
        """
        m = self.monodromy
        return float(symplectic_defect(m)) / max(1.0, float(np.abs(m).max())) ** 2

    def max_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.loop.points, axis=1)))

    def to_row(self) -> dict:
        return {"period": self.period, "minimal_period": self.minimal_period,
                "action": self.action, "cz": self.index.cz, "mean": self.index.mean,
                "nondegenerate": self.index.nondegenerate,
                "topological_index": "" if self.topological_index is None
                else self.topological_index,
                "residual": self.residual,
                **{f"z{i}": float(x) for i, x in enumerate(self.z0)}}


# ---------------------------------------------------------------------------
# seeds


def seed_grid(dim: int, radius: float, density: int, rng: np.random.Generator | None = None,
              count: int | None = None) -> np.ndarray:
    """Uniform grid in the ball (2D) or uniform random ball samples (higher dim)."""
    if dim == 2:
        ax = np.linspace(-radius, radius, density)
        g = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
        return g[np.linalg.norm(g, axis=1) <= radius]
    rng = rng or np.random.default_rng(0)
    count = count or density ** 2
    x = rng.standard_normal((count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * radius * rng.uniform(0, 1, (count, 1)) ** (1.0 / dim)


def ring_seeds(radii, per_ring: int = 64, dim: int = 2) -> np.ndarray:
    th = np.linspace(0, 2 * np.pi, per_ring, endpoint=False)
    out = []
    for r in radii:
        z = np.zeros((per_ring, dim))
        z[:, 0], z[:, dim // 2] = r * np.cos(th), r * np.sin(th)
        out.append(z)
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# Newton with multiple shooting


def _residual(H, Z, step, order, jac=False):
    S, k, d = Z.shape
    out = time_one_map(H, Z.reshape(-1, d), step, with_jacobian=jac, order=order)
    Y = out[0] if jac else out
    F = Y.reshape(S, k, d) - np.roll(Z, -1, axis=1)
    if not jac:
        return F
    return F, out[1].reshape(S, k, d, d)


def _shooting_matrix(Jc: np.ndarray) -> np.ndarray:
    S, k, d, _ = Jc.shape
    M = np.zeros((S, k * d, k * d))
    eye = np.eye(d)
    for j in range(k):
        r = slice(j * d, (j + 1) * d)
        M[:, r, r] = Jc[:, j]
        nxt = (j + 1) % k
        M[:, r, nxt * d:(nxt + 1) * d] -= eye
    return M


def shooting_newton(H: Hamiltonian, k: int, seeds: np.ndarray, *, step: float = 1e-2,
                    order: int = 2, tol: float = 1e-13, max_iter: int = 60,
                    max_step: float = 0.25, escape_radius: float = 10.0):
    """Batched damped Newton for ``phi(z_j) = z_{j+1}``, ``z_k = z_0``.

    Returns ``(Z, residual)`` for the seeds that converged.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    d = seeds.shape[1]
    # initial shooting nodes: forward images, clipped so that nothing escapes
    Z = np.empty((len(seeds), k, d))
    Z[:, 0] = seeds
    alive = np.ones(len(seeds), bool)
    for j in range(1, k):
        Z[:, j] = time_one_map(H, Z[:, j - 1], step, order=order)
        alive &= np.linalg.norm(Z[:, j], axis=1) < escape_radius
        Z[~alive, j] = 0.0
    Z, done = Z[alive], np.zeros(alive.sum(), bool)
    res = np.full(len(Z), np.inf)
    for _ in range(max_iter):
        if len(Z) == 0:
            break
        F, Jc = _residual(H, Z, step, order, jac=True)
        res = np.max(np.abs(F), axis=(1, 2))
        done = res < tol * (1 + np.max(np.abs(Z), axis=(1, 2)))
        if np.all(done):
            break
        M = _shooting_matrix(Jc)
        cond_ok = np.isfinite(M).all(axis=(1, 2))
        delta = np.zeros_like(Z)
        try:
            sol = np.linalg.solve(M[cond_ok], -F[cond_ok].reshape(cond_ok.sum(), -1, 1))
            delta[cond_ok] = sol.reshape(-1, k, d)
        except np.linalg.LinAlgError:
            for i in np.flatnonzero(cond_ok):
                try:
                    delta[i] = np.linalg.lstsq(M[i], -F[i].ravel(), rcond=None)[0].reshape(k, d)
                except np.linalg.LinAlgError:
                    cond_ok[i] = False
        size = np.max(np.abs(delta), axis=(1, 2))
        scale = np.minimum(1.0, max_step / np.maximum(size, 1e-300))
        Z = Z + scale[:, None, None] * delta
        keep = (cond_ok & np.all(np.isfinite(Z), axis=(1, 2))
                & (np.max(np.linalg.norm(Z, axis=2), axis=1) < escape_radius))
        Z, res = Z[keep], res[keep]
    if len(Z):
        F = _residual(H, Z, step, order)
        res = np.max(np.abs(F), axis=(1, 2))
        ok = res < CLOSURE_TOL
        return Z[ok], res[ok]
    return Z, res


def _orbit_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets."""
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def minimal_period_of(points: np.ndarray, k: int, tol: float = DEDUP_TOL) -> int:
    """Smallest divisor ``d`` of ``k`` with ``|phi^d(z0) - z0| < tol``."""
    for d in range(1, k + 1):
        if k % d == 0 and np.linalg.norm(points[d] - points[0]) < tol:
            return d
    return k


def minimal_period(orbit: PeriodicOrbit, tol: float = DEDUP_TOL) -> int:
    return minimal_period_of(orbit.points, orbit.period, tol)


def orbit_action(H: Hamiltonian, times: np.ndarray, points: np.ndarray) -> float:
    """``-int omega + int H dt`` with the exact field as velocity.

    Uses the periodic trapezoid rule on uniform samples, which is spectrally
    accurate for smooth loops (unlike the polygon area).
    """
    t, z = times[:-1], points[:-1]
    n = z.shape[1] // 2
    v = np.array([H.field(ti % 1.0, zi) for ti, zi in zip(t, z)])
    p, q, dp, dq = z[:, :n], z[:, n:], v[:, :n], v[:, n:]
    dt = times[1] - times[0]
    area = 0.5 * float(np.sum(p * dq - q * dp)) * dt
    hv = np.array([H.value(ti % 1.0, zi) for ti, zi in zip(t, z)], dtype=float)
    return -area + float(np.sum(hv)) * dt


def build_orbit(H: Hamiltonian, Z: np.ndarray, *, step: float = 1e-2, order: int = 2,
                residual: float | None = None) -> PeriodicOrbit:
    """Assemble an orbit from converged shooting nodes.

    Loop samples and the linearized path live on the integrator's own step
    nodes, so they describe exactly the discrete map whose orbit was found.
    """
    k, d = Z.shape
    z0 = np.array(Z[0], dtype=float)
    N = n_steps(0.0, 1.0, step)
    t_grid = np.linspace(0, k, k * N + 1)
    z, m = z0.copy(), np.eye(d)
    pts, mats, nodes, jacs = [z0], [m], [z0], []
    for j in range(k):
        for i in range(N):
            a, b = t_grid[j * N + i], t_grid[j * N + i + 1]
            z, jac = flow(H, a, b, z, 2.0 * (b - a), with_jacobian=True, order=order)
            m = jac @ m
            jacs.append(jac)
            pts.append(z)
            mats.append(m)
        nodes.append(z)
    nodes_arr = np.array(nodes)
    if residual is None:
        residual = float(np.max(np.abs(nodes_arr[-1] - z0)))
    pts_arr = np.array(pts)
    pts_arr[-1] = z0
    loop = LoopSample(pts_arr, k, close_tol=1e-8)
    mats_arr = np.array(mats)

    def sampler(t):
        i = min(int(np.searchsorted(t_grid, t, side="right")) - 1, len(t_grid) - 2)
        i = max(i, 0)
        if t == t_grid[i]:
            return mats_arr[i]
        _, jac = flow(H, t_grid[i], t, pts_arr[i], step, with_jacobian=True, order=order)
        return jac @ mats_arr[i]

    path = SymplecticPath(t_grid, mats_arr, sampler)
    act = orbit_action(H, loop.times, loop.points)
    return PeriodicOrbit(z0, k, nodes_arr, loop, path, act, _orbit_index(path, jacs),
                         minimal_period_of(nodes_arr, k), float(residual))


def _orbit_index(path: SymplecticPath, jacs) -> IndexReport:
    """Index report; hyperbolic planar orbits use the eigenvector sweep.

    Failures give an ``unavailable`` report instead of aborting the hunt.
    """
    m = path.monodromy
    try:
        return index_report(path)
    except IndexError_:
        pass
    try:
        if m.shape == (2, 2) and abs(m[0, 0] + m[1, 1]) > 2.0 + 1e-6:
            return hyperbolic_index_2d(jacs)
    except IndexError_:
        pass
    return IndexReport("unavailable", math.nan, False, False, path.n)


def dedupe(candidates: list[np.ndarray], tol: float = DEDUP_TOL,
           uncertainty=None) -> list[int]:
    """Indices of representatives; two finds merge when their orbit distance is
    below ``tol`` or below the sum of their position uncertainties."""
    unc = np.zeros(len(candidates)) if uncertainty is None else np.asarray(uncertainty)
    kept: list[int] = []
    for i, Z in enumerate(candidates):
        if not any(Z.shape == candidates[j].shape
                   and _orbit_distance(Z, candidates[j]) < max(tol, unc[i] + unc[j])
                   for j in kept):
            kept.append(i)
    return kept


def position_uncertainty(H: Hamiltonian, Z: np.ndarray, residual: float, step: float,
                         order: int) -> float:
    """``residual / sigma_min`` of the shooting matrix (Newton error estimate)."""
    _, Jc = _residual(H, Z[None], step, order, jac=True)
    smin = float(np.linalg.svd(_shooting_matrix(Jc)[0], compute_uv=False)[-1])
    return 10.0 * residual / max(smin, 1e-300)


def find_periodic(H: Hamiltonian, k: int, seeds=None, *, seed_density: int = 21,
                  radius: float | None = None, step: float = 1e-2, order: int = 2,
                  newton_tol: float = 1e-12,
                  include_origin: bool = True, simple_only: bool = False,
                  topological: bool | None = None) -> list[PeriodicOrbit]:
    """Periodic points of period ``k`` of the time-one map."""
    if k < 1:
        raise ValueError("period must be >= 1")
    dim = 2 * H.n
    if radius is None:
        radius = float(getattr(H, "support_radius", 1.0)) or 1.0
    if seeds is None:
        seeds = seed_grid(dim, radius, seed_density)
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if include_origin:
        seeds = np.concatenate([np.zeros((1, dim)), seeds])
    Z, res = shooting_newton(H, k, seeds, step=step, order=order, tol=newton_tol,
                             escape_radius=3 * radius + 1)
    # collapse each converged chain to its minimal-period orbit representative
    cands, resid = [], []
    for Zi, ri in zip(Z, res):
        pts = np.concatenate([Zi, Zi[:1]])
        mp = minimal_period_of(pts, k)
        if simple_only and mp != k:
            continue
        cands.append(Zi)
        resid.append(float(ri))
    unc = [position_uncertainty(H, Zi, ri, step, order) for Zi, ri in zip(cands, resid)]
    uniq = [(cands[i], resid[i]) for i in dedupe(cands, uncertainty=unc)]
    orbits = [build_orbit(H, U, step=step, order=order, residual=float(r))
              for U, r in uniq]
    if topological is None:
        topological = dim == 2 and k == 1
    if topological and dim == 2:
        allpts = np.concatenate([o.points[:-1] for o in orbits]) if orbits else np.zeros((0, 2))
        for o in orbits:
            others = [p for p in allpts if np.linalg.norm(p - o.z0) > 0]
            try:
                o.topological_index = topological_index_2d(H, o.z0, k=k, others=others,
                                                           step=step, order=order)
            except NonIsolatedFixedPoint:
                o.topological_index = None
    return orbits


def find_fixed_points(H: Hamiltonian, seeds=None, **kw) -> list[PeriodicOrbit]:
    return find_periodic(H, 1, seeds, **kw)


# ---------------------------------------------------------------------------
# 2D topological index


def topological_index_2d(H: Hamiltonian, z0, *, k: int = 1, others=(), radius=None,
                         step: float = 1e-2, order: int = 2, samples: int = 128) -> int:
    """Winding number of ``phi^k(z) - z`` along a small circle about ``z0``.

    Unless ``radius`` is given, the circle is shrunk below half the distance
    to the other known periodic points and, for non-degenerate points, until
    the linear part of ``phi^k - id`` dominates the remainder on the circle
    (a Rouche-type test that rules out undiscovered nearby zeros).
    """
    if H.n != 1:
        raise ValueError("topological index is implemented for 2n = 2")
    z0 = np.asarray(z0, dtype=float)
    dists = [float(np.linalg.norm(np.asarray(o) - z0)) for o in others]
    dists = [x for x in dists if x > 0]
    if any(x < DEDUP_TOL for x in dists):
        raise NonIsolatedFixedPoint(f"another fixed point within {DEDUP_TOL:g} of {z0}")
    r = radius if radius is not None else min([0.02] + [0.4 * x for x in dists])

    def images(pts):
        y = pts
        for _ in range(k):
            y = time_one_map(H, y, step, order=order)
        return y

    if radius is None:
        y, jac = flow(H, 0.0, float(k), z0, step, with_jacobian=True, order=order)
        L = jac - np.eye(2)
        smin = float(np.linalg.svd(L, compute_uv=False)[-1])
        if smin > 1e-10:
            ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
            e = np.stack([np.cos(ang), np.sin(ang)], 1)
            for _ in range(40):
                pts = z0 + r * e
                rem = images(pts) - pts - y + z0 - r * e @ L.T
                if np.max(np.linalg.norm(rem, axis=1)) < 0.5 * smin * r:
                    break
                r *= 0.5
            else:
                raise NonIsolatedFixedPoint(
                    f"cannot certify an isolating circle about {z0} in double precision")

    def g(theta):
        pts = z0 + r * np.stack([np.cos(theta), np.sin(theta)], 1)
        return images(pts) - pts

    # adaptive bisection: near-degenerate points make phi^k - id almost rank
    # one, so the direction turns by ~pi inside a very narrow arc
    th = np.linspace(0, 2 * np.pi, samples + 1)
    v = g(th)
    for _ in range(60):
        if np.min(np.linalg.norm(v, axis=1)) == 0:
            raise NonIsolatedFixedPoint(f"phi^{k} - id vanishes on the circle about {z0}")
        ang = np.arctan2(v[:, 1], v[:, 0])
        inc = np.angle(np.exp(1j * np.diff(ang)))
        bad = np.flatnonzero(np.abs(inc) > np.pi / 8)
        if len(bad) == 0:
            return int(round(float(np.sum(inc)) / (2 * np.pi)))
        if len(th) > 200_000:
            break
        frac = np.arange(1, 16) / 16
        mids = (th[bad, None] + frac * (th[bad + 1] - th[bad])[:, None]).ravel()
        vm = g(mids)
        th = np.insert(th, np.repeat(bad + 1, 15), mids)
        v = np.insert(v, np.repeat(bad + 1, 15), vm, axis=0)
    raise NonIsolatedFixedPoint(f"could not resolve the winding about {z0}")


# ---------------------------------------------------------------------------
# spectra and tables


@dataclass(frozen=True)
class ActionSpectrum:
    values: tuple[float, ...]
    multiplicities: tuple[int, ...]

    @property
    def min_gap(self) -> float:
        v = np.array(self.values)
        return float(np.min(np.diff(v))) if len(v) > 1 else math.inf

    @property
    def gap_around_zero(self) -> float:
        """Largest ``a`` such that 0 is the only action in ``(-a, a)``."""
        v = np.abs(np.array([x for x in self.values if abs(x) > 0]))
        return float(v.min()) if len(v) else math.inf

    def to_dict(self) -> dict:
        return {"values": list(self.values), "multiplicities": list(self.multiplicities),
                "min_gap": self.min_gap, "gap_around_zero": self.gap_around_zero}


def action_spectrum(orbits, tol: float = 1e-8) -> ActionSpectrum:
    vals = sorted(o.action if hasattr(o, "action") else float(o) for o in orbits)
    out, mult = [], []
    for v in vals:
        if out and abs(v - out[-1]) <= tol * max(1.0, abs(v)):
            mult[-1] += 1
        else:
            out.append(v)
            mult.append(1)
    return ActionSpectrum(tuple(out), tuple(mult))


ORBIT_COLUMNS = ["period", "minimal_period", "action", "cz", "mean", "nondegenerate",
                 "topological_index", "residual"]


def write_orbits_csv(path, orbits) -> None:
    orbits = list(orbits)
    dim = len(orbits[0].z0) if orbits else 0
    cols = ORBIT_COLUMNS + [f"z{i}" for i in range(dim)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for o in orbits:
            w.writerow(o.to_row())


@dataclass
class OrbitCheck:
    residual_ok: bool
    gap_ok: bool
    confined: bool
    symplectic_ok: bool

    @property
    def ok(self) -> bool:
        return self.residual_ok and self.gap_ok and self.confined and self.symplectic_ok


def check_orbit(orbit: PeriodicOrbit, support_radius: float) -> OrbitCheck:
    conf = orbit.max_radius() <= support_radius * (1 + 1e-9) or orbit.max_radius() < 1e-12
    gap = orbit.index.nondegenerate and orbit.index.gap_ok
    return OrbitCheck(orbit.residual < CLOSURE_TOL, bool(gap), bool(conf),
                      orbit.symplectic_error < 1e-8)


@dataclass
class HuntResult:
    orbits: dict = field(default_factory=dict)      # period -> list[PeriodicOrbit]
    seeds: dict = field(default_factory=dict)       # period -> seed count

    def simple(self, period: int) -> list[PeriodicOrbit]:
        return [o for o in self.orbits.get(period, []) if o.simple]

    def all(self) -> list[PeriodicOrbit]:
        return [o for p in sorted(self.orbits) for o in self.orbits[p]]
