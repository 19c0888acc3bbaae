"""Mean index and Conley-Zehnder index of sampled symplectic paths.

Normalization: a non-degenerate maximum of an autonomous Hamiltonian with
small Hessian has ``cz = n`` and a hyperbolic path has ``cz = 0``.

Both indices are read off a rotation function ``rho: Sp(2n) -> S^1``,

    rho(M) = (-1)^(m0/2) * prod_{unit eigenvalues e^{ia}, Krein positive} e^{ia},

where ``m0`` counts real negative eigenvalues and an eigenvalue ``v`` is Krein
positive when ``-i v^H Omega v > 0``.  ``rho`` restricted to ``U(n)`` is the
complex determinant, it is continuous, and its continuous lift along a path,
divided by pi, is the mean index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, logm, polar, schur

from .linalg import omega_matrix, symplectic_defect


class IndexError_(ValueError):
    pass


class DegeneratePathError(IndexError_):
    """The endpoint has eigenvalue 1."""


class IndexMethodUnavailable(IndexError_):
    pass


class PathSamplingError(IndexError_):
    """Rotation increments stay above pi/4 after the refinement cap."""


UNIT_TOL = 1e-6
CLUSTER_TOL = 1e-6
DEGENERATE_TOL = 1e-8
MAX_INCREMENT = math.pi / 4


# ---------------------------------------------------------------------------
# spectral data


@dataclass(frozen=True)
class UnitCluster:
    angle: float          # in (0, 2 pi), excluding pi
    dim: int
    positive: int
    negative: int
    semisimple: bool


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    clusters: tuple[UnitCluster, ...]
    m0: int               # real negative eigenvalues (with multiplicity)
    n_unit_minus_one: int

    @property
    def rho_angle(self) -> float:
        return math.pi * self.m0 / 2 + sum(c.positive * c.angle for c in self.clusters)

    @property
    def rho(self) -> complex:
        return complex(np.exp(1j * self.rho_angle))

    @property
    def elliptic(self) -> bool:
        return bool(self.clusters) or self.n_unit_minus_one > 0

    @property
    def hyperbolic(self) -> bool:
        return not self.elliptic and not self.has_one()

    def has_one(self, tol: float = DEGENERATE_TOL) -> bool:
        return bool(np.any(np.abs(self.eigenvalues - 1.0) < tol))


def _group(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(np.angle(values) % (2 * np.pi))
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(values[i] - values[groups[-1][-1]]) < tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    # wrap-around merge near angle 0 is impossible: those are excluded reals
    return groups


def _spectral_2d(m: np.ndarray) -> SpectralData:
    """Trace classification in Sp(2) = SL(2).

    Unlike eigen-solvers this stays continuous through eigenvalue collisions
    at -1 even when ``|M|`` is large.  For elliptic ``M`` the Krein-positive
    eigenvalue is ``e^{i a}`` with ``a = arccos(tr/2)`` when ``M[0,1] > 0``.
    Elliptic forces ``M[0,1] M[1,0] < 0``, so the sign is read from
    ``M[0,1] - M[1,0]``, which survives rounding when one entry is tiny.
    """
    tr = float(m[0, 0] + m[1, 1])
    half = 0.5 * tr
    if abs(half) < 1.0:
        a = math.acos(half)
        ev = np.array([np.exp(1j * a), np.exp(-1j * a)])
        up = m[0, 1] - m[1, 0] > 0
        clusters = (UnitCluster(a, 1, int(up), int(not up), True),
                    UnitCluster(2 * math.pi - a, 1, int(not up), int(up), True))
        return SpectralData(ev, clusters, 0, 0)
    big = half + math.copysign(math.sqrt(half * half - 1.0), half)
    ev = np.array([big, 1.0 / big], dtype=complex)
    if half < 0:
        return SpectralData(ev, (), 2, 2 if half == -1.0 else 0)
    return SpectralData(ev, (), 0, 0)


def spectral_data(m: np.ndarray, unit_tol: float = UNIT_TOL,
                  cluster_tol: float = CLUSTER_TOL) -> SpectralData:
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2
    if n == 1:
        return _spectral_2d(m)
    om = omega_matrix(n)
    ev, vecs = np.linalg.eig(m)
    real = np.abs(ev.imag) <= unit_tol * np.maximum(1.0, np.abs(ev))
    minus_one = int(np.sum(real & (np.abs(ev + 1.0) < unit_tol)))
    # eigenvalues inside the circle are inaccurate for large M; count each
    # off-circle reciprocal pair through its outer member
    outer_neg = real & (ev.real < 0) & (np.abs(ev) >= 1.0 + unit_tol)
    m0 = minus_one + 2 * int(np.sum(outer_neg))
    unit = (~real) & (np.abs(np.abs(ev) - 1.0) < unit_tol)
    idx = np.flatnonzero(unit)
    clusters = []
    for g in _group(ev[idx], cluster_tol):
        members = idx[g]
        center = complex(np.mean(ev[members]))
        d = len(members)
        angle = float(np.angle(center) % (2 * np.pi))
        if d == 1:
            v = vecs[:, members[0]]
            k = float((-1j * v.conj() @ om @ v).real)
            if abs(k) < 1e-10 * float(np.vdot(v, v).real):
                raise IndexMethodUnavailable("degenerate Krein form on an elliptic eigenvalue")
            clusters.append(UnitCluster(angle, 1, int(k > 0), int(k < 0), True))
            continue
        others = np.delete(ev, members)
        gap = float(np.min(np.abs(others - center))) if others.size else 1.0
        rad = 0.5 * gap
        _, z, sdim = schur(m.astype(complex), output="complex",
                           sort=lambda x, c=center, r=rad: abs(x - c) < r)
        if sdim != d:
            raise IndexMethodUnavailable("unstable eigenvalue cluster on the unit circle")
        basis = z[:, :d]
        form = -1j * basis.conj().T @ om @ basis
        form = 0.5 * (form + form.conj().T)
        w = np.linalg.eigvalsh(form)
        if np.min(np.abs(w)) < 1e-10:
            raise IndexMethodUnavailable("degenerate Krein form on an elliptic cluster")
        semisimple = np.linalg.svd(vecs[:, members], compute_uv=False)[-1] > 1e-6
        clusters.append(UnitCluster(angle, d, int(np.sum(w > 0)), int(np.sum(w < 0)),
                                    bool(semisimple)))
    return SpectralData(ev, tuple(clusters), m0, minus_one)


def rho(m: np.ndarray) -> complex:
    """Rotation function value ``rho(M)`` on the unit circle."""
    return spectral_data(m).rho


# ---------------------------------------------------------------------------
# paths


class SymplecticPath:
    """Samples ``(t_i, M_i)`` of a path in ``Sp(2n)`` starting at the identity.

    ``sampler(t)`` (optional) returns the exact matrix at time ``t`` and is
    used to refine the sampling when rotation increments are too large.
    """

    def __init__(self, times: Sequence[float], mats: np.ndarray,
                 sampler: Callable[[float], np.ndarray] | None = None,
                 sym_tol: float = 1e-8):
        times = np.asarray(times, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or mats.shape[0] != times.shape[0] or mats.shape[1] != mats.shape[2] \
                or mats.shape[1] % 2:
            raise ValueError("mats must have shape (len(times), 2n, 2n)")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be increasing")
        if np.max(np.abs(mats[0] - np.eye(mats.shape[1]))) > 1e-8:
            raise ValueError("path must start at the identity")
        for mt in mats:
            scale = max(1.0, float(np.max(np.abs(mt)))) ** 2
            if symplectic_defect(mt) > sym_tol * scale:
                raise ValueError(f"sample is not symplectic (defect {symplectic_defect(mt):.2e})")
        self.times, self.mats, self.sampler = times, mats, sampler

    @property
    def n(self) -> int:
        return self.mats.shape[1] // 2

    @property
    def monodromy(self) -> np.ndarray:
        return self.mats[-1]

    @classmethod
    def from_generator(cls, x: np.ndarray, t_end: float = 1.0, samples: int = 65):
        """Path ``t -> expm(t X)`` of a constant Hamiltonian matrix ``X``."""
        x = np.asarray(x, dtype=float)
        ts = np.linspace(0.0, t_end, samples)
        return cls(ts, np.array([expm(t * x) for t in ts]), sampler=lambda t: expm(t * x))

    @classmethod
    def from_monodromy(cls, m: np.ndarray, samples: int = 65):
        """Path ``expm(t log M)``; requires a real logarithm."""
        lg = logm(np.asarray(m, dtype=float))
        if np.iscomplexobj(lg):
            if np.max(np.abs(lg.imag)) > 1e-8:
                raise IndexMethodUnavailable("monodromy has no real logarithm; pass a path")
            lg = lg.real
        return cls.from_generator(lg, 1.0, samples)

    def iterate(self, k: int) -> "SymplecticPath":
        """The path over ``[0, kT]`` given by ``t + jT -> M(t) M(T)^j``."""
        if k < 1:
            raise ValueError("k must be >= 1")
        T = self.times[-1]
        times, mats = [self.times], [self.mats]
        power = np.eye(2 * self.n)
        for j in range(1, k):
            power = self.monodromy @ power
            times.append(self.times[1:] + j * T)
            mats.append(self.mats[1:] @ power)
        sampler = None
        if self.sampler is not None:
            base, mono = self.sampler, self.monodromy

            def iterated(t):
                j = min(int(t // T), k - 1)
                return base(t - j * T) @ np.linalg.matrix_power(mono, j)
            sampler = iterated
        return SymplecticPath(np.concatenate(times), np.concatenate(mats), sampler)


def _increment(r0: complex, r1: complex) -> float:
    return float(np.angle(r1 / r0))


def rotation_lift(path: SymplecticPath, max_depth: int = 40) -> float:
    """Continuous lift of ``arg rho`` along the path (starting at 0)."""
    rhos = [rho(m) for m in path.mats]
    total = 0.0
    for i in range(len(rhos) - 1):
        total += _lift_segment(path, path.times[i], path.times[i + 1], path.mats[i],
                               path.mats[i + 1], rhos[i], rhos[i + 1], max_depth)
    return total


def _lift_segment(path, t0, t1, m0, m1, r0, r1, depth) -> float:
    inc = _increment(r0, r1)
    if abs(inc) < MAX_INCREMENT:
        return inc
    if path.sampler is None or depth == 0:
        raise PathSamplingError(
            f"rotation increment {abs(inc):.3f} >= pi/4 on [{t0:.6g}, {t1:.6g}]; refine path")
    tm = 0.5 * (t0 + t1)
    mm = path.sampler(tm)
    rm = rho(mm)
    return (_lift_segment(path, t0, tm, m0, mm, r0, rm, depth - 1)
            + _lift_segment(path, tm, t1, mm, m1, rm, r1, depth - 1))


def mean_index(path: SymplecticPath) -> float:
    """Mean index ``Delta`` = (lift of ``arg rho``)/pi; homogeneous under iteration."""
    return rotation_lift(path) / math.pi


def _unitary_det(m: np.ndarray) -> complex:
    n = m.shape[0] // 2
    u, _ = polar(m)
    x, y = u[:n, :n], u[:n, n:]
    return complex(np.linalg.det(x + 1j * y))


def mean_index_polar(path: SymplecticPath, iterates: Sequence[int] = (8, 16)) -> float:
    """Cross-check: winding of ``det_C`` of the unitary polar factor over iterates.

    The winding over ``N`` iterates divided by ``N`` is Richardson-extrapolated
    in ``1/N`` from the two iterate counts given.
    """
    vals = []
    for N in iterates:
        p = path.iterate(N)
        dets = np.array([_unitary_det(m) for m in p.mats])
        steps = np.angle(dets[1:] / dets[:-1])
        if np.max(np.abs(steps)) >= MAX_INCREMENT:
            raise PathSamplingError("polar winding increments too large; refine path")
        vals.append(float(np.sum(steps)) / (math.pi * N))
    if len(vals) == 1:
        return vals[0]
    n1, n2 = iterates[-2], iterates[-1]
    return (n2 * vals[-1] - n1 * vals[-2]) / (n2 - n1)


def cz_index(path: SymplecticPath) -> int:
    """Conley-Zehnder index of a path with non-degenerate endpoint.

    ``cz = [lift(T) + sum_{Krein-positive e^{ia}, a in (0, 2pi)} (pi - a)] / pi``.
    """
    sd = spectral_data(path.monodromy)
    if sd.has_one():
        raise DegeneratePathError("endpoint has eigenvalue 1; CZ index undefined")
    for c in sd.clusters:
        if c.positive and c.negative and not c.semisimple:
            raise IndexMethodUnavailable(
                "non-semisimple elliptic monodromy with mixed Krein signature")
    theta = rotation_lift(path)
    corr = sum(c.positive * (math.pi - c.angle) for c in sd.clusters)
    val = (theta + corr) / math.pi
    k = round(val)
    if abs(val - k) > 1e-6:
        raise IndexMethodUnavailable(f"non-integral CZ value {val:.9f}; refine path")
    return int(k)


@dataclass(frozen=True)
class IndexReport:
    cz: int | str
    mean: float
    nondegenerate: bool
    gap_ok: bool
    n: int

    def to_dict(self) -> dict:
        return {"cz": self.cz, "mean": self.mean, "nondegenerate": self.nondegenerate,
                "gap_ok": self.gap_ok, "n": self.n}


def check_gap(report: IndexReport, n: int | None = None) -> bool:
    """``0 <= |Delta - cz| < n`` (strict)."""
    if not report.nondegenerate:
        raise DegeneratePathError("gap inequality needs a non-degenerate orbit")
    n = report.n if n is None else n
    return abs(report.mean - report.cz) < n


def index_report(path: SymplecticPath) -> IndexReport:
    mean = mean_index(path)
    try:
        cz: int | str = cz_index(path)
    except DegeneratePathError:
        return IndexReport("degenerate", mean, False, False, path.n)
    rep = IndexReport(cz, mean, True, True, path.n)
    return IndexReport(cz, mean, True, check_gap(rep), path.n)


def _cross_angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])


def hyperbolic_index_2d(step_jacobians: Sequence[np.ndarray], sweeps: int = 3) -> IndexReport:
    """Indices of a 2x2 path with hyperbolic endpoint, from its step Jacobians.

    The path is ``Phi(t_i) = J_{i-1} ... J_0``.  For a hyperbolic endpoint the
    lift of ``rho`` equals the angle swept by ``Phi(t) v`` for an eigenvector
    ``v``, and both indices are that angle over pi.  Propagating a normalized
    vector step by step stays accurate when ``|Phi|`` exceeds ``1/eps``,
    where sampled matrices no longer resolve the trace.
    """
    jacs = [np.asarray(j, dtype=float) for j in step_jacobians]
    m = np.eye(2)
    for j in jacs:
        m = j @ m
        m /= np.abs(m).max()                   # direction only; avoid overflow
    vals, vecs = np.linalg.eig(m)
    w = np.real(vecs[:, int(np.argmax(np.abs(vals)))])
    w /= np.linalg.norm(w)
    for _ in range(sweeps):                    # power iteration: unstable direction
        for j in jacs:
            w = j @ w
            w /= np.linalg.norm(w)
    v = w.copy()
    total = 0.0
    for j in jacs:
        w2 = j @ w
        w2 /= np.linalg.norm(w2)
        inc = _cross_angle(w, w2)
        if abs(inc) >= MAX_INCREMENT:
            raise PathSamplingError(f"vector turned {abs(inc):.3f} in one step; refine")
        total += inc
        w = w2
    if abs(_cross_angle(v, w)) > 1e-6 and abs(abs(_cross_angle(v, w)) - math.pi) > 1e-6:
        raise IndexMethodUnavailable("endpoint is not hyperbolic: vector did not return")
    val = -total / math.pi                     # rho-lift orientation
    k = round(val)
    if abs(val - k) > 1e-6:
        raise IndexMethodUnavailable(f"swept angle {val:.9f} pi is not a multiple of pi")
    return IndexReport(int(k), float(k), True, True, 1)


# ---------------------------------------------------------------------------
# dimension four


class IndexInvariantError(AssertionError):
    """A zero-mean 4D orbit with non-zero CZ index was found."""


def classify_4d(m: np.ndarray) -> str:
    """``hyperbolic``, ``quadruple`` (complex off-circle quadruple),
    ``opposite-elliptic`` (two elliptic pairs of opposite rotation), or ``other``."""
    sd = spectral_data(m)
    ev = sd.eigenvalues
    if sd.has_one():
        return "degenerate"
    off = np.abs(np.abs(ev) - 1.0) >= UNIT_TOL
    if np.all(off):
        complex_off = np.abs(ev.imag) > UNIT_TOL
        return "quadruple" if np.all(complex_off) else "hyperbolic"
    if sd.clusters and all(c.positive == c.negative for c in sd.clusters) \
            and sum(c.dim for c in sd.clusters) == 4:
        return "opposite-elliptic"
    if len(sd.clusters) == 2 and all(c.dim == 1 for c in sd.clusters):
        a, b = sd.clusters
        if a.positive != b.positive and abs(a.angle + b.angle - 2 * math.pi) < 1e-6:
            return "opposite-elliptic"
    return "other"


def zero_mean_implies_zero_cz_4d(path_or_monodromy, tol: float = 1e-8) -> bool:
    """Zero mean index forces a hyperbolic or opposite-elliptic structure and ``cz = 0``.

    Returns ``True`` when the mean index vanishes and the structural dichotomy
    and ``cz = 0`` are confirmed; ``False`` when the mean index is non-zero
    (the predicate does not apply).  Raises :class:`IndexInvariantError` when
    a zero-mean orbit violates the dichotomy.
    """
    path = path_or_monodromy if isinstance(path_or_monodromy, SymplecticPath) \
        else SymplecticPath.from_monodromy(path_or_monodromy)
    if path.n != 2:
        raise ValueError("dimension must be four")
    if spectral_data(path.monodromy).has_one():
        raise DegeneratePathError("degenerate monodromy")
    rep = index_report(path)
    if abs(rep.mean) > tol:
        return False
    kind = classify_4d(path.monodromy)
    if kind not in ("hyperbolic", "quadruple", "opposite-elliptic") or rep.cz != 0:
        raise IndexInvariantError(f"zero mean index with structure {kind!r} and cz={rep.cz}")
    return True


# ---------------------------------------------------------------------------
# closed forms for test oracles


def rotation_generator(n: int, rates: Sequence[float]) -> np.ndarray:
    """Hamiltonian matrix rotating plane ``(p_i, q_i)`` by ``2 pi rates[i]`` per unit time,
    in the positive (index-increasing) sense."""
    om = omega_matrix(n)
    d = np.zeros((2 * n, 2 * n))
    for i, a in enumerate(rates):
        for j in (i, n + i):
            d[j, j] = 2 * math.pi * a
    return d @ om


def hyperbolic_generator(n: int, rates: Sequence[float]) -> np.ndarray:
    d = np.concatenate([-np.asarray(rates, float), np.asarray(rates, float)])
    return np.diag(d)


def block_sum(*mats: np.ndarray) -> np.ndarray:
    """Symplectic direct sum of matrices given in their own ``(p, q)`` coordinates."""
    ns = [m.shape[0] // 2 for m in mats]
    n = sum(ns)
    out = np.zeros((2 * n, 2 * n))
    off = 0
    for m, k in zip(mats, ns):
        ip = np.r_[off:off + k]
        iq = np.r_[n + off:n + off + k]
        idx = np.concatenate([ip, iq])
        out[np.ix_(idx, idx)] = m
        off += k
    return out


__all__ = [
    "DegeneratePathError", "IndexInvariantError", "IndexMethodUnavailable", "IndexReport",
    "PathSamplingError", "SpectralData", "SymplecticPath", "UnitCluster", "block_sum",
    "check_gap", "classify_4d", "cz_index", "hyperbolic_generator", "index_report",
    "mean_index", "mean_index_polar", "rho", "rotation_generator", "rotation_lift",
    "spectral_data", "zero_mean_implies_zero_cz_4d",
]
