"""Prime bookkeeping and action/index window planning.

Primes come from a deterministic segmented sieve of Eratosthenes.  A window
plan picks a prime ``p_i`` large enough that ``p_i a > 6 C3 (p_{i+m} - p_i)``
and an ``alpha`` for which the two interval chains hold; every plan is
re-verified by substitution before it is returned.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CAP = 10**12
SEGMENT = 1 << 20


class SieveCapError(RuntimeError):
    """Raised when a search would need primes beyond ``cap``.

    ``resume_from`` is the last prime examined; pass it as the new floor
    together with a larger cap to continue.
    """

    def __init__(self, cap: int, resume_from: int):
        super().__init__(f"prime search exceeded cap {cap}; resume from {resume_from}")
        self.cap = cap
        self.resume_from = resume_from


class PlanVerificationError(AssertionError):
    pass


def sieve(limit: int) -> np.ndarray:
    """All primes ``<= limit``."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for i in range(3, math.isqrt(limit) + 1, 2):
        if is_p[i]:
            is_p[i * i::2 * i] = False
    return np.flatnonzero(is_p).astype(np.int64)


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes in ``[lo, hi)`` by a segmented sieve."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    base = sieve(math.isqrt(hi - 1) + 1)
    mark = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        start = max(p * p, -(-lo // p) * p)
        mark[start - lo::p] = False
    return np.flatnonzero(mark).astype(np.int64) + lo


def prime_stream(lower: int, cap: int = DEFAULT_CAP):
    """Yield primes ``> lower`` in increasing order, up to ``cap``."""
    lo, last = lower + 1, lower
    while lo <= cap:
        hi = min(cap + 1, lo + SEGMENT)
        for p in primes_between(lo, hi):
            last = int(p)
            yield last
        lo = hi
    raise SieveCapError(cap, last)


@dataclass(frozen=True)
class GapReport:
    primes: tuple[int, ...]
    ratios: tuple[float, ...]           # (p_{i+1} - p_i) / p_i
    m: int
    telescoped: tuple[float, ...]       # (p_{i+m} - p_i) / p_i
    min_span_ok: bool                   # p_{i+m} - p_i >= 2m for odd primes

    def to_dict(self) -> dict:
        return {"primes": list(self.primes), "ratios": list(self.ratios), "m": self.m,
                "telescoped": list(self.telescoped), "min_span_ok": self.min_span_ok}


def gap_report(primes, m: int = 1) -> GapReport:
    p = np.asarray(primes, dtype=np.int64)
    ratios = (np.diff(p) / p[:-1]) if len(p) > 1 else np.zeros(0)
    span = p[m:] - p[:-m] if len(p) > m else np.zeros(0, dtype=np.int64)
    tele = span / p[:len(span)] if len(span) else np.zeros(0)
    span_odd = span[p[:len(span)] > 2]
    return GapReport(tuple(int(x) for x in p), tuple(float(x) for x in ratios), m,
                     tuple(float(x) for x in tele), bool(np.all(span_odd >= 2 * m)))


def admissible_primes(lower: int, count: int, m: int = 1,
                      cap: int = DEFAULT_CAP) -> tuple[list[int], GapReport]:
    """The next ``count`` primes strictly above ``lower``, with a gap report."""
    if lower < 2:
        raise ValueError("lower must be >= 2")
    out = []
    for p in prime_stream(lower, cap):
        out.append(p)
        if len(out) == count:
            break
    return out, gap_report(out, m)


# --- windows ----------------------------------------------------------------


def _strictly_increasing(vals) -> bool:
    return all(a < b for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class WindowPlan:
    a: float
    C3: float
    m: int
    primes: tuple[int, ...]             # p_i, ..., p_{i+m}
    delta: float
    alpha_interval: tuple[float, float]
    alpha: float
    chains: dict = field(default_factory=dict)
    degree_selection: str = "out of scope: needs local Floer homology"

    @property
    def p_i(self) -> int:
        return self.primes[0]

    @property
    def p_im(self) -> int:
        return self.primes[-1]

    def verify(self) -> dict:
        """Recompute every inequality from the stored numbers."""
        a, d, al = self.a, self.delta, self.alpha
        pi, pm = self.p_i, self.p_im
        lo, hi = self.alpha_interval
        first = [-pi * a, -al, -al + 2 * d, 0.0, al, al + 2 * d, pi * a]
        second = [-pm * a, -al + d, 0.0, al + d, pm * a]
        return {
            "selection": pi * a > 6 * d,
            "delta": math.isclose(d, self.C3 * (pm - pi), rel_tol=1e-15),
            "alpha_in_interval": lo < al < hi,
            "interval_nonempty": hi - lo > 0,
            "chain_p_i": _strictly_increasing(first),
            "chain_p_im": _strictly_increasing(second),
        }

    @property
    def ok(self) -> bool:
        return all(self.verify().values())

    def to_dict(self) -> dict:
        return {"a": self.a, "C3": self.C3, "m": self.m, "primes": list(self.primes),
                "delta": self.delta, "alpha_interval": list(self.alpha_interval),
                "alpha": self.alpha, "checks": self.verify(),
                "degree_selection": self.degree_selection}


def plan_window(a: float, C3: float, m: int, prime_floor: int = 3,
                cap: int = DEFAULT_CAP) -> WindowPlan:
    """Least prime ``p_i >= prime_floor`` with ``p_i a > 6 C3 (p_{i+m} - p_i)``."""
    if not (a > 0 and C3 > 0):
        raise ValueError("a and C3 must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    # odd primes only; p_{i+m} - p_i >= 2m forces p_i > 12 C3 m / a
    start = max(int(prime_floor), 3, int(math.floor(12 * C3 * m / a)))
    window: list[int] = []
    for p in prime_stream(start - 1, cap):
        window.append(p)
        if len(window) < m + 1:
            continue
        if len(window) > m + 1:
            window.pop(0)
        pi, pm = window[0], window[-1]
        d = C3 * (pm - pi)
        if pi * a > 6 * d:
            lo, hi = pi * a - 4 * d, pi * a - 2 * d
            plan = WindowPlan(a, C3, m, tuple(window), d, (lo, hi), 0.5 * (lo + hi))
            checks = plan.verify()
            if not all(checks.values()):
                raise PlanVerificationError(f"plan failed substitution: {checks}")
            return dataclasses.replace(plan, chains=checks)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class IndexWindow:
    lo: int
    hi: int
    center: float
    n: int

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "center": self.center, "n": self.n}


def mean_index_window(delta_h: float, p: int, n: int) -> IndexWindow:
    """Integers in ``[p*delta_h - n, p*delta_h + n]``."""
    c = p * delta_h
    return IndexWindow(math.ceil(c - n), math.floor(c + n), c, n)


def windows_disjoint(delta_h: float, p: int, q: int, n: int) -> bool:
    """Whether the closed real windows for iterates ``p`` and ``q`` are disjoint."""
    return abs((q - p) * delta_h) > 2 * n


def minimal_separation(delta_h: float, n: int) -> int:
    """Least integer ``m`` with ``m > n / delta_h``."""
    if delta_h == 0:
        raise ValueError("windows never separate when the mean index is zero")
    return math.floor(n / abs(delta_h)) + 1


def disjointness_report(delta_h: float, primes, n: int, m: int | None = None) -> dict:
    """Check window disjointness for all pairs ``(p_i, p_{i+m})`` in ``primes``."""
    m = minimal_separation(delta_h, n) if m is None else m
    p = list(primes)
    pairs = []
    for i in range(len(p) - m):
        a, b = p[i], p[i + m]
        pairs.append({"p_i": a, "p_im": b,
                      "window_i": mean_index_window(delta_h, a, n).to_dict(),
                      "window_im": mean_index_window(delta_h, b, n).to_dict(),
                      "disjoint": windows_disjoint(delta_h, a, b, n)})
    return {"delta": delta_h, "n": n, "m": m, "requires": m > n / abs(delta_h),
            "pairs": pairs, "all_disjoint": all(x["disjoint"] for x in pairs)}
