"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed to the terminal even when output capture is on.
"""
import math
import sys
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from hypquad.dynamics import (
    Bump, HamiltonianSystem, TimeProfile, flow, hofer_norm, iterate,
)
from hypquad.floercheck import (
    HomotopyProfile, is_slow, random_solution, reparametrize_to_slow, slow_inequality_audit,
    subharmonicity_check,
)
from hypquad.indices import (
    SymplecticPath, block_sum, cz_index, hyperbolic_generator, mean_index, rotation_generator,
)
from hypquad.linalg import field_matrix, omega_matrix
from hypquad.orbits import check_orbit, find_fixed_points, find_periodic
from hypquad.quadform import (
    BlockSpec, build_normal_form, check_smallness, random_block_spec, rescale_to_small,
    sampled_inverse_form_norm, slow_bound,
)
from hypquad.taming import build_profile, max_epsilon_for, shift_bound_check, verify_profile
from hypquad.windows import (
    admissible_primes, disjointness_report, minimal_separation, plan_window,
)

PQ = build_normal_form(BlockSpec(((1.0, 1),)))
EXAMPLE = HamiltonianSystem(PQ, [Bump((0.0, 0.0), 1.5, 0.9375, TimeProfile(1.0, (0.1,)))])
WEAK = HamiltonianSystem(PQ, [Bump((0.2, -0.1), 0.8, 0.05, TimeProfile(1.0, (0.5,)))],
                         support_radius=1.1)
PRIMES_31 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31)


@pytest.fixture
def verdict(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_1_smallness(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = math.inf
    for _ in range(50):
        f = rescale_to_small(build_normal_form(random_block_spec(rng, n_max=6)))
        m = check_smallness(f).margins()
        worst = min(worst, m["i"], m["ii"], m["iii"])
    dt = time.perf_counter() - t0
    verdict(1, worst >= -1e-10 and dt < 5, f"min margin {worst:.3g} over 50 specs, {dt:.2f}s")


def test_criterion_2_subharmonicity(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    frames = [PQ] + [rescale_to_small(build_normal_form(random_block_spec(rng, n_max=3)))
                     for _ in range(5)]
    frames.append(rescale_to_small(build_normal_form(BlockSpec(((1.0, 3),)))))
    worst, boundary, count, ns = math.inf, True, 0, set()
    for i in range(105):
        fr = frames[i % len(frames)]
        fld = random_solution(fr, rng, max_mode=4).sample(-0.5, 0.5, 64, 64)
        rep = subharmonicity_check(fld, fr)
        worst = min(worst, rep.min_margin / rep.tol)
        boundary &= rep.argmax_on_boundary
        count += 1
        ns.add(fr.n)
    dt = time.perf_counter() - t0
    ok = worst >= -1 and boundary and count >= 100 and dt < 60
    verdict(2, ok, f"{count} solutions, n in {sorted(ns)}, min margin/tol {worst:.3g}, "
                   f"boundary argmax {boundary}, {dt:.1f}s")


def test_criterion_3_qtilde(verdict):
    t0 = time.perf_counter()
    H0 = HamiltonianSystem(PQ, [], support_radius=1.0)
    rng = np.random.default_rng(3)
    fails = []
    for eps in (1.0, 0.5, 0.1, 0.01):
        P = build_profile(H0, eps)
        d = rng.standard_normal((20_000, 2))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        inside = d * rng.uniform(0, P.r, (20_000, 1))
        outside = d * rng.uniform(P.R, 4 * P.R, (20_000, 1))
        if not np.array_equal(P.value(inside), PQ.Q(inside)):
            fails.append(f"eps={eps}: Q~ != Q on V")
        if not np.allclose(P.value(outside), eps * PQ.Q(outside), rtol=1e-14, atol=0):
            fails.append(f"eps={eps}: Q~ != eps Q outside R")
        ax = np.linspace(-P.R, P.R, 1000)
        z = np.stack(np.meshgrid(ax, ax), -1).reshape(-1, 2)
        z = z[np.linalg.norm(z, axis=1) <= P.R]
        if np.max(np.abs(P.value(z))) > P.C2:
            fails.append(f"eps={eps}: sup > C2")
        rep = verify_profile(P, 100_000, seed=3)
        for name in ("b_q_grows", "c_p_decays", "c_proof_bound"):
            if not rep.row(name).margin > 0:
                fails.append(f"eps={eps}: {name} margin {rep.row(name).margin:.3g}")
        x = np.linspace(-1.5 * P.c_prime, 1.5 * P.c_prime, 400_001)
        if np.max(np.abs(P.eta(x) - eps * x)) > 4 * P.c + 1e-8:
            fails.append(f"eps={eps}: eq 4c")
    dt = time.perf_counter() - t0
    verdict(3, not fails and dt < 120, f"{'; '.join(fails) or 'all checks hold'}, {dt:.1f}s")


def test_criterion_4_shift_bound(verdict):
    t0 = time.perf_counter()
    HF = HamiltonianSystem(PQ, [Bump((0.0, 0.0), 1.0, 0.5, TimeProfile(1.0, (0.3,)))])
    parts, ok = [], True
    for k, l in ((2, 1), (3, 2), (5, 2)):
        cap = max_epsilon_for(PQ, k, l)
        for eps in (cap, 0.5 * cap):
            P = build_profile(HF, eps)
            r = shift_bound_check(P, HF, k, l, grid_density=17, n_t=4)
            ok &= r.ok
            parts.append(f"({k},{l}) eps={eps:.3f}: {max(r.raw, r.periodized):.0f}"
                         f"/{r.bound:.0f}")
    dt = time.perf_counter() - t0
    verdict(4, ok and dt < 300, f"{'; '.join(parts)}, {dt:.1f}s")


def _elliptic_path():
    rng = np.random.default_rng(8)
    b = rng.standard_normal((4, 4))
    s1 = 0.3 * (b + b.T)
    s0 = np.diag([3.0, 5.0, 3.0, 5.0])
    j0 = field_matrix(2)
    sol = solve_ivp(lambda t, y: (j0 @ (s0 + np.sin(2 * np.pi * t) * s1)
                                  @ y.reshape(4, 4)).ravel(),
                    (0, 1), np.eye(4).ravel(), rtol=1e-12, atol=1e-12, method="DOP853",
                    dense_output=True)
    sampler = lambda t: sol.sol(t).reshape(4, 4)
    ts = np.linspace(0, 1, 401)
    return SymplecticPath(ts, np.array([sampler(t) for t in ts]), sampler)


def _mixed_path():
    # elliptic plane plus hyperbolic plane
    x1, x2 = rotation_generator(1, [0.37]), hyperbolic_generator(1, [0.4])
    sampler = lambda t: block_sum(expm(t * x1), expm(t * x2))
    ts = np.linspace(0, 1, 129)
    return SymplecticPath(ts, np.array([sampler(t) for t in ts]), sampler)


def test_criterion_5_indices(verdict):
    fails = []
    for n in (1, 2, 3):
        if cz_index(SymplecticPath.from_generator(0.1 * omega_matrix(n))) != n:
            fails.append(f"max anchor n={n}")
        h = SymplecticPath.from_generator(hyperbolic_generator(n, np.linspace(0.5, 1.5, n)))
        if cz_index(h) != 0:
            fails.append(f"hyperbolic anchor n={n}")
    worst = 0.0
    paths = [_elliptic_path(),
             SymplecticPath.from_generator(rotation_generator(2, [0.13, -0.31]), 1.0, 129),
             _mixed_path()]
    for p in paths:
        d = mean_index(p)
        for k in range(2, 21):
            worst = max(worst, abs(mean_index(p.iterate(k)) - k * d))
    if worst >= 1e-6:
        fails.append(f"homogeneity {worst:.2e}")
    orbs = (find_fixed_points(EXAMPLE, seed_density=13, topological=False)
            + find_periodic(EXAMPLE, 3, seed_density=13, topological=False)
            + find_periodic(EXAMPLE, 5, seed_density=13, topological=False)
            + find_fixed_points(WEAK, seed_density=11, topological=False))
    nondeg = [o for o in orbs if o.index.nondegenerate]
    bad = [o for o in nondeg if not abs(o.index.mean - o.index.cz) < o.index.n]
    if bad:
        fails.append(f"{len(bad)} orbits violate the gap")
    verdict(5, not fails, f"{'; '.join(fails) or 'anchors exact'}; homogeneity err "
                          f"{worst:.1e}; gap on {len(nondeg)} nondegenerate orbits")


def test_criterion_6_slow_homotopy(verdict):
    fails = []
    rels = []
    for blocks in [((1.0, 1),), ((2.0, 1), (3.0, 1)), ((1.0, 2),), ((0.7, 1), (1.3, 2))]:
        f = rescale_to_small(build_normal_form(BlockSpec(blocks)))
        ref = 3 * f.lambda_ ** 2 / 20 * sampled_inverse_form_norm(f, samples=40_000)
        rels.append(abs(slow_bound(f) - ref) / ref)
    if max(rels) >= 1e-3:
        fails.append(f"slow bound rel err {max(rels):.2e}")
    rng = np.random.default_rng(6)
    frames = [PQ, rescale_to_small(build_normal_form(BlockSpec(((1.0, 2), (0.5, 1)))))]
    worst = math.inf
    for i in range(40):
        k0, k1 = rng.uniform(0.1, 10, 2)
        p = HomotopyProfile.ramp(k0, k1, 0.0, rng.uniform(0.01, 3), n=501,
                                 shape=("linear", "smooth")[i % 2])
        fr = frames[i % 2]
        q, _ = reparametrize_to_slow(p, fr)
        if not is_slow(q, fr):
            fails.append("reparametrized profile not slow")
        aud = slow_inequality_audit(fr, q, n_random=10_000, seed=i)
        worst = min(worst, aud.min_margin)
    if worst < -1e-12:
        fails.append(f"closing inequality margin {worst:.3g}")
    verdict(6, not fails, f"{'; '.join(fails) or 'ok'}; max rel err {max(rels):.1e}, "
                          f"min pointwise margin {worst:.3g} over 40 profiles x 1e4 samples")


def test_criterion_7_dynamics(verdict):
    fails = []
    x = find_fixed_points(EXAMPLE, np.zeros((1, 2)), include_origin=False, topological=False)[0]
    act_err = 0.0
    for k in (2, 3, 5):
        o = find_periodic(EXAMPLE, k, x.z0[None], include_origin=False, topological=False)[0]
        act_err = max(act_err, abs(o.action - k * x.action))
    if act_err >= 1e-6:
        fails.append(f"action homogeneity {act_err:.2e}")
    Ha = HamiltonianSystem(PQ, [Bump((0.0, 0.0), 1.5, 0.9)])
    base = hofer_norm(Ha, 1.0, 21, autonomous=True).value
    hof_err = 0.0
    for k in (2, 3):
        hk = hofer_norm(iterate(Ha, k, 0.01, order=4), 1.0, 21, autonomous=True,
                        refine=False).value
        hof_err = max(hof_err, abs(hk - k * base))
    if hof_err >= 1e-6:
        fails.append(f"Hofer homogeneity {hof_err:.2e}")
    orbs = find_periodic(EXAMPLE, 3, seed_density=13, topological=False)
    sym = max(o.symplectic_error for o in orbs)
    if sym >= 1e-8:
        fails.append(f"symplectic defect {sym:.2e}")
    f = rescale_to_small(build_normal_form(BlockSpec(((1.0, 2),))))
    z0 = np.random.default_rng(7).uniform(-0.2, 0.2, (6, 4))
    e_quad = np.abs(f.Q(flow(HamiltonianSystem(f), 0, 10, z0, 0.01)) - f.Q(z0)).max()
    Hb = HamiltonianSystem(PQ, [Bump((0.0, 0.0), 4.0, 3.0)])
    zb = np.array([[0.3, 0.1]])
    e_bump = abs((Hb.value(0, flow(Hb, 0, 1, zb, 0.005, order=4)) - Hb.value(0, zb)).item())
    if max(e_quad, e_bump) >= 1e-10:
        fails.append(f"energy drift {max(e_quad, e_bump):.2e}")
    verdict(7, not fails, f"{'; '.join(fails) or 'ok'}; action {act_err:.1e}, "
                          f"Hofer {hof_err:.1e}, symplectic {sym:.1e}, "
                          f"energy {max(e_quad, e_bump):.1e}")


def test_criterion_8_demonstration(verdict):
    t0 = time.perf_counter()
    fixed = find_fixed_points(EXAMPLE, seed_density=15)
    elliptic = [o for o in fixed if o.index.nondegenerate and abs(o.index.mean) > 0]
    hits, detail = [], []
    for p in PRIMES_31:
        orbs = find_periodic(EXAMPLE, p, seed_density=15, topological=False)
        good = [o for o in orbs if o.simple and o.minimal_period == p
                and check_orbit(o, EXAMPLE.support_radius).ok]
        if good:
            hits.append(p)
        detail.append(f"{p}:{len(good)}")
    dt = time.perf_counter() - t0
    ok = bool(elliptic) and len(hits) >= 3 and dt < 600
    verdict(8, ok, f"fixed point with mean index {elliptic[0].index.mean:.4f}; simple orbits "
                   f"at primes {hits} (per prime {' '.join(detail)}), {dt:.0f}s"
            if elliptic else "no elliptic fixed point")


def test_criterion_9_windows(verdict):
    rng = np.random.default_rng(9)
    fails, plans = [], 0
    for _ in range(20):
        a = float(10 ** rng.uniform(-2, 1))
        c3 = float(10 ** rng.uniform(-1, 3))
        m = int(rng.integers(1, 6))
        plan = plan_window(a, c3, m, int(rng.integers(3, 1000)))
        pi, pm, d, al = plan.p_i, plan.p_im, plan.delta, plan.alpha
        chain1 = [-pi * a, -al, -al + 2 * d, 0, al, al + 2 * d, pi * a]
        chain2 = [-pm * a, -al + d, 0, al + d, pm * a]
        inc = lambda v: all(x < y for x, y in zip(v, v[1:]))
        if not (pi * a > 6 * d and inc(chain1) and inc(chain2)
                and pi * a - 4 * d < al < pi * a - 2 * d):
            fails.append(f"plan a={a:.3g} C3={c3:.3g} m={m}")
        plans += 1
    pairs = 0
    for _ in range(50):
        delta = float(rng.uniform(0.01, 3))
        n = int(rng.integers(1, 4))
        m = minimal_separation(delta, n)
        ps, _ = admissible_primes(int(rng.integers(3, 10_000)), m + 5)
        rep = disjointness_report(delta, ps, n, m)
        pairs += len(rep["pairs"])
        if not (m > n / delta and rep["all_disjoint"]):
            fails.append(f"windows delta={delta:.3g} n={n}")
    verdict(9, not fails, f"{'; '.join(fails) or 'ok'}; {plans} plans verified by "
                          f"substitution, {pairs} window pairs disjoint")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
