import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from hypquad.indices import (
    DegeneratePathError, IndexMethodUnavailable, IndexReport, PathSamplingError, SymplecticPath,
    block_sum, check_gap, cz_index, hyperbolic_generator, hyperbolic_index_2d, index_report,
    mean_index,
    mean_index_polar, rho, rotation_generator, zero_mean_implies_zero_cz_4d,
)
from hypquad.linalg import field_matrix, omega_matrix


def rot(a, samples=129):
    return SymplecticPath.from_generator(rotation_generator(1, [a]), 1.0, samples)


def test_hyperbolic_path():
    p = SymplecticPath.from_generator(hyperbolic_generator(1, [1.0]))
    assert mean_index(p) == 0
    assert cz_index(p) == 0


@pytest.mark.parametrize("a", [0.01, 0.1, 0.3, 0.45])
def test_small_rotation(a):
    p = rot(a)
    assert mean_index(p) == pytest.approx(2 * a, abs=1e-12)
    assert cz_index(p) == 1


def test_large_rotation():
    p = rot(1.3)
    assert mean_index(p) == pytest.approx(2.6, abs=1e-12)
    assert cz_index(p) == 3
    assert cz_index(rot(-0.2)) == -1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_normalization_anchors(n):
    # H = -eps |z|^2 / 2: a small-Hessian maximum
    p = SymplecticPath.from_generator(0.1 * omega_matrix(n))
    assert cz_index(p) == n
    h = SymplecticPath.from_generator(hyperbolic_generator(n, np.linspace(0.5, 1.5, n)))
    assert cz_index(h) == 0 and mean_index(h) == 0


def test_degenerate_endpoint():
    p = SymplecticPath.from_generator(np.zeros((2, 2)))
    with pytest.raises(DegeneratePathError):
        cz_index(p)
    assert index_report(p).cz == "degenerate"
    with pytest.raises(DegeneratePathError):
        check_gap(index_report(p))


def test_identity_start_and_symplectic_checked():
    with pytest.raises(ValueError):
        SymplecticPath([0.0, 1.0], np.array([2 * np.eye(2), np.eye(2)]))
    with pytest.raises(ValueError):
        SymplecticPath([0.0, 1.0], np.array([np.eye(2), np.diag([2.0, 2.0])]))


def test_coarse_path_without_sampler_rejected():
    ts = np.array([0.0, 1.0])
    mats = np.array([np.eye(2), expm(rotation_generator(1, [0.4]))])
    with pytest.raises(PathSamplingError, match="refine"):
        mean_index(SymplecticPath(ts, mats))
    # a sampler refines automatically
    p = SymplecticPath(ts, mats, sampler=lambda t: expm(t * rotation_generator(1, [0.4])))
    assert mean_index(p) == pytest.approx(0.8)


def test_gap_check():
    assert check_gap(IndexReport(0, 0.0, True, True, 1), 1)
    assert check_gap(IndexReport(1, 0.2, True, True, 1), 1)
    assert not check_gap(IndexReport(1, 0.0, True, True, 1), 1)
    assert not check_gap(IndexReport(1, 2.0, True, True, 1), 1)


def test_4d_dichotomy():
    e1 = expm(rotation_generator(1, [0.1]))
    e2 = expm(rotation_generator(1, [-0.1]))
    h1 = expm(hyperbolic_generator(1, [0.3]))
    h2 = expm(hyperbolic_generator(1, [0.5]))
    assert zero_mean_implies_zero_cz_4d(block_sum(h1, h2))
    assert zero_mean_implies_zero_cz_4d(block_sum(e1, e2))
    assert not zero_mean_implies_zero_cz_4d(block_sum(e1, h1))
    rep = index_report(SymplecticPath.from_monodromy(block_sum(e1, h1)))
    assert rep.cz == 1 and rep.mean == pytest.approx(0.2)
    with pytest.raises(DegeneratePathError):
        zero_mean_implies_zero_cz_4d(np.eye(4))


def test_4d_negative_hyperbolic_pair_has_zero_cz():
    # rotate one plane by +pi and the other by -pi, then stretch: Delta = 0
    x1 = rotation_generator(1, [0.5])
    x2 = rotation_generator(1, [-0.5])
    h = hyperbolic_generator(2, [0.4, 0.7])
    ts = np.linspace(0, 2, 257)

    def at(t):
        r = block_sum(expm(min(t, 1) * x1), expm(min(t, 1) * x2))
        return expm(max(t - 1, 0) * h) @ r
    p = SymplecticPath(ts, np.array([at(t) for t in ts]), at)
    assert zero_mean_implies_zero_cz_4d(p)


def test_rho_is_det_on_unitary():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    u, _ = np.linalg.qr(a)
    x, y = u.real, u.imag
    m = np.block([[x, y], [-y, x]])
    assert abs(rho(m) - np.linalg.det(u)) < 1e-10


def _random_path(seed, n=2, samples=401):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2 * n, 2 * n))
    s0 = a @ a.T + 2 * np.eye(2 * n)
    b = rng.standard_normal((2 * n, 2 * n))
    s1 = b + b.T
    j0 = field_matrix(n)

    def f(t, y):
        return (j0 @ (s0 + np.cos(2 * np.pi * t) * s1) @ y.reshape(2 * n, 2 * n)).ravel()
    sol = solve_ivp(f, (0, 1), np.eye(2 * n).ravel(), rtol=1e-12, atol=1e-12,
                    method="DOP853", dense_output=True)
    ts = np.linspace(0, 1, samples)
    sampler = lambda t: sol.sol(t).reshape(2 * n, 2 * n)
    return SymplecticPath(ts, np.array([sampler(t) for t in ts]), sampler)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 500))
def test_homogeneity_random_paths(seed):
    p = _random_path(seed)
    d = mean_index(p)
    radius = max(abs(np.linalg.eigvals(p.monodromy)))
    checked = 0
    for k in (2, 5, 20):
        # eigenvalue collisions on the circle blur once |M^k| nears 1e5 (non-normal 4D)
        if k > 2 and radius ** k > 1e6:
            continue
        assert abs(mean_index(p.iterate(k)) - k * d) < 1e-6
        checked += 1
    assert checked >= 1
    rep = index_report(p)
    if rep.nondegenerate:
        assert rep.gap_ok


def test_polar_cross_check():
    p = _random_path(11)
    assert mean_index_polar(p, (8, 16)) == pytest.approx(mean_index(p), abs=0.02)
    r = rot(0.23)
    assert mean_index_polar(r) == pytest.approx(0.46, abs=1e-9)


def test_continuity_under_perturbation():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    s = a @ a.T + np.eye(4)
    d = rng.standard_normal((4, 4))
    d = 1e-4 * (d + d.T) / np.linalg.norm(d + d.T, 2)
    j0 = field_matrix(2)
    m1 = mean_index(SymplecticPath.from_generator(j0 @ s, 1.0, 257))
    m2 = mean_index(SymplecticPath.from_generator(j0 @ (s + d), 1.0, 257))
    assert abs(m1 - m2) < 1e-3


def test_autonomous_closed_form():
    # elliptic generator: Delta = sum of rotation angles / pi
    x = rotation_generator(2, [0.13, -0.31])
    assert mean_index(SymplecticPath.from_generator(x)) == pytest.approx(2 * (0.13 - 0.31))


def test_homogeneity_k20_elliptic_dominated():
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
    p = SymplecticPath(ts, np.array([sampler(t) for t in ts]), sampler)
    assert max(abs(np.linalg.eigvals(p.monodromy))) ** 20 < 1e8
    d = mean_index(p)
    assert abs(mean_index(p.iterate(20)) - 20 * d) < 1e-6


def _step_jacobians(gen, T, steps):
    return [expm(gen * T / steps)] * steps


@pytest.mark.parametrize("a,b", [(2.0, 0.0), (2.0, 0.3), (25.0, 3 * math.pi),
                                 (40.0, 7 * math.pi)])
def test_hyperbolic_sweep_matches_rho_lift(a, b):
    """Hyperbolic endpoint twisted by a rotation; sweep agrees with the rho lift."""
    h = np.array([[a, 0.0], [0.0, -a]])
    r = np.array([[0.0, -b], [b, 0.0]])
    steps = 400
    jacs = [expm(r / steps) for _ in range(steps)] + _step_jacobians(h, 1.0, steps)
    mats = [np.eye(2)]
    for j in jacs:
        mats.append(j @ mats[-1])
    sweep = hyperbolic_index_2d(jacs)
    if a < 30:
        ref = index_report(SymplecticPath(np.linspace(0, 1, len(mats)), np.array(mats)))
        assert sweep.cz == ref.cz and sweep.mean == pytest.approx(ref.mean)
    assert sweep.mean == float(sweep.cz)


def test_hyperbolic_sweep_survives_huge_monodromy():
    """|M| ~ e^40 is beyond sampled-matrix resolution; the sweep still works."""
    h = np.array([[40.0, 0.0], [0.0, -40.0]])
    jacs = [expm(np.array([[0.0, -math.pi], [math.pi, 0.0]]) / 200)] * 200 \
        + _step_jacobians(h, 1.0, 200)
    assert hyperbolic_index_2d(jacs).cz == -1


def test_hyperbolic_sweep_rejects_elliptic():
    jacs = _step_jacobians(np.array([[0.0, -0.5], [0.5, 0.0]]), 1.0, 100)
    with pytest.raises(IndexMethodUnavailable):
        hyperbolic_index_2d(jacs)
