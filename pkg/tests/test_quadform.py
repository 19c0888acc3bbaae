import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypquad.linalg import omega_matrix, op_norm, sym
from hypquad.quadform import (
    BlockSpec, BlockSpecError, ComplexSpectrumError, adapted_structure, block_spec_condition,
    build_normal_form, check_smallness, exact_linear_flow, random_block_spec,
    rescale_to_small, sampled_inverse_form_norm, slow_bound, vector_field_matrix,
)


def frame_of(*blocks):
    return build_normal_form(BlockSpec(tuple(blocks)))


def test_single_block():
    f = frame_of((1.0, 1))
    assert f.A.tolist() == [[1.0]]
    assert f.D.tolist() == [[1.0]] and f.E.tolist() == [[0.0]]
    assert f.lambda_ == 1 and f.lambda_max == 1


def test_jordan_block():
    f = frame_of((2.0, 2))
    np.testing.assert_array_equal(f.A, [[2, 0], [-1, 2]])
    assert f.lambda_ == 2


def test_direct_sum():
    f = frame_of((2.0, 1), (3.0, 1))
    np.testing.assert_array_equal(f.D, np.diag([2.0, 3.0]))
    assert not f.E.any()
    assert f.lambda_ == 2 and f.lambda_max == 3


def test_invalid_specs():
    with pytest.raises(BlockSpecError, match="dimension zero"):
        BlockSpec(())
    with pytest.raises(BlockSpecError):
        BlockSpec(((-1.0, 1),))
    with pytest.raises(BlockSpecError):
        BlockSpec(((1.0, 0),))
    with pytest.raises(ComplexSpectrumError):
        BlockSpec.from_records([{"sigma": 1.0, "imag": 0.2, "m": 1}])


def test_records_roundtrip():
    spec = BlockSpec(((1.5, 2), (0.5, 1)))
    assert BlockSpec.from_records(spec.to_records()) == spec


def test_vector_field_pq():
    f = frame_of((1.0, 1))
    x = vector_field_matrix(f)
    np.testing.assert_allclose(x @ [1.0, 1.0], [-1.0, 1.0])


def test_vector_field_spectrum_and_trace():
    f = frame_of((2.0, 2))
    ev = np.sort(np.linalg.eigvals(vector_field_matrix(f)).real)
    np.testing.assert_allclose(ev, [-2, -2, 2, 2], atol=1e-6)
    assert abs(np.trace(vector_field_matrix(f))) < 1e-14


def test_exact_flow_saddle():
    f = frame_of((1.0, 1))
    for t in (0.3, 1.0, 2.5):
        m = exact_linear_flow(f, t)
        np.testing.assert_allclose(m @ [1.0, 1.0], [np.exp(-t), np.exp(t)], rtol=1e-13)
        assert op_norm(m) == pytest.approx(np.exp(t), rel=1e-12)


def test_smallness_unscaled_jordan_fails_iii():
    rep = check_smallness(frame_of((1.0, 2)))
    assert rep.norm_skew == pytest.approx(1.0)
    assert not rep.cond_iii


def test_smallness_zero_E():
    rep = check_smallness(frame_of((1.0, 1), (2.0, 1)))
    assert rep.ok
    assert rep.norm_E2 == rep.norm_DE == rep.norm_ED == rep.norm_skew == 0


def test_rescale_identity_when_E_zero():
    f = frame_of((1.0, 1), (2.0, 1))
    g = rescale_to_small(f)
    np.testing.assert_array_equal(g.scale, np.ones(2))


def test_rescale_jordan():
    f = rescale_to_small(frame_of((1.0, 2)))
    e = f.E
    # independent recomputation from A
    assert op_norm(sym(e @ e)) <= 0.1
    assert op_norm(e - e.T) <= 1 / 8
    np.testing.assert_array_equal(np.diag(f.A), [1.0, 1.0])


def test_rescale_preserves_Q_under_transport():
    rng = np.random.default_rng(3)
    f = frame_of((1.0, 3), (0.7, 2))
    g = rescale_to_small(f)
    z = rng.standard_normal((50, 2 * f.n))
    np.testing.assert_allclose(g.Q(f.transport(z, g)), f.Q(z), rtol=1e-12, atol=1e-12)


def test_slow_bound_matches_sampled_infimum():
    for blocks in [((1.0, 1),), ((2.0, 1), (3.0, 1)), ((1.0, 2),)]:
        f = rescale_to_small(frame_of(*blocks))
        inf = sampled_inverse_form_norm(f, samples=40_000)
        expected = 3 * f.lambda_ ** 2 / 20 * inf
        assert slow_bound(f) == pytest.approx(expected, rel=1e-6)


def test_slow_bound_values():
    # 3 lambda^2 / (20 sup|Q|/||x||^2); sup |pq| on the unit circle is 1/2
    assert slow_bound(frame_of((1.0, 1))) == pytest.approx(0.3)
    assert slow_bound(frame_of((2.0, 1), (3.0, 1))) == pytest.approx(3 * 4 / (20 * 1.5))


def test_adapted_structure():
    f = rescale_to_small(frame_of((1.0, 2), (2.0, 1)))
    a = adapted_structure(f)
    np.testing.assert_allclose(a.JQ @ a.JQ, -np.eye(6), atol=1e-15)
    np.testing.assert_allclose(a.G, np.eye(6))
    np.testing.assert_allclose(omega_matrix(3) @ a.JQ, a.G)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_specs_properties(seed):
    rng = np.random.default_rng(seed)
    spec = random_block_spec(rng)
    f = build_normal_form(spec)
    ev = np.linalg.eigvals(vector_field_matrix(f))
    expected = np.sort(np.concatenate([[s] * m for s, m in spec.blocks]
                                      + [[-s] * m for s, m in spec.blocks]))
    # Jordan blocks perturb eigenvalues at order eps^(1/m)
    np.testing.assert_allclose(np.sort(ev.real), expected, atol=1e-3)
    assert block_spec_condition(f) > 0
    g = rescale_to_small(f)
    assert check_smallness(g).ok
    assert check_smallness(rescale_to_small(g)).ok
    assert slow_bound(g) > 0
    z = rng.standard_normal((10, 2 * f.n))
    np.testing.assert_allclose(g.Q(f.transport(z, g)), f.Q(z), rtol=1e-12, atol=1e-10)
