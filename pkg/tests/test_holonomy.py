import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewhol.connection import curvature_at, gamma_total, zero_torsion
from skewhol.experiment import scenario
from skewhol.geometry import sample_points
from skewhol.holonomy import (
    VARIANTS,
    loop_holonomy,
    mixed_curvature_max,
    off_generators,
    off_span_dimension,
    r_off,
    split_projectors,
)
from skewhol.tensor import span_dimension

P0 = np.array([1.0, 0.4, 2.0, 3.0])


def torsion_of(name):
    cfg = scenario(name)
    return cfg.manifold, cfg.torsion()


def test_r_off_keeps_only_exchanging_blocks(s2xt2, rng):
    split = split_projectors(s2xt2)
    R = rng.normal(size=(4,) * 4)
    off = r_off(R, split)
    assert np.all(off[:2, :2] == 0.0) and np.all(off[2:, 2:] == 0.0)
    assert np.array_equal(off[:2, 2:], R[:2, 2:])
    assert np.array_equal(off[2:, :2], R[2:, :2])


def test_r_off_is_idempotent(s2xt2, rng):
    split = split_projectors(s2xt2)
    off = r_off(rng.normal(size=(4,) * 4), split)
    assert np.array_equal(r_off(off, split), off)


def test_r_off_shape_check(s2xt2):
    with pytest.raises(ValueError):
        r_off(np.zeros((3,) * 4), split_projectors(s2xt2))


def test_unknown_variant(s2xt2):
    with pytest.raises(ValueError):
        off_generators(np.zeros((4,) * 4), split_projectors(s2xt2), "spinor")


def test_block_diagonal_curvature_has_no_off_span(s2xt2):
    R = np.zeros((4,) * 4)
    R[0, 1, 0, 1], R[1, 0, 0, 1] = 1.0, -1.0
    R[:, :, 1, 0] = -R[:, :, 0, 1]
    for v in VARIANTS:
        assert off_span_dimension(s2xt2, None, P0, curvature=R, variant=v).dimension == 0


def commutator_curvature(M, T, p):
    """``R(e_i, e_j) = [Gamma_i, Gamma_j]`` for constant coefficients."""
    G = gamma_total(M, T, p)
    mats = [G[:, i, :] for i in range(M.n)]
    R = np.zeros((M.n,) * 4)
    for i in range(M.n):
        for j in range(M.n):
            R[:, :, i, j] = mats[i] @ mats[j] - mats[j] @ mats[i]
    return R


def test_t3_span_dimensions_from_commutator_oracle(rng):
    M, T = torsion_of("t3")
    P1 = split_projectors(M).P1
    P2 = np.eye(3) - P1
    for p in sample_points(M, 20, rng):
        R = commutator_curvature(M, T, p)
        offs = [P1 @ R[:, :, i, j] @ P2 + P2 @ R[:, :, i, j] @ P1 for i, j in [(0, 1), (0, 2), (1, 2)]]
        vecs = [o[:, k] for o in offs for k in range(3)]
        assert span_dimension(offs)[0] == 2
        assert span_dimension(vecs)[0] == 3
        assert off_span_dimension(M, T, p, variant="endomorphism").dimension == 2
        assert off_span_dimension(M, T, p, variant="vector").dimension == 3


def test_s2xt2_span_dimensions(rng):
    M, T = torsion_of("s2xt2")
    for p in sample_points(M, 10, rng):
        assert off_span_dimension(M, T, p, variant="endomorphism").dimension == 2
        assert off_span_dimension(M, T, p, variant="vector").dimension == 3


def test_levi_civita_span_is_zero(rng):
    M, T = torsion_of("lc-baseline")
    for p in sample_points(M, 10, rng):
        for v in VARIANTS:
            rep = off_span_dimension(M, T, p, variant=v)
            assert rep.dimension == 0
            assert max(rep.singular_values) == 0.0


def test_endomorphism_span_bounded_by_block_size(rng):
    for name in ("t3", "s2xt2", "s2xt2-perturbed"):
        M, T = torsion_of(name)
        for p in sample_points(M, 5, rng):
            rep = off_span_dimension(M, T, p)
            assert rep.dimension <= M.n1 * M.n2
            assert rep.generators_sampled == M.n * (M.n - 1) // 2


def test_off_generators_vanish_on_diagonal_blocks(rng):
    M, T = torsion_of("s2xt2-perturbed")
    split = split_projectors(M)
    R = curvature_at(M, T, P0)
    for G in off_generators(R, split):
        assert np.all(split.P1 @ G @ split.P1 == 0.0)
        assert np.all(split.P2 @ G @ split.P2 == 0.0)


@pytest.mark.parametrize("lam", [0.1, 10.0])
def test_span_invariant_under_torsion_scaling(lam, rng):
    M, T = torsion_of("t3")
    for p in sample_points(M, 5, rng):
        assert off_span_dimension(M, T.scaled(lam), p).dimension == off_span_dimension(M, T, p).dimension


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_span_invariant_under_block_frame_rotation(seed):
    rng = np.random.default_rng(seed)
    M, T = torsion_of("s2xt2-perturbed")
    R = curvature_at(M, T, P0).R
    Q = np.zeros((4, 4))
    Q[:2, :2] = random_rotation(rng, 2)
    Q[2:, 2:] = random_rotation(rng, 2)
    # an orthogonal block-preserving frame change acts on every slot of R alike
    rotated = np.einsum("la,kb,ic,jd,abcd->lkij", Q, Q, Q, Q, R)
    for v in VARIANTS:
        assert (
            off_span_dimension(M, T, P0, curvature=rotated, variant=v).dimension
            == off_span_dimension(M, T, P0, curvature=R, variant=v).dimension
        )


def test_positive_dimension_implies_mixed_curvature(rng):
    for name in ("t3", "s2xt2", "s2xt2-perturbed", "lc-baseline"):
        M, T = torsion_of(name)
        for p in sample_points(M, 3, rng):
            R = curvature_at(M, T, p)
            if off_span_dimension(M, T, p, curvature=R).dimension > 0:
                assert mixed_curvature_max(M, R) > 0.0


def test_loop_without_torsion_on_torus_is_identity(t3):
    H = loop_holonomy(t3, zero_torsion(t3), np.zeros(3), 0, 2, 0.1)
    assert np.array_equal(H, np.eye(3))


def test_loop_needs_two_directions(t3):
    with pytest.raises(ValueError):
        loop_holonomy(t3, zero_torsion(t3), np.zeros(3), 1, 1, 0.1)


@pytest.mark.parametrize("ij", [(0, 1), (0, 2), (1, 2)])
def test_loop_holonomy_approximates_curvature(ij):
    M, T = torsion_of("t3")
    p = np.array([0.5, 1.0, 2.0])
    R = curvature_at(M, T, p).endomorphism(*ij)
    svals = [0.1, 0.05, 0.025]
    errs = [np.linalg.norm((np.eye(3) - loop_holonomy(M, T, p, *ij, s)) / s**2 - R) for s in svals]
    slope = np.polyfit(np.log(svals), np.log(errs), 1)[0]
    assert slope >= 1.0


def test_loop_holonomy_is_orthogonal():
    for name in ("t3", "s2xt2-perturbed"):
        M, T = torsion_of(name)
        p = P0[: M.n]
        H = loop_holonomy(M, T, p, 0, M.n - 1, 0.05)
        g = M.metric(p)
        assert np.max(np.abs(H.T @ g @ H - g)) < 1e-8


def test_loop_on_sphere_product_tracks_curvature():
    M, T = torsion_of("s2xt2-perturbed")
    R = curvature_at(M, T, P0).endomorphism(0, 2)
    errs = [
        np.linalg.norm((np.eye(4) - loop_holonomy(M, T, P0, 0, 2, s)) / s**2 - R)
        for s in (0.1, 0.05)
    ]
    assert errs[1] < 0.6 * errs[0]
