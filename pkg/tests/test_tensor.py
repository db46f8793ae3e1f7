from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from skewhol.tensor import (
    antisymmetrize,
    contract,
    is_antisymmetric,
    levi_civita,
    numerical_rank,
    permutation_sign,
    raise_index,
    span_dimension,
    wedge,
)


def brute_force_eval(forms, vectors):
    """Evaluate a wedge of 1-forms as det[form_a(vector_b)]."""
    return np.linalg.det(np.array([[f @ v for v in vectors] for f in forms]))


def random_form(rng, n, k):
    return antisymmetrize(rng.normal(size=(n,) * k), k) if k else np.asarray(rng.normal())


def test_wedge_two_covectors():
    dx, dy = np.eye(2)
    assert wedge(dx, dy)[0, 1] == 1.0


def test_wedge_self_is_zero():
    dx = np.array([1.0, 0.0, 0.0])
    assert np.all(wedge(dx, dx) == 0.0)


def test_triple_wedge_matches_permutation_sum():
    e = np.eye(3)
    omega = wedge(wedge(e[0], e[1]), e[2])
    # brute-force sum over the 3! orderings of dx(v1) dy(v2) dz(v3)
    total = 0.0
    for perm in permutations(range(3)):
        total += permutation_sign(perm) * np.prod([e[a][perm[a]] for a in range(3)])
    assert omega[0, 1, 2] == pytest.approx(total) == pytest.approx(1.0)


def test_wedge_of_covectors_is_determinant(rng):
    fs = rng.normal(size=(3, 4))
    vs = rng.normal(size=(3, 4))
    omega = wedge(wedge(fs[0], fs[1]), fs[2])
    value = np.einsum("ijk,i,j,k->", omega, *vs)
    assert value == pytest.approx(brute_force_eval(fs, vs), rel=1e-12)


def test_wedge_dimension_mismatch():
    with pytest.raises(ValueError):
        wedge(np.ones(2), np.ones(3))


def test_wedge_above_top_degree_vanishes():
    a = wedge(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.all(wedge(a, np.array([1.0, 1.0])) == 0.0)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_wedge_graded_commutative(k, l, seed):
    rng = np.random.default_rng(seed)
    n = 5
    a, b = random_form(rng, n, k), random_form(rng, n, l)
    assert np.allclose(wedge(a, b), (-1) ** (k * l) * wedge(b, a), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_wedge_bilinear(seed, s, t):
    rng = np.random.default_rng(seed)
    a1, a2 = random_form(rng, 4, 2), random_form(rng, 4, 2)
    b = random_form(rng, 4, 1)
    lhs = wedge(s * a1 + t * a2, b)
    rhs = s * wedge(a1, b) + t * wedge(a2, b)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_wedge_is_antisymmetric(rng):
    a, b = random_form(rng, 4, 2), random_form(rng, 4, 1)
    assert is_antisymmetric(wedge(a, b))


def test_contract_identity_trace():
    assert contract(np.eye(3), 0, 1) == 3.0


def test_contract_flat_metric_raises_trivially(rng):
    T = random_form(rng, 3, 3)
    assert np.array_equal(raise_index(T, 2, np.eye(3)), T)


def test_epsilon_full_contraction_is_six():
    eps = levi_civita(3)
    brute = sum(eps[i, j, k] * eps[i, j, k] for i, j, k in product(range(3), repeat=3))
    assert brute == 6
    outer = np.multiply.outer(eps, eps)  # axes i j k a b c
    t = contract(outer, 0, 3, np.eye(3))  # -> j k b c
    t = contract(t, 0, 2, np.eye(3))  # -> k c
    assert contract(t, 0, 1, np.eye(3)) == pytest.approx(6.0)


def test_contract_with_metric_inverse(rng):
    A = rng.normal(size=(3, 3))
    h = np.linalg.inv(A @ A.T + np.eye(3))
    t = rng.normal(size=(3, 3))
    assert contract(t, 0, 1, h) == pytest.approx(np.sum(t * h))


def test_contract_shape_errors():
    with pytest.raises(ValueError):
        contract(np.zeros((2, 3)), 0, 1)
    with pytest.raises(ValueError):
        contract(np.zeros((3, 3)), 0, 1, np.eye(2))


@pytest.mark.parametrize(
    "m, expected",
    [([[1, 0], [0, 1]], 2), ([[1, 2], [2, 4]], 1), ([[0, 0], [0, 0]], 0)],
)
def test_numerical_rank_examples(m, expected):
    assert numerical_rank(np.array(m, dtype=float), 1e-10)[0] == expected


def test_numerical_rank_row_vector():
    rank, sv = numerical_rank(np.array([[3.0, 4.0]]), 1e-10)
    # the only singular value of [[3, 4]] is its Euclidean norm
    assert rank == 1
    assert sv == pytest.approx([5.0])


def test_numerical_rank_rejects_non_matrix():
    with pytest.raises(ValueError):
        numerical_rank(np.zeros(3))
    with pytest.raises(ValueError):
        numerical_rank(np.zeros((2, 2)), tol=0.0)


def test_numerical_rank_empty_block():
    assert numerical_rank(np.zeros((2, 0)))[0] == 0


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31 - 1),
    st.integers(min_value=1, max_value=4),
    st.sampled_from([1e-11, 1e-10, 1e-9]),
)
def test_rank_invariant_under_rotations(seed, r, tol):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(5, r)) @ rng.normal(size=(r, 4))
    rotated = random_rotation(rng, 5) @ m @ random_rotation(rng, 4)
    assert numerical_rank(m, tol)[0] == numerical_rank(rotated, tol)[0] == r


def test_span_dimension_examples():
    e = np.eye(3)
    assert span_dimension([e[0], e[1], e[0] + e[1]])[0] == 2
    assert span_dimension([np.zeros((3, 3))])[0] == 0


def rotation_generators():
    L = np.zeros((3, 3, 3))
    for a in range(3):
        L[a] = -levi_civita(3)[a]
    return L


def test_span_of_rotation_generators():
    L = rotation_generators()
    rows = L.reshape(3, 9)
    assert np.linalg.det(rows @ rows.T) != 0.0
    assert span_dimension(list(L))[0] == 3


def test_span_dimension_errors():
    with pytest.raises(ValueError):
        span_dimension([])
    with pytest.raises(ValueError):
        span_dimension([np.zeros(2), np.zeros(3)])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (4, 3), elements=st.floats(-5, 5)))
def test_span_dimension_bounded(rows):
    dim, _ = span_dimension(list(rows))
    assert dim <= min(len(rows), rows.shape[1])
