"""Dense multi-index arrays, exterior algebra and tolerance-aware rank.

Forms are stored as full antisymmetric ``k``-index arrays over an
``n``-dimensional space. The wedge product uses the determinant
normalization, so that ``(dx ^ dy)(e_x, e_y) = 1``::

    (a ^ b)_{i1..i(k+l)} = 1/(k! l!) sum_sigma sgn(sigma) a_{...} b_{...}

The alternative ``1/(k+l)!`` convention would silently rescale every torsion
coefficient, so it is not offered.

Most functions accept leading batch axes; the form degree is then passed
explicitly and the trailing ``degree`` axes carry the form indices.
"""

from functools import lru_cache
from itertools import permutations
from math import factorial

import numpy as np

__all__ = [
    "DEFAULT_RANK_TOL",
    "permutation_sign",
    "levi_civita",
    "antisymmetrize",
    "is_antisymmetric",
    "wedge",
    "wedge_batched",
    "contract",
    "raise_index",
    "numerical_rank",
    "span_dimension",
]

DEFAULT_RANK_TOL = 1e-8


def permutation_sign(perm):
    """Sign of a permutation given as a sequence of ``0..k-1``."""
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def _signed_permutations(k):
    return tuple((p, permutation_sign(p)) for p in permutations(range(k)))


@lru_cache(maxsize=None)
def _levi_civita(n):
    eps = np.zeros((n,) * n)
    for perm, sign in _signed_permutations(n):
        eps[perm] = sign
    eps.setflags(write=False)
    return eps


def levi_civita(n):
    """The totally antisymmetric symbol with ``eps[0, 1, ..., n-1] = 1``."""
    return _levi_civita(n).copy()


def antisymmetrize(t, degree=None):
    """Project the trailing ``degree`` axes onto their alternating part.

    Uses ``Alt(t) = 1/k! sum_sigma sgn(sigma) t o sigma``, which is the
    identity on forms that are already antisymmetric.
    """
    t = np.asarray(t, dtype=float)
    k = t.ndim if degree is None else degree
    if k <= 1:
        return t.copy()
    lead = t.ndim - k
    out = np.zeros_like(t)
    for perm, sign in _signed_permutations(k):
        axes = tuple(range(lead)) + tuple(lead + p for p in perm)
        out += sign * np.transpose(t, axes)
    return out / factorial(k)


def is_antisymmetric(t, degree=None, atol=1e-12):
    t = np.asarray(t, dtype=float)
    k = t.ndim if degree is None else degree
    lead = t.ndim - k
    for a in range(k - 1):
        axes = list(range(t.ndim))
        axes[lead + a], axes[lead + a + 1] = axes[lead + a + 1], axes[lead + a]
        if not np.allclose(t, -np.transpose(t, axes), rtol=0.0, atol=atol):
            return False
    return True


def wedge_batched(a, b, deg_a, deg_b):
    """Wedge product of forms carrying identical leading batch axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if deg_a == 0 or deg_b == 0:
        if deg_a == 0:
            return a.reshape(a.shape + (1,) * deg_b) * b
        return a * b.reshape(b.shape + (1,) * deg_a)
    lead_a = a.shape[: a.ndim - deg_a]
    lead_b = b.shape[: b.ndim - deg_b]
    if lead_a != lead_b:
        raise ValueError(f"batch shapes differ: {lead_a} vs {lead_b}")
    dims = set(a.shape[a.ndim - deg_a:]) | set(b.shape[b.ndim - deg_b:])
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch in wedge: {a.shape} vs {b.shape}")
    n = dims.pop()
    k = deg_a + deg_b
    if k > n:
        return np.zeros(lead_a + (n,) * k)
    outer = a.reshape(a.shape + (1,) * deg_b) * b.reshape(
        lead_b + (1,) * deg_a + b.shape[b.ndim - deg_b:]
    )
    scale = factorial(k) / (factorial(deg_a) * factorial(deg_b))
    return scale * antisymmetrize(outer, k)


def wedge(a, b):
    """Wedge product of two single (unbatched) forms.

    >>> dx, dy = np.eye(2)
    >>> float(wedge(dx, dy)[0, 1])
    1.0
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim and b.ndim and a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch in wedge: {a.shape[0]} vs {b.shape[0]}")
    return wedge_batched(a, b, a.ndim, b.ndim)


def contract(t, axis_a, axis_b, metric_inverse=None):
    """Trace ``t`` over two axes, through ``metric_inverse`` when given.

    With a metric inverse ``h`` this computes ``sum_ab t[..a..b..] h[a, b]``,
    i.e. both lower indices are paired through the inverse metric.
    """
    t = np.asarray(t, dtype=float)
    if axis_a == axis_b:
        raise ValueError("cannot contract an axis with itself")
    if t.shape[axis_a] != t.shape[axis_b]:
        raise ValueError(
            f"contracted axes have lengths {t.shape[axis_a]} and {t.shape[axis_b]}"
        )
    if metric_inverse is None:
        return np.trace(t, axis1=axis_a, axis2=axis_b)
    h = np.asarray(metric_inverse, dtype=float)
    m = t.shape[axis_a]
    if h.shape != (m, m):
        raise ValueError(f"metric inverse of shape {h.shape}, expected {(m, m)}")
    t = raise_index(t, axis_b, h)
    return np.trace(t, axis1=axis_a, axis2=axis_b)


def raise_index(t, axis, metric_inverse):
    """Raise the index on ``axis``: ``t^a = h^{ab} t_b``."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(metric_inverse, dtype=float)
    m = t.shape[axis]
    if h.shape != (m, m):
        raise ValueError(f"metric inverse of shape {h.shape}, expected {(m, m)}")
    moved = np.moveaxis(t, axis, -1) @ h.T
    return np.moveaxis(moved, -1, axis)


def numerical_rank(m, tol=DEFAULT_RANK_TOL):
    """Rank of a matrix with a tolerance relative to its largest singular value.

    Returns ``(rank, singular_values)``. The zero matrix and empty matrices
    have rank 0.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"numerical_rank needs a 2-D array, got ndim={m.ndim}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if m.size == 0:
        return 0, np.zeros(0)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return 0, sv
    return int(np.count_nonzero(sv > tol * sv[0])), sv


def span_dimension(vectors, tol=DEFAULT_RANK_TOL):
    """Dimension of the real span of equally shaped arrays."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if not vectors:
        raise ValueError("span_dimension of an empty family")
    shape = vectors[0].shape
    if any(v.shape != shape for v in vectors):
        raise ValueError("all spanning tensors must share one shape")
    rows = np.stack([v.ravel() for v in vectors])
    return numerical_rank(rows, tol)
