"""Off-diagonal curvature and the off-diagonal holonomy subspace.

With projectors ``P1, P2`` onto the factor directions ``V1, V2``, the
off-diagonal part of an endomorphism ``A`` is ``P1 A P2 + P2 A P1``. Two
spans are measured at a point:

* ``"endomorphism"``: the span of the off-diagonal parts of
  ``R(e_i, e_j)``, ``i < j`` (a subspace of the off-diagonal block of
  ``so(T_pM)``, dimension at most ``n1 * n2``);
* ``"vector"``: the span of the vectors ``R_off(e_i, e_j) e_k``, a subspace
  of ``T_pM``.

Reports never merge the two.
"""

from dataclasses import dataclass, field

import numpy as np

from .connection import curvature_at, gamma_total
from .tensor import DEFAULT_RANK_TOL

__all__ = [
    "SplitProjectors",
    "OffDiagReport",
    "VARIANTS",
    "split_projectors",
    "r_off",
    "off_generators",
    "off_span_dimension",
    "mixed_curvature_max",
    "loop_holonomy",
]

VARIANTS = ("endomorphism", "vector")


@dataclass(frozen=True)
class SplitProjectors:
    P1: np.ndarray
    P2: np.ndarray

    @property
    def n(self):
        return self.P1.shape[0]


def split_projectors(M):
    P1 = np.diag([1.0] * M.n1 + [0.0] * M.n2)
    return SplitProjectors(P1, np.eye(M.n) - P1)


@dataclass
class OffDiagReport:
    point: list
    variant: str
    dimension: int
    singular_values: list
    tolerance: float
    generators_sampled: int
    reference_scale: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "point": list(self.point),
            "variant": self.variant,
            "dimension": self.dimension,
            "singular_values": list(self.singular_values),
            "tolerance": self.tolerance,
            "generators_sampled": self.generators_sampled,
            "reference_scale": self.reference_scale,
        }


def _curvature_array(R):
    return R.R if hasattr(R, "R") else np.asarray(R, dtype=float)


def r_off(R, split):
    """Off-diagonal block part of every ``R(e_i, e_j)``."""
    R = _curvature_array(R)
    n = split.n
    if R.shape != (n,) * 4:
        raise ValueError(f"curvature of shape {R.shape} with {n}-dim projectors")
    P1, P2 = split.P1, split.P2
    return np.einsum("la,akij,kb->lbij", P1, R, P2) + np.einsum(
        "la,akij,kb->lbij", P2, R, P1
    )


def off_generators(R, split, variant="endomorphism"):
    """The spanning family for one variant, as a list of arrays."""
    off = r_off(R, split)
    n = split.n
    if variant == "endomorphism":
        return [off[:, :, i, j] for i in range(n) for j in range(i + 1, n)]
    if variant == "vector":
        return [off[:, k, i, j] for i in range(n) for j in range(i + 1, n) for k in range(n)]
    raise ValueError(f"unknown span variant {variant!r}; expected one of {VARIANTS}")


def _full_generators(R, variant):
    R = _curvature_array(R)
    n = R.shape[0]
    if variant == "endomorphism":
        return [R[:, :, i, j] for i in range(n) for j in range(i + 1, n)]
    return [R[:, k, i, j] for i in range(n) for j in range(i + 1, n) for k in range(n)]


def off_span_dimension(
    M,
    T,
    p,
    tol=DEFAULT_RANK_TOL,
    variant="endomorphism",
    h=1e-4,
    curvature=None,
):
    """Dimension of the off-diagonal span of the curvature at ``p``.

    Singular values count when they exceed ``tol`` times the larger of the
    top off-diagonal singular value and the top singular value of the full
    curvature family. The second scale keeps round-off in an identically
    vanishing off-diagonal part from being promoted to a direction.
    """
    R = curvature if curvature is not None else curvature_at(M, T, p, h)
    gens = off_generators(R, split_projectors(M), variant)
    rows = np.stack([g.ravel() for g in gens])
    sv = np.linalg.svd(rows, compute_uv=False)
    full = np.stack([g.ravel() for g in _full_generators(R, variant)])
    ref = float(np.linalg.svd(full, compute_uv=False)[0])
    scale = max(float(sv[0]), ref)
    dim = int(np.count_nonzero(sv > tol * scale)) if scale > 0 else 0
    point = R.point if hasattr(R, "point") else np.asarray(p, dtype=float)
    return OffDiagReport(
        point=[float(c) for c in point],
        variant=variant,
        dimension=dim,
        singular_values=[float(s) for s in sv],
        tolerance=tol,
        generators_sampled=len(gens),
        reference_scale=ref,
    )


def mixed_curvature_max(M, R):
    """Largest curvature component mapping ``V1`` to ``V2`` or back."""
    off = r_off(R, split_projectors(M))
    return float(np.max(np.abs(off)))


def _transport_rhs(M, T, x, velocity, V):
    G = gamma_total(M, T, x)
    return -np.einsum("lab,a,bc->lc", G, velocity, V)


def loop_holonomy(M, T, p, i, j, s, steps=64):
    """Parallel transport of ``nabla^C`` around a coordinate square.

    The square has a corner at ``p`` and runs ``+s e_i, +s e_j, -s e_i,
    -s e_j``. Each edge is integrated with classical fourth-order
    Runge-Kutta. Returns ``H`` with ``V(end) = H V(start)``; to leading order
    ``H = I - s^2 R(e_i, e_j)``.
    """
    if i == j:
        raise ValueError("loop needs two distinct coordinate directions")
    p = M.canonicalize(p)
    n = M.n
    e = np.eye(n)
    corners = np.array([p, p + s * e[i], p + s * e[i] + s * e[j], p + s * e[j]])
    M.check_stencil(corners)
    V = np.eye(n)
    x = p.copy()
    dt = 1.0 / steps
    for direction in (s * e[i], s * e[j], -s * e[i], -s * e[j]):
        for _ in range(steps):
            k1 = _transport_rhs(M, T, x, direction, V)
            k2 = _transport_rhs(M, T, x + 0.5 * dt * direction, direction, V + 0.5 * dt * k1)
            k3 = _transport_rhs(M, T, x + 0.5 * dt * direction, direction, V + 0.5 * dt * k2)
            k4 = _transport_rhs(M, T, x + dt * direction, direction, V + dt * k3)
            V = V + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            x = x + dt * direction
    return V
