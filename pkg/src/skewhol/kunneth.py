"""Kunneth bookkeeping for degree-3 classes on a two-factor product.

A class in ``H^3(M1 x M2)`` is stored through its four bidegree blocks
relative to the L2-orthonormal harmonic bases of the factors::

    C30[i]    * alpha3_i ^ 1        C21[i, j] * alpha2_i ^ beta1_j
    C12[i, j] * alpha1_i ^ beta2_j  C03[j]    * 1 ^ beta3_j

Only the (2,1) and (1,2) blocks are mixed. A block is an order-2 tensor, so
its minimal number of simple summands is its matrix rank.
"""

from dataclasses import dataclass, field

import numpy as np

from .forms import FormField, form_inner, harmonic_basis
from .geometry import quadrature_grid
from .tensor import DEFAULT_RANK_TOL, numerical_rank

__all__ = [
    "KunnethClass",
    "MixedRankReport",
    "bidegree_basis",
    "class_form",
    "mixed_projections",
    "mixed_rank",
    "project_form_to_class",
    "metric_independence_sweep",
]

BLOCKS = ("C30", "C21", "C12", "C03")
BIDEGREES = {"C30": (3, 0), "C21": (2, 1), "C12": (1, 2), "C03": (0, 3)}


def _block_shape(M, name):
    p, q = BIDEGREES[name]
    return (len(harmonic_basis(M.factor1, p)), len(harmonic_basis(M.factor2, q)))


@dataclass(frozen=True)
class KunnethClass:
    """Bidegree coefficient blocks of a degree-3 class.

    ``C30`` and ``C03`` are stored as ``b3 x 1`` and ``1 x b3`` matrices so
    every block has the layout ``[first-factor index, second-factor index]``.
    ``basis_ref`` is ``"orthonormal"`` (L2-normalized harmonic forms of the
    current metric) or ``"integral"`` (integral generators, metric-free).
    """

    C30: np.ndarray
    C21: np.ndarray
    C12: np.ndarray
    C03: np.ndarray
    basis_ref: str = "orthonormal"

    def __post_init__(self):
        for name in BLOCKS:
            block = np.asarray(getattr(self, name), dtype=float)
            if block.ndim == 1:
                block = block.reshape((-1, 1)) if name == "C30" else block.reshape((1, -1))
            if block.ndim != 2:
                raise ValueError(f"{name} must be a matrix, got shape {block.shape}")
            if not np.all(np.isfinite(block)):
                raise ValueError(f"{name} has non-finite entries")
            block = block.copy()
            block.setflags(write=False)
            object.__setattr__(self, name, block)
        if self.basis_ref not in ("orthonormal", "integral"):
            raise ValueError(f"unknown basis_ref {self.basis_ref!r}")

    @classmethod
    def zeros(cls, M, basis_ref="orthonormal"):
        return cls(*(np.zeros(_block_shape(M, b)) for b in BLOCKS), basis_ref=basis_ref)

    @classmethod
    def from_blocks(cls, M, basis_ref="orthonormal", **blocks):
        """Build a class on ``M``; omitted blocks are zero."""
        unknown = set(blocks) - set(BLOCKS)
        if unknown:
            raise ValueError(f"unknown blocks {sorted(unknown)}")
        arrays = []
        for name in BLOCKS:
            shape = _block_shape(M, name)
            arr = np.asarray(blocks.get(name, np.zeros(shape)), dtype=float)
            if arr.size == shape[0] * shape[1]:
                arr = arr.reshape(shape)
            arrays.append(arr)
        out = cls(*arrays, basis_ref=basis_ref)
        out.validate(M)
        return out

    def blocks(self):
        return {name: getattr(self, name) for name in BLOCKS}

    def validate(self, M):
        """Raise unless block shapes match the Betti numbers of the factors."""
        for name in BLOCKS:
            expected = _block_shape(M, name)
            got = getattr(self, name).shape
            if got != expected:
                raise ValueError(
                    f"{name} has shape {got} but the Betti numbers of "
                    f"{M.name} require {expected}"
                )
        return self

    def _rescale(self, M, to_integral):
        self.validate(M)
        new = {}
        for name in BLOCKS:
            p, q = BIDEGREES[name]
            s = np.array([e.integral_scale for e in harmonic_basis(M.factor1, p)])
            t = np.array([e.integral_scale for e in harmonic_basis(M.factor2, q)])
            scale = np.outer(s, t).reshape(getattr(self, name).shape)
            block = getattr(self, name)
            new[name] = block / scale if to_integral else block * scale
        return KunnethClass(
            **new, basis_ref="integral" if to_integral else "orthonormal"
        )

    def to_integral(self, M):
        """Coefficients against integral generators, independent of the metric."""
        return self if self.basis_ref == "integral" else self._rescale(M, True)

    def to_orthonormal(self, M):
        """Coefficients against the L2-orthonormal harmonic basis of ``M``."""
        return self if self.basis_ref == "orthonormal" else self._rescale(M, False)

    def max_abs_difference(self, other):
        return max(
            float(np.max(np.abs(a - b), initial=0.0))
            for a, b in zip(self.blocks().values(), other.blocks().values())
        )

    def to_dict(self):
        d = {name: getattr(self, name).tolist() for name in BLOCKS}
        d["basis_ref"] = self.basis_ref
        return d

    @classmethod
    def from_dict(cls, d, M=None):
        if M is not None:
            return cls.from_blocks(
                M,
                basis_ref=d.get("basis_ref", "orthonormal"),
                **{k: v for k, v in d.items() if k in BLOCKS},
            )
        return cls(*(d[name] for name in BLOCKS), basis_ref=d.get("basis_ref", "orthonormal"))


@dataclass
class MixedRankReport:
    r21: int
    r12: int
    total: int
    singular_values_21: list
    singular_values_12: list
    component_count: int
    is_mixed: bool
    tolerance: float
    stable_over_tolerance: bool = True
    metric: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "r21": self.r21,
            "r12": self.r12,
            "total": self.total,
            "singular_values_21": list(self.singular_values_21),
            "singular_values_12": list(self.singular_values_12),
            "component_count": self.component_count,
            "is_mixed": self.is_mixed,
            "tolerance": self.tolerance,
            "stable_over_tolerance": self.stable_over_tolerance,
            "metric": dict(self.metric),
        }


def bidegree_basis(M, p, q):
    """Product harmonic basis ``alpha_i ^ beta_j`` of bidegree ``(p, q)``.

    Returns ``(i, j, alpha, beta)`` tuples; degree-0 entries are the
    normalized constants, so the family is L2-orthonormal on ``M``.
    """
    first = harmonic_basis(M.factor1, p)
    second = harmonic_basis(M.factor2, q)
    return [(i, j, a, b) for i, a in enumerate(first) for j, b in enumerate(second)]


def class_form(M, cls, perturbation=None):
    """The harmonic representative of ``cls`` (plus ``perturbation``)."""
    cls = cls.to_orthonormal(M).validate(M)
    monomials = []
    for name in BLOCKS:
        p, q = BIDEGREES[name]
        block = getattr(cls, name)
        for i, j, a, b in bidegree_basis(M, p, q):
            c = float(block[i, j])
            if c != 0.0:
                monomials.append((c, a, b))
    return FormField(3, M, tuple(monomials), perturbation)


def mixed_projections(cls):
    """The mixed blocks ``(C21, C12)`` of a class."""
    return np.array(cls.C21), np.array(cls.C12)


def mixed_rank(cls, tol=DEFAULT_RANK_TOL):
    """Mixed tensor rank ``r21 + r12`` and the component count next to it.

    ``component_count`` counts entries of the mixed blocks above
    ``tol * max|entry|``. It depends on the chosen basis and is never smaller
    than the rank.
    """
    C21, C12 = mixed_projections(cls)
    r21, sv21 = numerical_rank(C21, tol)
    r12, sv12 = numerical_rank(C12, tol)
    entries = np.abs(np.concatenate([C21.ravel(), C12.ravel()]))
    top = float(entries.max(initial=0.0))
    count = int(np.count_nonzero(entries > tol * top)) if top > 0 else 0
    stable = all(
        numerical_rank(C21, t)[0] == r21 and numerical_rank(C12, t)[0] == r12
        for t in (tol * 10.0, tol / 10.0)
    )
    return MixedRankReport(
        r21=r21,
        r12=r12,
        total=r21 + r12,
        singular_values_21=[float(s) for s in sv21],
        singular_values_12=[float(s) for s in sv12],
        component_count=count,
        is_mixed=(r21 + r12) > 0,
        tolerance=tol,
        stable_over_tolerance=stable,
    )


def project_form_to_class(F, M, grid=None):
    """L2 coefficients of a closed 3-form against the product harmonic basis.

    Exact forms are L2-orthogonal to harmonic ones on a closed manifold, so
    this recovers the class of ``F``. Closedness is the caller's business.
    """
    if grid is None:
        grid = quadrature_grid(M)
    nodes, weights = grid
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[-1] != M.n or len(weights) != len(nodes):
        raise ValueError("quadrature grid does not match the manifold")
    if getattr(F, "degree", 3) != 3:
        raise ValueError("only 3-forms carry a Kunneth class here")
    values = F.evaluate(nodes) if hasattr(F, "evaluate") else np.asarray(F(nodes))
    g = M.metric(nodes)
    blocks = {}
    for name in BLOCKS:
        p, q = BIDEGREES[name]
        block = np.zeros(_block_shape(M, name))
        for i, j, a, b in bidegree_basis(M, p, q):
            basis = FormField(3, M, ((1.0, a, b),)).evaluate(nodes)
            block[i, j] = float(np.dot(weights, form_inner(values, basis, g, 3)))
        blocks[name] = block
    return KunnethClass(**blocks)


def metric_independence_sweep(cls, M, metric_params, tol=DEFAULT_RANK_TOL, resolution=None):
    """Re-rank one cohomology class under a family of product metrics.

    ``cls`` is interpreted on ``M`` and held fixed as a de Rham class (via its
    integral coordinates). Each entry of ``metric_params`` is a mapping with
    optional ``radius`` (sphere factors) and ``period_scale`` (torus
    factors). For each metric the harmonic bases are rebuilt, the harmonic
    representative re-projected, and the mixed rank recomputed.
    """
    if not metric_params:
        raise ValueError("metric sweep needs at least one parameter set")
    fixed = cls.to_integral(M)
    reports = []
    for params in metric_params:
        radius = params.get("radius")
        scale = float(params.get("period_scale", 1.0))
        Mg = M.rescaled(radius=radius, period_scale=scale)
        F = class_form(Mg, fixed.to_orthonormal(Mg))
        projected = project_form_to_class(F, Mg, quadrature_grid(Mg, resolution))
        report = mixed_rank(projected, tol)
        report.metric = {"radius": radius, "period_scale": scale}
        reports.append(report)
    return reports
