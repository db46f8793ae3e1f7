"""Differential forms on product manifolds.

Harmonic representatives come from a closed-form catalog (constant
coordinate forms on flat tori, constants and the area form on the round
sphere). Nothing here solves a Laplace equation.

A :class:`FormField` is a sum of constant-coefficient monomials
``c * (alpha ^ beta)`` with ``alpha`` a harmonic form on the first factor and
``beta`` one on the second, plus an optional perturbation field. Fields are
evaluated on coordinate batches ``(..., n)`` and return arrays of shape
``(..., n, ..., n)`` with ``degree`` trailing form axes.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial, pi, sqrt
from typing import Callable, Optional

import numpy as np

from .geometry import central_difference, stencil_points
from .tensor import antisymmetrize, levi_civita, wedge_batched

__all__ = [
    "HarmonicBasisElement",
    "FormField",
    "ExactPerturbation",
    "harmonic_basis",
    "betti_numbers",
    "eval_form",
    "exterior_derivative",
    "hodge_star",
    "hodge_star_at",
    "codifferential_at",
    "form_inner",
    "l2_inner",
    "harmonicity_residuals",
]


@dataclass(frozen=True)
class HarmonicBasisElement:
    """One L2-normalized harmonic form on a factor.

    ``evaluator`` maps factor coordinates ``(..., d)`` to ``(..., d^k)``;
    ``derivative`` returns coordinate derivatives ``(..., d, d^k)``.
    ``integral_scale`` is the factor ``s`` for which ``s * element``
    represents the integral generator of its cohomology line (for instance
    ``dx / L`` on a circle of length ``L``).
    """

    factor: object
    degree: int
    index: int
    label: str
    evaluator: Callable = field(repr=False, compare=False)
    derivative: Callable = field(repr=False, compare=False)
    integral_scale: float = 1.0

    def __call__(self, x):
        return self.evaluator(x)


def _constant_element(factor, degree, index, label, value, integral_scale):
    value = np.asarray(value, dtype=float)
    d = factor.dim

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(value, x.shape[:-1] + value.shape).copy()

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (d,) + value.shape)

    return HarmonicBasisElement(
        factor, degree, index, label, evaluate, derivative, integral_scale
    )


def _coordinate_form(d, idx):
    """``dx^{i1} ^ ... ^ dx^{ik}`` as a full array."""
    k = len(idx)
    out = np.zeros((d,) * k)
    eps = levi_civita(k) if k else np.ones(())
    for pos in np.ndindex(*((k,) * k)):
        out[tuple(idx[p] for p in pos)] = eps[pos]
    return out


def _torus_basis(torus, degree):
    vol = torus.volume()
    norm = sqrt(vol)
    out = []
    for index, idx in enumerate(combinations(range(torus.dim), degree)):
        label = "^".join(f"d{torus.name}[{i}]" for i in idx) or f"1_{torus.name}"
        lengths = float(np.prod([torus.periods[i] for i in idx])) if idx else 1.0
        out.append(
            _constant_element(
                torus,
                degree,
                index,
                label,
                _coordinate_form(torus.dim, idx) / norm,
                norm / lengths,
            )
        )
    return out


def _sphere_basis(sphere, degree):
    area = sphere.volume()
    norm = sqrt(area)
    if degree == 0:
        return [_constant_element(sphere, 0, 0, f"1_{sphere.name}", np.ones(()) / norm, norm)]
    if degree != 2:
        return []
    r2 = sphere.radius**2

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        s = r2 * np.sin(x[..., 0]) / norm
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 1] = s
        out[..., 1, 0] = -s
        return out

    def derivative(x):
        x = np.asarray(x, dtype=float)
        s = r2 * np.cos(x[..., 0]) / norm
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 1] = s
        out[..., 0, 1, 0] = -s
        return out

    return [
        HarmonicBasisElement(
            sphere, 2, 0, f"vol_{sphere.name}", evaluate, derivative, norm / area
        )
    ]


def harmonic_basis(factor, degree):
    """L2-orthonormal harmonic ``degree``-forms of a cataloged factor."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if factor.kind == "torus":
        return _torus_basis(factor, degree)
    if factor.kind == "sphere":
        return _sphere_basis(factor, degree)
    raise ValueError(f"no harmonic catalog for factor kind {factor.kind!r}")


def betti_numbers(factor, max_degree=3):
    return [len(harmonic_basis(factor, k)) for k in range(max_degree + 1)]


def _embed(arr, degree, offset, n):
    """Extend a factor form by zero to the product tangent space."""
    arr = np.asarray(arr, dtype=float)
    if degree == 0:
        return arr
    d = arr.shape[-1]
    out = np.zeros(arr.shape[: arr.ndim - degree] + (n,) * degree)
    out[(Ellipsis,) + (slice(offset, offset + d),) * degree] = arr
    return out


@dataclass(frozen=True)
class ExactPerturbation:
    """The exact 3-form ``d eta`` for ``eta = A sin(2 pi k x_a / L_a) C``.

    ``x_a`` is a torus coordinate of period ``L_a`` and ``C`` is a closed
    carrier form named by coordinate indices: either coordinate forms of torus
    coordinates or the full sphere pair, which selects the area form
    ``r^2 sin(theta) dtheta ^ dphi`` (the only smooth choice on a sphere).
    Since ``eta`` is global, adding ``d eta`` never changes the class.
    """

    manifold: object
    amplitude: float
    wave_axis: int
    carrier: tuple
    wavenumber: int = 1

    def __post_init__(self):
        M = self.manifold
        carrier = tuple(int(c) for c in self.carrier)
        object.__setattr__(self, "carrier", carrier)
        kinds = self._axis_kinds()
        if not 0 <= self.wave_axis < M.n or kinds[self.wave_axis][0] != "torus":
            raise ValueError("the wave axis must be a torus coordinate")
        if self.wave_axis in carrier or len(set(carrier)) != len(carrier):
            raise ValueError("carrier indices must be distinct and avoid the wave axis")
        if any(not 0 <= c < M.n for c in carrier):
            raise ValueError(f"carrier index out of range: {carrier}")
        sphere_axes = [c for c in carrier if kinds[c][0] == "sphere"]
        if sphere_axes:
            owners = {kinds[c][1] for c in sphere_axes}
            if len(sphere_axes) != 2 or len(owners) != 1:
                raise ValueError(
                    "a sphere enters the carrier only through its full area form"
                )
        if int(self.wavenumber) != self.wavenumber or self.wavenumber == 0:
            raise ValueError("wavenumber must be a nonzero integer")

    @property
    def degree(self):
        return len(self.carrier) + 1

    def _axis_kinds(self):
        M = self.manifold
        kinds = []
        for which, f in enumerate(M.factors()):
            kinds += [(f.kind, which)] * f.dim
        return kinds

    def _period(self):
        M = self.manifold
        a = self.wave_axis
        f, local = (M.factor1, a) if a < M.n1 else (M.factor2, a - M.n1)
        return f.periods[local]

    def _kappa(self):
        return 2 * pi * self.wavenumber / self._period()

    def _carrier(self, x, with_derivative=False):
        M = self.manifold
        n = M.n
        kinds = self._axis_kinds()
        base = _coordinate_form(n, self.carrier)
        batch = x.shape[:-1]
        sphere_axes = [c for c in self.carrier if kinds[c][0] == "sphere"]
        if not sphere_axes:
            value = np.broadcast_to(base, batch + base.shape).copy()
            deriv = np.zeros(batch + (n,) + base.shape)
        else:
            f = M.factors()[kinds[sphere_axes[0]][1]]
            theta_axis = min(sphere_axes)
            th = x[..., theta_axis]
            r2 = f.radius**2
            value = (r2 * np.sin(th)).reshape(batch + (1,) * base.ndim) * base
            deriv = np.zeros(batch + (n,) + base.shape)
            deriv[(Ellipsis, theta_axis) + (slice(None),) * base.ndim] = (
                r2 * np.cos(th)
            ).reshape(batch + (1,) * base.ndim) * base
        return (value, deriv) if with_derivative else value

    def potential(self, x):
        """``eta`` itself, mainly for finite-difference cross-checks."""
        x = np.asarray(x, dtype=float)
        wave = self.amplitude * np.sin(self._kappa() * x[..., self.wave_axis])
        c = self._carrier(x)
        return wave.reshape(wave.shape + (1,) * len(self.carrier)) * c

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        kappa = self._kappa()
        slope = self.amplitude * kappa * np.cos(kappa * x[..., self.wave_axis])
        dxa = np.zeros(x.shape[:-1] + (self.manifold.n,))
        dxa[..., self.wave_axis] = slope
        return wedge_batched(dxa, self._carrier(x), 1, len(self.carrier))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        n = self.manifold.n
        m = len(self.carrier)
        kappa = self._kappa()
        xa = x[..., self.wave_axis]
        slope = self.amplitude * kappa * np.cos(kappa * xa)
        curve = -self.amplitude * kappa**2 * np.sin(kappa * xa)
        c, dc = self._carrier(x, with_derivative=True)
        unit = np.zeros(n)
        unit[self.wave_axis] = 1.0
        # d_b (f(x_a) dx_a ^ C) = f'' delta_ab dx_a ^ C + f' dx_a ^ d_b C
        dxa = np.broadcast_to(unit, dc.shape[:-m] + (n,))
        out = slope.reshape(slope.shape + (1,) * (m + 2)) * wedge_batched(dxa, dc, 1, m)
        first = curve.reshape(curve.shape + (1,) * (m + 1)) * wedge_batched(
            np.broadcast_to(unit, x.shape[:-1] + (n,)), c, 1, m
        )
        out[(Ellipsis, self.wave_axis) + (slice(None),) * (m + 1)] += first
        return out

    def scaled(self, lam):
        return ExactPerturbation(
            self.manifold, self.amplitude * lam, self.wave_axis, self.carrier, self.wavenumber
        )

    def to_dict(self):
        return {
            "amplitude": self.amplitude,
            "wave_axis": self.wave_axis,
            "carrier": list(self.carrier),
            "wavenumber": self.wavenumber,
        }


@dataclass(frozen=True)
class FormField:
    """A degree-``k`` form field on a product manifold.

    ``monomials`` holds ``(coefficient, alpha, beta)`` triples; ``alpha`` is
    a :class:`HarmonicBasisElement` of the first factor, ``beta`` one of the
    second, and either may be ``None`` for the plain pullback of the other.
    ``perturbation`` is an object with ``evaluate`` (and optionally
    ``derivative``) or a bare callable on coordinate batches.
    """

    degree: int
    manifold: object
    monomials: tuple = ()
    perturbation: Optional[object] = None
    scale: float = 1.0

    def __post_init__(self):
        mons = tuple((float(c), a, b) for c, a, b in self.monomials)
        for c, a, b in mons:
            da = a.degree if a is not None else 0
            db = b.degree if b is not None else 0
            if da + db != self.degree:
                raise ValueError(
                    f"monomial bidegree ({da},{db}) does not match degree {self.degree}"
                )
            if a is not None and a.factor != self.manifold.factor1:
                raise ValueError(f"{a.label} does not live on the first factor")
            if b is not None and b.factor != self.manifold.factor2:
                raise ValueError(f"{b.label} does not live on the second factor")
        object.__setattr__(self, "monomials", mons)
        pdeg = getattr(self.perturbation, "degree", self.degree)
        if pdeg != self.degree:
            raise ValueError(f"perturbation of degree {pdeg} added to a {self.degree}-form")

    @classmethod
    def zero(cls, manifold, degree):
        return cls(degree, manifold)

    @classmethod
    def pullback(cls, manifold, element, coefficient=1.0, which=None):
        """A single factor element extended to the product.

        ``which`` (0 or 1) picks the factor explicitly, which matters when
        both factors are equal.
        """
        if which is None:
            which = 0 if element.factor == manifold.factor1 else 1
        if which == 0:
            return cls(element.degree, manifold, ((coefficient, element, None),))
        return cls(element.degree, manifold, ((coefficient, None, element),))

    def scaled(self, lam):
        return FormField(
            self.degree, self.manifold, self.monomials, self.perturbation, self.scale * lam
        )

    def with_perturbation(self, perturbation):
        return FormField(self.degree, self.manifold, self.monomials, perturbation, self.scale)

    @property
    def has_analytic_derivative(self):
        p = self.perturbation
        return p is None or hasattr(p, "derivative")

    def _split(self, x):
        s1, s2 = self.manifold.slices()
        return x[..., s1], x[..., s2]

    def _factor_value(self, elem, xf, offset):
        if elem is None:
            return np.ones(xf.shape[:-1]), 0
        return _embed(elem(xf), elem.degree, offset, self.manifold.n), elem.degree

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        M = self.manifold
        k = self.degree
        out = np.zeros(x.shape[:-1] + (M.n,) * k)
        x1, x2 = self._split(x)
        for c, a, b in self.monomials:
            va, da = self._factor_value(a, x1, 0)
            vb, db = self._factor_value(b, x2, M.n1)
            out += c * wedge_batched(va, vb, da, db)
        if self.perturbation is not None:
            p = self.perturbation
            out += p.evaluate(x) if hasattr(p, "evaluate") else np.asarray(p(x), dtype=float)
        return self.scale * out

    __call__ = evaluate

    def derivative(self, x):
        """Closed-form coordinate derivatives ``(..., n, n^k)``."""
        if not self.has_analytic_derivative:
            raise NotImplementedError("perturbation has no closed-form derivative")
        x = np.asarray(x, dtype=float)
        M = self.manifold
        n, k = M.n, self.degree
        out = np.zeros(x.shape[:-1] + (n,) + (n,) * k)
        x1, x2 = self._split(x)
        batch = x.shape[:-1]

        def spread(v, count):
            # repeat a factor value along a new derivative axis after the batch
            v = np.expand_dims(v, len(batch))
            return np.broadcast_to(v, batch + (count,) + v.shape[len(batch) + 1:])

        for c, a, b in self.monomials:
            va, da = self._factor_value(a, x1, 0)
            vb, db = self._factor_value(b, x2, M.n1)
            if a is not None:
                dva = _embed(a.derivative(x1), da, 0, n)
                out[(Ellipsis, slice(0, M.n1)) + (slice(None),) * k] += c * wedge_batched(
                    dva, spread(vb, M.n1), da, db
                )
            if b is not None:
                dvb = _embed(b.derivative(x2), db, M.n1, n)
                out[(Ellipsis, slice(M.n1, n)) + (slice(None),) * k] += c * wedge_batched(
                    spread(va, M.n2), dvb, da, db
                )
        if self.perturbation is not None:
            out += self.perturbation.derivative(x)
        return self.scale * out

    def to_dict(self):
        return {
            "degree": self.degree,
            "monomials": [
                [c, a.label if a else None, b.label if b else None]
                for c, a, b in self.monomials
            ],
            "scale": self.scale,
            "perturbation": (
                self.perturbation.to_dict() if hasattr(self.perturbation, "to_dict") else None
            ),
        }


def eval_form(F, p):
    """Value of ``F`` at a chart point as a full antisymmetric array."""
    return F.evaluate(F.manifold.canonicalize(p))


def _field_call(F, x):
    return F.evaluate(x) if hasattr(F, "evaluate") else np.asarray(F(x), dtype=float)


def exterior_derivative(F, p, h=1e-4, method="fd", order=2, degree=None, manifold=None):
    """``dF`` at ``p`` (which may be a batch of points).

    ``method="fd"`` differentiates ``F`` by central differences with steps
    scaled per chart axis; ``method="analytic"`` uses closed-form derivatives
    of the catalog monomials and perturbation. In both cases
    ``(dF)_{i0..ik} = sum_j (-1)^j d_{ij} F_{i0..^ij..ik}``.
    """
    M = manifold if manifold is not None else F.manifold
    k = F.degree if degree is None else degree
    p = np.asarray(p, dtype=float)
    batch = p.ndim - 1
    if method == "analytic":
        D = F.derivative(p)
    elif method == "fd":
        steps = M.step_sizes(h)
        M.check_stencil(stencil_points(p, steps, order))
        D = np.moveaxis(central_difference(lambda x: _field_call(F, x), p, steps, order), 0, batch)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (k + 1) * antisymmetrize(D, k + 1)


def _raise_axis(a, axis, ginv):
    moved = np.moveaxis(a, axis, -1)
    extra = moved.ndim - ginv.ndim + 1
    g = ginv.reshape(ginv.shape[:-2] + (1,) * extra + ginv.shape[-2:])
    raised = np.einsum("...j,...ij->...i", moved, g)
    return np.moveaxis(raised, -1, axis)


def hodge_star(a, g, degree):
    """Pointwise Hodge star for metrics ``g`` of shape ``(..., n, n)``.

    ``(*a)_J = 1/k! sqrt(det g) a^I eps_IJ`` with the chart (product)
    orientation; ``**a = (-1)^(k(n-k)) a`` in Riemannian signature.
    """
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    if degree and a.shape[-1] != n:
        raise ValueError(f"form of dimension {a.shape[-1]} with a {n}-dim metric")
    if degree > n:
        raise ValueError(f"degree {degree} exceeds dimension {n}")
    ginv = np.linalg.inv(g)
    up = a
    for ax in range(degree):
        up = _raise_axis(up, up.ndim - degree + ax, ginv)
    vol = np.sqrt(np.linalg.det(g))
    eps = levi_civita(n).reshape((n**degree,) + (n,) * (n - degree))
    batch = up.shape[: up.ndim - degree]
    flat = up.reshape(batch + (n**degree,))
    star = np.tensordot(flat, eps, axes=([-1], [0])) / factorial(degree)
    return vol.reshape(vol.shape + (1,) * (n - degree)) * star


def hodge_star_at(M, a, p):
    a = np.asarray(a, dtype=float)
    if a.ndim and a.shape[0] != M.n:
        raise ValueError(f"form of dimension {a.shape[0]} on a {M.n}-manifold")
    return hodge_star(a, M.metric(M.canonicalize(p)), a.ndim)


def codifferential_at(M, F, p, h=1e-4, order=2):
    """``delta F = (-1)^(n(k+1)+1) * d * F`` at ``p``.

    The sign makes ``delta`` the formal L2 adjoint of ``d`` on a closed
    Riemannian manifold; the adjointness test in the suite pins it.
    """
    k = F.degree
    if k < 1:
        raise ValueError("codifferential needs degree >= 1")
    n = M.n

    def star_field(x):
        return hodge_star(_field_call(F, x), M.metric(x), k)

    d_star = exterior_derivative(
        star_field, p, h=h, order=order, degree=n - k, manifold=M
    )
    p = np.asarray(p, dtype=float)
    sign = (-1) ** (n * (k + 1) + 1)
    return sign * hodge_star(d_star, M.metric(p), n - k + 1)


def form_inner(a, b, g, degree):
    """Pointwise ``<a, b>_g = 1/k! a_I b^I``."""
    ginv = np.linalg.inv(np.asarray(g, dtype=float))
    up = np.asarray(b, dtype=float)
    for ax in range(degree):
        up = _raise_axis(up, up.ndim - degree + ax, ginv)
    axes = tuple(range(-degree, 0))
    return np.sum(np.asarray(a) * up, axis=axes) / factorial(degree)


def l2_inner(F, G, grid):
    """``int_M <F, G>_g dvol`` on a quadrature grid ``(nodes, weights)``."""
    if F.degree != G.degree:
        raise ValueError(f"degree mismatch: {F.degree} vs {G.degree}")
    M = F.manifold
    if G.manifold != M:
        raise ValueError("forms live on different manifolds")
    nodes, weights = grid
    if nodes.shape[-1] != M.n:
        raise ValueError("quadrature grid does not match the manifold")
    vals = form_inner(F.evaluate(nodes), G.evaluate(nodes), M.metric(nodes), F.degree)
    return float(np.dot(weights, vals))


def harmonicity_residuals(M, points, h=1e-4):
    """Max-abs ``d`` and ``delta`` residuals of every catalog element.

    Each harmonic basis form of each factor is pulled back to ``M`` and
    differentiated by finite differences at ``points``.
    """
    d_res = 0.0
    delta_res = 0.0
    for which, f in enumerate(M.factors()):
        for k in range(f.dim + 1):
            for elem in harmonic_basis(f, k):
                F = FormField.pullback(M, elem, which=which)
                d_res = max(d_res, float(np.max(np.abs(exterior_derivative(F, points, h)))))
                if k >= 1:
                    for p in points:
                        delta = codifferential_at(M, F, p, h)
                        delta_res = max(delta_res, float(np.max(np.abs(delta))))
    return d_res, delta_res
