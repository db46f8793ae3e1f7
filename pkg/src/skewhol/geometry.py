"""Closed-form factor manifolds and their Riemannian products.

Two factors are cataloged: flat tori with arbitrary periods and the round
2-sphere in a single ``(theta, phi)`` chart with a pole-exclusion margin.
Every factor method is vectorized over leading axes of the coordinate array,
so ``coords`` of shape ``(..., dim)`` gives a metric of shape
``(..., dim, dim)``.

Chart coordinates ``0..n1-1`` of a product belong to the first factor and
span ``V1``; the remaining ``n2`` coordinates span ``V2``.
"""

from dataclasses import dataclass, field
from math import comb, pi

import numpy as np

__all__ = [
    "DEFAULT_POLE_MARGIN",
    "ChartDomainError",
    "FactorManifold",
    "FlatTorus",
    "RoundSphere2",
    "ProductManifold",
    "factor_from_dict",
    "manifold_from_dict",
    "metric_at",
    "christoffel_lc",
    "christoffel_fd",
    "central_difference",
    "quadrature_grid",
    "sample_points",
]

DEFAULT_POLE_MARGIN = 0.15


class ChartDomainError(ValueError):
    """A point or finite-difference stencil left the coordinate chart."""


class FactorManifold:
    """Interface shared by the cataloged factors.

    A new factor (say a genus-2 surface with numerically computed harmonic
    forms) implements these methods plus a harmonic basis in ``forms``.
    """

    kind = "abstract"
    name = ""

    @property
    def dim(self):
        raise NotImplementedError

    def metric(self, x):
        raise NotImplementedError

    def metric_derivative(self, x):
        """``d_a g_ij`` with the derivative axis before the metric axes."""
        raise NotImplementedError

    def christoffel(self, x):
        """Levi-Civita symbols ``Gamma^l_ij`` indexed ``[..., l, i, j]``."""
        raise NotImplementedError

    def christoffel_derivative(self, x):
        """``d_a Gamma^l_ij`` indexed ``[..., a, l, i, j]``."""
        raise NotImplementedError

    def volume(self):
        raise NotImplementedError

    def betti(self, k):
        raise NotImplementedError

    def canonicalize(self, x, margin):
        """Validate coordinates and fold periodic ones into their range."""
        raise NotImplementedError

    def sample(self, rng, count, margin):
        raise NotImplementedError

    def quadrature(self, resolution):
        raise NotImplementedError

    def step_scales(self):
        """Per-axis scale applied to a unit-scale finite-difference step."""
        raise NotImplementedError

    def rescaled(self, radius=None, period_scale=1.0):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class FlatTorus(FactorManifold):
    """``R^n / (L_1 Z x ... x L_n Z)`` with the Euclidean metric."""

    periods: tuple = (2 * pi,)
    name: str = ""
    kind = "torus"

    def __post_init__(self):
        periods = tuple(float(p) for p in np.atleast_1d(self.periods))
        if not periods:
            raise ValueError("a torus needs at least one period")
        if any(not np.isfinite(p) or p <= 0 for p in periods):
            raise ValueError(f"torus periods must be positive, got {periods}")
        object.__setattr__(self, "periods", periods)
        if not self.name:
            object.__setattr__(self, "name", f"T{len(periods)}")

    @classmethod
    def standard(cls, dim, period=2 * pi, name=""):
        return cls(periods=(period,) * dim, name=name)

    @property
    def dim(self):
        return len(self.periods)

    def _batch(self, x):
        x = np.asarray(x, dtype=float)
        return x.shape[:-1]

    def metric(self, x):
        return np.broadcast_to(np.eye(self.dim), self._batch(x) + (self.dim,) * 2).copy()

    def metric_derivative(self, x):
        return np.zeros(self._batch(x) + (self.dim,) * 3)

    def christoffel(self, x):
        return np.zeros(self._batch(x) + (self.dim,) * 3)

    def christoffel_derivative(self, x):
        return np.zeros(self._batch(x) + (self.dim,) * 4)

    def volume(self):
        return float(np.prod(self.periods))

    def betti(self, k):
        return comb(self.dim, k) if 0 <= k <= self.dim else 0

    def canonicalize(self, x, margin):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ChartDomainError("non-finite torus coordinate")
        return np.mod(x, np.asarray(self.periods))

    def sample(self, rng, count, margin):
        return rng.uniform(0.0, 1.0, size=(count, self.dim)) * np.asarray(self.periods)

    def quadrature(self, resolution):
        res = np.broadcast_to(np.atleast_1d(resolution), (self.dim,))
        if np.any(res < 4):
            raise ValueError(f"quadrature resolution must be >= 4, got {tuple(res)}")
        axes = [np.arange(int(m)) * (L / int(m)) for m, L in zip(res, self.periods)]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        weight = float(np.prod([L / int(m) for m, L in zip(res, self.periods)]))
        return nodes, np.full(len(nodes), weight)

    def step_scales(self):
        return np.asarray(self.periods) / (2 * pi)

    def rescaled(self, radius=None, period_scale=1.0):
        return FlatTorus(tuple(p * period_scale for p in self.periods), name=self.name)

    def to_dict(self):
        return {"kind": "torus", "name": self.name, "periods": list(self.periods)}


@dataclass(frozen=True)
class RoundSphere2(FactorManifold):
    """Round 2-sphere of radius ``r`` in polar coordinates ``(theta, phi)``."""

    radius: float = 1.0
    name: str = "S2"
    kind = "sphere"

    def __post_init__(self):
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise ValueError(f"sphere radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return 2

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        r2 = self.radius**2
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = r2
        g[..., 1, 1] = r2 * np.sin(x[..., 0]) ** 2
        return g

    def metric_derivative(self, x):
        x = np.asarray(x, dtype=float)
        dg = np.zeros(x.shape[:-1] + (2, 2, 2))
        dg[..., 0, 1, 1] = self.radius**2 * np.sin(2 * x[..., 0])
        return dg

    def christoffel(self, x):
        x = np.asarray(x, dtype=float)
        th = x[..., 0]
        gam = np.zeros(x.shape[:-1] + (2, 2, 2))
        gam[..., 0, 1, 1] = -np.sin(th) * np.cos(th)
        cot = np.cos(th) / np.sin(th)
        gam[..., 1, 0, 1] = cot
        gam[..., 1, 1, 0] = cot
        return gam

    def christoffel_derivative(self, x):
        x = np.asarray(x, dtype=float)
        th = x[..., 0]
        dgam = np.zeros(x.shape[:-1] + (2, 2, 2, 2))
        dgam[..., 0, 0, 1, 1] = -np.cos(2 * th)
        dcot = -1.0 / np.sin(th) ** 2
        dgam[..., 0, 1, 0, 1] = dcot
        dgam[..., 0, 1, 1, 0] = dcot
        return dgam

    def volume(self):
        return 4 * pi * self.radius**2

    def betti(self, k):
        return 1 if k in (0, 2) else 0

    def canonicalize(self, x, margin):
        x = np.array(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ChartDomainError("non-finite sphere coordinate")
        th = x[..., 0]
        if np.any(th <= margin) or np.any(th >= pi - margin):
            raise ChartDomainError(
                f"theta outside the chart ({margin:g}, pi - {margin:g}): {np.ravel(th)}"
            )
        x[..., 1] = np.mod(x[..., 1], 2 * pi)
        return x

    def sample(self, rng, count, margin):
        th = rng.uniform(margin, pi - margin, size=count)
        ph = rng.uniform(0.0, 2 * pi, size=count)
        return np.stack([th, ph], axis=-1)

    def quadrature(self, resolution):
        res = np.atleast_1d(resolution).astype(int)
        n_th, n_ph = (int(res[0]), 2 * int(res[0])) if res.size == 1 else map(int, res[:2])
        if min(n_th, n_ph) < 4:
            raise ValueError(f"quadrature resolution must be >= 4, got {(n_th, n_ph)}")
        u, w = np.polynomial.legendre.leggauss(n_th)
        th = np.arccos(u)
        ph = np.arange(n_ph) * (2 * pi / n_ph)
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        nodes = np.stack([tt.ravel(), pp.ravel()], axis=-1)
        weights = np.repeat(w, n_ph) * (2 * pi / n_ph) * self.radius**2
        return nodes, weights

    def step_scales(self):
        return np.ones(2)

    def rescaled(self, radius=None, period_scale=1.0):
        return RoundSphere2(self.radius if radius is None else radius, name=self.name)

    def to_dict(self):
        return {"kind": "sphere", "name": self.name, "radius": self.radius}


def factor_from_dict(d):
    kind = d.get("kind")
    name = d.get("name", "")
    if kind == "torus":
        if "periods" in d:
            periods = d["periods"]
        else:
            periods = [d.get("period", 2 * pi)] * int(d["dim"])
        return FlatTorus(tuple(periods), name=name)
    if kind == "sphere":
        return RoundSphere2(float(d.get("radius", 1.0)), name=name or "S2")
    raise ValueError(f"unknown factor kind {kind!r}")


@dataclass(frozen=True)
class ProductManifold:
    """``M1 x M2`` with the product metric and product orientation."""

    factor1: FactorManifold
    factor2: FactorManifold
    pole_margin: float = DEFAULT_POLE_MARGIN
    n1: int = field(init=False)
    n2: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n1", self.factor1.dim)
        object.__setattr__(self, "n2", self.factor2.dim)
        if not 0 <= self.pole_margin < pi / 2:
            raise ValueError("pole margin must lie in [0, pi/2)")

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def split(self):
        return self.n1

    @property
    def name(self):
        return f"{self.factor1.name}x{self.factor2.name}"

    def factors(self):
        return (self.factor1, self.factor2)

    def slices(self):
        return (slice(0, self.n1), slice(self.n1, self.n))

    def _blocks(self, parts, x, nidx):
        x = np.asarray(x, dtype=float)
        s1, s2 = self.slices()
        a = parts[0](x[..., s1])
        b = parts[1](x[..., s2])
        out = np.zeros(x.shape[:-1] + (self.n,) * nidx)
        out[(Ellipsis,) + (s1,) * nidx] = a
        out[(Ellipsis,) + (s2,) * nidx] = b
        return out

    def metric(self, x):
        return self._blocks((self.factor1.metric, self.factor2.metric), x, 2)

    def metric_derivative(self, x):
        return self._blocks(
            (self.factor1.metric_derivative, self.factor2.metric_derivative), x, 3
        )

    def christoffel(self, x):
        return self._blocks((self.factor1.christoffel, self.factor2.christoffel), x, 3)

    def christoffel_derivative(self, x):
        return self._blocks(
            (self.factor1.christoffel_derivative, self.factor2.christoffel_derivative),
            x,
            4,
        )

    def volume(self):
        return self.factor1.volume() * self.factor2.volume()

    def canonicalize(self, p, margin=None):
        """Validate a chart point (or a batch of them) and fold periods."""
        margin = self.pole_margin if margin is None else margin
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.n:
            raise ChartDomainError(f"point has {p.shape[-1]} coordinates, expected {self.n}")
        s1, s2 = self.slices()
        out = np.empty_like(p)
        out[..., s1] = self.factor1.canonicalize(p[..., s1], margin)
        out[..., s2] = self.factor2.canonicalize(p[..., s2], margin)
        return out

    def check_stencil(self, points):
        """Stencil points only need the open chart, not the sampling margin."""
        self.canonicalize(points, margin=0.0)

    def step_sizes(self, h):
        return h * np.concatenate([self.factor1.step_scales(), self.factor2.step_scales()])

    def rescaled(self, radius=None, period_scale=1.0):
        return ProductManifold(
            self.factor1.rescaled(radius, period_scale),
            self.factor2.rescaled(radius, period_scale),
            self.pole_margin,
        )

    def to_dict(self):
        return {
            "factor1": self.factor1.to_dict(),
            "factor2": self.factor2.to_dict(),
            "pole_margin": self.pole_margin,
        }


def manifold_from_dict(d):
    return ProductManifold(
        factor_from_dict(d["factor1"]),
        factor_from_dict(d["factor2"]),
        float(d.get("pole_margin", DEFAULT_POLE_MARGIN)),
    )


def metric_at(M, p):
    """Product metric at a chart point, block diagonal ``g1 + g2``."""
    return M.metric(M.canonicalize(p))


def christoffel_lc(M, p):
    """Closed-form Levi-Civita symbols ``Gamma^l_ij`` at ``p``."""
    return M.christoffel(M.canonicalize(p))


def central_difference(f, p, steps, order=2):
    """Partial derivatives of ``f`` at ``p`` along every coordinate axis.

    ``f`` maps a coordinate batch ``(..., n)`` to arrays ``(..., *shape)``.
    ``p`` may itself carry batch axes; the result has shape
    ``(n, *batch, *shape)``. ``order`` 2 uses the three-point stencil,
    ``order`` 4 the five-point one.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (n,))
    shift = (np.eye(n) * steps[:, None]).reshape((n,) + (1,) * (p.ndim - 1) + (n,))
    if order == 2:
        offsets, coefs, denom = (1, -1), (1.0, -1.0), 2.0
    elif order == 4:
        offsets, coefs, denom = (2, 1, -1, -2), (-1.0, 8.0, -8.0, 1.0), 12.0
    else:
        raise ValueError(f"unsupported difference order {order}")
    vals = f(np.stack([p + k * shift for k in offsets]))
    out = sum(c * v for c, v in zip(coefs, vals))
    h = steps.reshape((n,) + (1,) * (out.ndim - 1))
    return out / (denom * h)


def stencil_points(p, steps, order):
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    reach = 1 if order == 2 else 2
    shift = (np.eye(n) * np.broadcast_to(steps, (n,))[:, None]).reshape(
        (n,) + (1,) * (p.ndim - 1) + (n,)
    )
    return np.stack([p + k * shift for k in range(-reach, reach + 1) if k])


def christoffel_fd(M, p, h=1e-4, order=2):
    """Levi-Civita symbols from central differences of ``metric_at``.

    Independent of the closed forms in the factor classes; agrees with
    :func:`christoffel_lc` to ``O(h^order)``.
    """
    p = M.canonicalize(p)
    steps = M.step_sizes(h)
    M.check_stencil(stencil_points(p, steps, order))
    dg = central_difference(M.metric, p, steps, order)  # [a, i, j]
    ginv = np.linalg.inv(M.metric(p))
    # Gamma^l_ij = 1/2 g^lm (d_i g_mj + d_j g_mi - d_m g_ij)
    lowered = 0.5 * (
        np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg) - dg
    )
    return np.einsum("lm,mij->lij", ginv, lowered)


def quadrature_grid(M, resolution=None):
    """Product quadrature nodes and weights, with ``sum(weights) ~ vol(M)``.

    ``resolution`` is a pair, one entry per factor. A torus entry is an
    integer (per axis) or a tuple of per-axis counts; a sphere entry is
    ``n_theta`` or ``(n_theta, n_phi)``. Torus factors use the trapezoidal
    rule; spheres use Gauss-Legendre in ``cos(theta)`` times a uniform rule in
    ``phi``, which never places a node at a pole.
    """
    if resolution is None:
        resolution = (default_resolution(M.factor1), default_resolution(M.factor2))
    r1, r2 = resolution
    x1, w1 = M.factor1.quadrature(r1)
    x2, w2 = M.factor2.quadrature(r2)
    nodes = np.concatenate(
        [np.repeat(x1, len(x2), axis=0), np.tile(x2, (len(x1), 1))], axis=-1
    )
    weights = np.repeat(w1, len(w2)) * np.tile(w2, len(w1))
    return nodes, weights


def default_resolution(factor):
    return (12, 24) if factor.kind == "sphere" else 8


def sample_points(M, count, rng, margin=None):
    """Uniform chart-coordinate samples within the pole margin."""
    margin = M.pole_margin if margin is None else margin
    x1 = M.factor1.sample(rng, count, margin)
    x2 = M.factor2.sample(rng, count, margin)
    return np.concatenate([x1, x2], axis=-1)
