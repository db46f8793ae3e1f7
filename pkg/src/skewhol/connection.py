"""Metric connections with totally skew torsion and their curvature.

``nabla^C = nabla^LC + K`` with contorsion ``K_{ijk} = T_{ijk} / 2``, where
the torsion 3-form is ``T_{ijk} = g(T(e_i, e_j), e_k)``. In coordinates

    Gamma^l_ij = Gamma(LC)^l_ij + 1/2 g^lm T_ijm,

so ``Gamma^l_ij - Gamma^l_ji = T^l_ij``. Curvature is built directly from
the total coefficients with ``R(e_i, e_j) e_k = R^l_kij e_l``::

    R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik
              + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik

The split into a Levi-Civita part, a part linear in ``nabla T`` and a
remainder quadratic in ``T`` is only used as a cross-check
(:func:`qt_residual`).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import central_difference, stencil_points
from .kunneth import class_form

__all__ = [
    "TorsionSpec",
    "ConnectionCoeffs",
    "CurvatureAtPoint",
    "torsion_from_class",
    "zero_torsion",
    "gamma_total",
    "connection_coeffs",
    "curvature_at",
    "levi_civita_curvature",
    "qt_residual",
    "torsion_derivative_term",
    "quadratic_torsion_term",
    "metricity_check",
    "bianchi_cyclic_check",
    "metric_skewness",
]


@dataclass(frozen=True)
class TorsionSpec:
    """A torsion 3-form on a product manifold."""

    form: object
    manifold: object

    def __post_init__(self):
        if self.form.degree != 3:
            raise ValueError(f"torsion must be a 3-form, got degree {self.form.degree}")

    def lowered(self, x):
        """``T_ijk`` on a coordinate batch."""
        return self.form.evaluate(x)

    def raised(self, x):
        """``T^l_ij = g^lm T_ijm`` on a coordinate batch."""
        ginv = np.linalg.inv(self.manifold.metric(x))
        return np.einsum("...lm,...ijm->...lij", ginv, self.lowered(x))

    def scaled(self, lam):
        return TorsionSpec(self.form.scaled(lam), self.manifold)


def torsion_from_class(M, cls, perturbation=None):
    """Torsion equal to the harmonic representative of ``cls``.

    An optional exact ``perturbation`` (``d eta``) is added; it leaves the
    cohomology class, and hence the calibration, unchanged.
    """
    return TorsionSpec(class_form(M, cls, perturbation), M)


def zero_torsion(M):
    from .forms import FormField

    return TorsionSpec(FormField.zero(M, 3), M)


def _contorsion(T, x, kind):
    lowered = T.lowered(x)
    if kind == "skew":
        K = 0.5 * lowered
    elif kind == "symmetric":
        # negative control: a fully symmetric, hence non-metric, difference tensor
        K = 0.5 * np.abs(lowered)
    else:
        raise ValueError(f"unknown contorsion kind {kind!r}")
    ginv = np.linalg.inv(T.manifold.metric(x))
    return np.einsum("...lm,...ijm->...lij", ginv, K)


def gamma_total(M, T, x, contorsion="skew"):
    """Connection coefficients ``Gamma^l_ij`` on a coordinate batch."""
    x = np.asarray(x, dtype=float)
    return M.christoffel(x) + _contorsion(T, x, contorsion)


def _gamma_derivative_analytic(M, T, x):
    g = M.metric(x)
    ginv = np.linalg.inv(g)
    dg = M.metric_derivative(x)
    dginv = -np.einsum("...lp,...apq,...qm->...alm", ginv, dg, ginv)
    lowered = T.lowered(x)
    dT = T.form.derivative(x)
    dK = 0.5 * (
        np.einsum("...alm,...ijm->...alij", dginv, lowered)
        + np.einsum("...lm,...aijm->...alij", ginv, dT)
    )
    return M.christoffel_derivative(x) + dK


@dataclass(frozen=True)
class ConnectionCoeffs:
    point: np.ndarray
    gamma_total: np.ndarray

    def torsion(self):
        """``Gamma^l_ij - Gamma^l_ji``."""
        return self.gamma_total - np.swapaxes(self.gamma_total, -1, -2)


def connection_coeffs(M, T, p, contorsion="skew"):
    p = M.canonicalize(p)
    return ConnectionCoeffs(p, gamma_total(M, T, p, contorsion))


@dataclass(frozen=True)
class CurvatureAtPoint:
    """``R[l, k, i, j] = R^l_kij`` at one chart point."""

    point: np.ndarray
    R: np.ndarray
    method: str = "analytic"
    h: float = 0.0

    def endomorphism(self, i, j):
        """Matrix of ``R(e_i, e_j)`` acting on column vectors."""
        return self.R[:, :, i, j]

    def lowered(self, g):
        """``R_lkij = g_lm R^m_kij``."""
        return np.einsum("lm,mkij->lkij", g, self.R)


def _riemann(gamma, dgamma):
    return (
        np.einsum("iljk->lkij", dgamma)
        - np.einsum("jlik->lkij", dgamma)
        + np.einsum("lim,mjk->lkij", gamma, gamma)
        - np.einsum("ljm,mik->lkij", gamma, gamma)
    )


def curvature_at(M, T, p, h=1e-4, method="analytic", order=2, contorsion="skew"):
    """Curvature of ``nabla^C`` at ``p``.

    ``method="analytic"`` differentiates the connection coefficients in closed
    form and falls back to finite differences when the torsion has no
    closed-form derivative; ``method="fd"`` always uses central differences
    of :func:`gamma_total` with step ``h`` (scaled per chart axis).
    """
    p = M.canonicalize(p)
    gamma = gamma_total(M, T, p, contorsion)
    if method == "analytic" and contorsion == "skew" and T.form.has_analytic_derivative:
        dgamma = _gamma_derivative_analytic(M, T, p)
        used, step = "analytic", 0.0
    elif method in ("analytic", "fd"):
        steps = M.step_sizes(h)
        M.check_stencil(stencil_points(p, steps, order))
        dgamma = central_difference(lambda x: gamma_total(M, T, x, contorsion), p, steps, order)
        used, step = "fd", h
    else:
        raise ValueError(f"unknown method {method!r}")
    return CurvatureAtPoint(p, _riemann(gamma, dgamma), used, step)


def levi_civita_curvature(M, p):
    return curvature_at(M, zero_torsion(M), p)


def _fd_steps(M, p, h, order):
    steps = M.step_sizes(h)
    M.check_stencil(stencil_points(p, steps, order))
    return steps


def _nabla_lc_torsion(M, T, p, h, order):
    """``(nabla^LC_i T)_abc`` from covariant finite differences of ``T``."""
    steps = _fd_steps(M, p, h, order)
    dT = central_difference(T.lowered, p, steps, order)
    Tp = T.lowered(p)
    G = M.christoffel(p)
    return (
        dT
        - np.einsum("mia,mbc->iabc", G, Tp)
        - np.einsum("mib,amc->iabc", G, Tp)
        - np.einsum("mic,abm->iabc", G, Tp)
    )


def torsion_derivative_term(M, T, p, h=1e-4, order=4):
    """The part of ``R^C - R^LC`` linear in ``nabla^LC T``, as ``L[l, k, i, j]``.

    ``L(e_i, e_j) e_k = 1/2 ((nabla_i T)(e_j, e_k, .)^# - (nabla_j T)(e_i, e_k, .)^#)``.
    """
    p = M.canonicalize(p)
    nT = _nabla_lc_torsion(M, T, p, h, order)
    ginv = np.linalg.inv(M.metric(p))
    return 0.5 * (
        np.einsum("lm,ijkm->lkij", ginv, nT) - np.einsum("lm,jikm->lkij", ginv, nT)
    )


def qt_residual(M, T, p, h=1e-4, order=4):
    """``Q_T = 4 (R^C - R^LC - L)`` with ``L`` from :func:`torsion_derivative_term`.

    What remains is quadratic in the torsion; :func:`quadratic_torsion_term`
    gives its closed form.
    """
    p = M.canonicalize(p)
    RC = curvature_at(M, T, p, h).R
    RLC = levi_civita_curvature(M, p).R
    return 4.0 * (RC - RLC - torsion_derivative_term(M, T, p, h, order))


def quadratic_torsion_term(M, T, p):
    """``T(X, T(Y, Z)) - T(Y, T(X, Z))`` as ``Q[l, k, i, j]``."""
    Tu = T.raised(M.canonicalize(p))
    return np.einsum("lim,mjk->lkij", Tu, Tu) - np.einsum("ljm,mik->lkij", Tu, Tu)


def metricity_check(M, T, p, h=1e-4, contorsion="skew", order=4):
    """Max-abs of ``(nabla_i g)_jk = d_i g_jk - Gamma^m_ij g_mk - Gamma^m_ik g_jm``."""
    p = M.canonicalize(p)
    steps = _fd_steps(M, p, h, order)
    dg = central_difference(M.metric, p, steps, order)
    g = M.metric(p)
    G = gamma_total(M, T, p, contorsion)
    res = dg - np.einsum("mij,mk->ijk", G, g) - np.einsum("mik,jm->ijk", G, g)
    return float(np.max(np.abs(res)))


def bianchi_cyclic_check(M, T, p, h=1e-4, order=4, method="analytic"):
    """Residual of the first Bianchi identity with torsion.

    Sums ``R(X,Y)Z - T(T(X,Y),Z) - (nabla^C_X T)(Y,Z)`` cyclically over
    coordinate triples; ``nabla^C T`` comes from finite differences.
    """
    p = M.canonicalize(p)
    R = curvature_at(M, T, p, h, method=method).R
    steps = _fd_steps(M, p, h, order)
    Tu = T.raised(p)
    dTu = central_difference(T.raised, p, steps, order)  # [i, l, j, k]
    G = gamma_total(M, T, p)
    nablaT = (
        dTu
        + np.einsum("lim,mjk->iljk", G, Tu)
        - np.einsum("mij,lmk->iljk", G, Tu)
        - np.einsum("mik,ljm->iljk", G, Tu)
    )
    S = (
        np.einsum("lkij->lijk", R)
        - np.einsum("mij,lmk->lijk", Tu, Tu)
        - np.einsum("iljk->lijk", nablaT)
    )
    cyc = S + np.einsum("ljki->lijk", S) + np.einsum("lkij->lijk", S)
    return float(np.max(np.abs(cyc)))


def metric_skewness(M, curvature):
    """Max-abs of ``R_lkij + R_klij``: zero when every ``R(e_i,e_j)`` is g-skew."""
    g = M.metric(curvature.point)
    low = curvature.lowered(g)
    return float(np.max(np.abs(low + np.swapaxes(low, 0, 1))))
