"""Experiment configuration, builtin scenarios and the bound-verification runner.

A run builds the torsion from a Kunneth class (plus an optional exact
perturbation), measures the off-diagonal span at sampled points, ranks the
mixed blocks, and attaches a certificate suite (metricity, skewness of the
curvature endomorphisms, Bianchi with torsion, harmonicity of the catalog,
Christoffel convergence order).
"""

import copy
import logging
import time
from dataclasses import dataclass, field
from math import pi
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .connection import (
    bianchi_cyclic_check,
    curvature_at,
    metric_skewness,
    metricity_check,
    torsion_from_class,
)
from .forms import ExactPerturbation, harmonicity_residuals
from .geometry import (
    ChartDomainError,
    FlatTorus,
    ProductManifold,
    RoundSphere2,
    christoffel_fd,
    christoffel_lc,
    manifold_from_dict,
    quadrature_grid,
    sample_points,
)
from .holonomy import mixed_curvature_max, off_span_dimension
from .kunneth import KunnethClass, metric_independence_sweep, mixed_rank, project_form_to_class
from .tensor import DEFAULT_RANK_TOL

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

__all__ = [
    "SCHEMA_VERSION",
    "CERTIFICATE_THRESHOLDS",
    "ConfigError",
    "ExperimentConfig",
    "BoundReport",
    "SCENARIOS",
    "scenario",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_certificates",
    "run_sweep",
    "sweep_summary",
]

SCHEMA_VERSION = 1
MAX_RESAMPLES = 100

CERTIFICATE_THRESHOLDS = {
    "metricity": 1e-8,
    "skewness": 1e-6,
    "bianchi": 1e-5,
    "harmonic_d": 1e-6,
    "harmonic_delta": 1e-6,
}
CHRISTOFFEL_STEPS = (1e-2, 5e-3, 2.5e-3)
CHRISTOFFEL_SLOPE = (2.0, 0.1)
VARIANT_ALIASES = {
    "endo": "endomorphism",
    "endomorphism": "endomorphism",
    "vector": "vector",
    "both": "both",
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    name: str
    manifold: ProductManifold
    kclass: KunnethClass
    perturbation: Optional[dict] = None
    points: int = 20
    seed: int = 0
    explicit_points: Optional[list] = None
    rank_tol: float = DEFAULT_RANK_TOL
    fd_step: float = 1e-4
    quadrature: Optional[tuple] = None
    certificate_points: int = 30
    variant: str = "endomorphism"
    sweep: list = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in VARIANT_ALIASES:
            raise ConfigError(f"options.variant: unknown variant {self.variant!r}")
        self.variant = VARIANT_ALIASES[self.variant]
        for key in ("rank_tol", "fd_step"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"tolerances.{key}: must be positive")
        if self.points < 1 and not self.explicit_points:
            raise ConfigError("sampling.points: need at least one point")
        if self.certificate_points < 1:
            raise ConfigError("options.certificate_points: must be positive")
        try:
            self.kclass.validate(self.manifold)
        except ValueError as exc:
            raise ConfigError(f"class: {exc}") from exc
        if self.perturbation is not None:
            try:
                self.build_perturbation()
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"perturbation: {exc}") from exc

    def build_perturbation(self, manifold=None):
        if self.perturbation is None:
            return None
        d = self.perturbation
        return ExactPerturbation(
            manifold or self.manifold,
            float(d["amplitude"]),
            int(d["wave_axis"]),
            tuple(d["carrier"]),
            int(d.get("wavenumber", 1)),
        )

    def torsion(self):
        return torsion_from_class(self.manifold, self.kclass, self.build_perturbation())

    def with_metric(self, params):
        """Same de Rham class and perturbation under a rescaled product metric."""
        new = copy.copy(self)
        new.manifold = self.manifold.rescaled(
            params.get("radius"), float(params.get("period_scale", 1.0))
        )
        new.kclass = self.kclass.to_integral(self.manifold).to_orthonormal(new.manifold)
        new.sweep = []
        return new

    def to_dict(self):
        return {
            "name": self.name,
            "manifold": self.manifold.to_dict(),
            "class": self.kclass.to_dict(),
            "perturbation": dict(self.perturbation) if self.perturbation else None,
            "sampling": {
                "points": self.points,
                "seed": self.seed,
                "explicit": self.explicit_points,
            },
            "tolerances": {
                "rank": self.rank_tol,
                "fd_step": self.fd_step,
                "quadrature": _jsonable(self.quadrature),
            },
            "options": {
                "variant": self.variant,
                "certificate_points": self.certificate_points,
            },
            "sweep": [dict(p) for p in self.sweep],
        }


def _jsonable(obj):
    if isinstance(obj, (list, tuple)):
        return [_jsonable(o) for o in obj]
    return obj


def _sweep_params(section):
    radii = section.get("radii") or [None]
    scales = section.get("period_scales") or [1.0]
    return [{"radius": r, "period_scale": float(s)} for r in radii for s in scales]


def parse_config(data, name="config"):
    """Build an :class:`ExperimentConfig` from a parsed mapping."""
    try:
        manifold = manifold_from_dict(data["manifold"])
    except KeyError as exc:
        raise ConfigError(f"manifold: missing key {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"manifold: {exc}") from exc
    try:
        kclass = KunnethClass.from_dict(data.get("class", {}), manifold)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"class: {exc}") from exc
    sampling = data.get("sampling", {})
    tols = data.get("tolerances", {})
    options = data.get("options", {})
    quad = tols.get("quadrature")
    return ExperimentConfig(
        name=data.get("name", name),
        manifold=manifold,
        kclass=kclass,
        perturbation=data.get("perturbation"),
        points=int(sampling.get("points", 20)),
        seed=int(sampling.get("seed", 0)),
        explicit_points=sampling.get("explicit"),
        rank_tol=float(tols.get("rank", DEFAULT_RANK_TOL)),
        fd_step=float(tols.get("fd_step", 1e-4)),
        quadrature=tuple(quad) if quad is not None else None,
        certificate_points=int(options.get("certificate_points", 30)),
        variant=options.get("variant", "endomorphism"),
        sweep=_sweep_params(data["sweep"]) if "sweep" in data else [],
    )


def load_config(path):
    """Read a TOML experiment config; parse errors carry line and column."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return parse_config(data, name=path.stem)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _s2xt2():
    return ProductManifold(RoundSphere2(1.0), FlatTorus((2 * pi, 2 * pi)))


def _t3():
    return ProductManifold(FlatTorus((2 * pi, 2 * pi)), FlatTorus((2 * pi,)))


def _scenario_t3():
    M = _t3()
    return ExperimentConfig(
        "t3",
        M,
        KunnethClass.from_blocks(M, C21=[[1.0]]),
        sweep=_sweep_params({"period_scales": [1.0, 3.0]}),
    )


def _scenario_s2xt2():
    M = _s2xt2()
    return ExperimentConfig(
        "s2xt2",
        M,
        KunnethClass.from_blocks(M, C21=[[1.0, 1.0]]),
        sweep=_sweep_params({"radii": [0.5, 1.0, 2.0], "period_scales": [1.0, 3.0]}),
    )


def _scenario_s2xt2_perturbed():
    cfg = _scenario_s2xt2()
    cfg.name = "s2xt2-perturbed"
    # eta = 0.3 sin(x) vol_S2, so d eta = 0.3 cos(x) dx ^ vol_S2
    cfg.perturbation = {"amplitude": 0.3, "wave_axis": 2, "carrier": [0, 1], "wavenumber": 1}
    return cfg


def _scenario_lc_baseline():
    M = _s2xt2()
    return ExperimentConfig("lc-baseline", M, KunnethClass.zeros(M))


SCENARIOS = {
    "t3": (_scenario_t3, "flat T3 = T2 x S1 with torsion dx^dy^dz (mixed rank 1)"),
    "s2xt2": (_scenario_s2xt2, "S2 x T2 with harmonic torsion vol^dx + vol^dy"),
    "s2xt2-perturbed": (
        _scenario_s2xt2_perturbed,
        "s2xt2 plus the exact form d(0.3 sin(x) vol_S2)",
    ),
    "lc-baseline": (_scenario_lc_baseline, "S2 x T2 with zero torsion (Levi-Civita)"),
}


def scenario(name):
    try:
        return SCENARIOS[name][0]()
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}"
        ) from None


@dataclass
class BoundReport:
    """Outcome of one run; verdicts are derived from numbers stored here."""

    config: dict
    mixed_rank: dict
    projected_class: dict
    class_deviation: float
    points: list
    verdicts: dict
    certificates: dict
    sweep: list = field(default_factory=list)
    resampled: int = 0
    runtime_seconds: float = 0.0
    version: str = __version__
    schema_version: int = SCHEMA_VERSION
    error: Optional[str] = None

    @property
    def bound_holds(self):
        return bool(self.verdicts.get("bound_holds_rank", False))

    @property
    def certificates_pass(self):
        return bool(self.certificates.get("all_pass", False))

    def exit_code(self):
        if not self.bound_holds:
            return 1
        if not self.certificates_pass:
            return 2
        return 0

    def to_dict(self, include_runtime=False):
        d = {
            "schema_version": self.schema_version,
            "version": self.version,
            "config": self.config,
            "mixed_rank": self.mixed_rank,
            "projected_class": self.projected_class,
            "class_deviation": self.class_deviation,
            "points": self.points,
            "verdicts": self.verdicts,
            "certificates": self.certificates,
            "sweep": self.sweep,
            "resampled": self.resampled,
            "error": self.error,
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d


def _draw_points(cfg, rng, count):
    M = cfg.manifold
    return [M.canonicalize(p) for p in sample_points(M, count, rng)]


def _verdict_dims(point_entry, variant):
    if variant == "both":
        return min(point_entry["endomorphism"]["dimension"], point_entry["vector"]["dimension"])
    return point_entry[variant]["dimension"]


def _measure_point(cfg, T, p):
    R = curvature_at(cfg.manifold, T, p, cfg.fd_step)
    endo = off_span_dimension(cfg.manifold, T, p, cfg.rank_tol, "endomorphism", curvature=R)
    vec = off_span_dimension(cfg.manifold, T, p, cfg.rank_tol, "vector", curvature=R)
    return {
        "point": [float(c) for c in R.point],
        "endomorphism": endo.to_dict(),
        "vector": vec.to_dict(),
        "mixed_curvature_max": mixed_curvature_max(cfg.manifold, R),
        "endomorphism_bound_ok": endo.dimension <= cfg.manifold.n1 * cfg.manifold.n2,
    }


def _christoffel_order(M, points):
    gaps = []
    for h in CHRISTOFFEL_STEPS:
        gaps.append(
            max(float(np.max(np.abs(christoffel_fd(M, p, h) - christoffel_lc(M, p)))) for p in points)
        )
    gaps = np.asarray(gaps)
    if np.all(gaps < 1e-12):
        return {"gaps": gaps.tolist(), "steps": list(CHRISTOFFEL_STEPS), "slope": None,
                "pass": True, "note": "exact (flat metric)"}
    slope = float(np.polyfit(np.log(CHRISTOFFEL_STEPS), np.log(gaps), 1)[0])
    target, width = CHRISTOFFEL_SLOPE
    return {"gaps": gaps.tolist(), "steps": list(CHRISTOFFEL_STEPS), "slope": slope,
            "pass": abs(slope - target) <= width}


def run_certificates(cfg, T=None):
    """Certificate residuals at ``cfg.certificate_points`` seeded points."""
    M = cfg.manifold
    T = T if T is not None else cfg.torsion()
    rng = np.random.default_rng([cfg.seed, 1])
    pts = _draw_points(cfg, rng, cfg.certificate_points)
    h = cfg.fd_step
    metricity = max(metricity_check(M, T, p, h) for p in pts)
    skew = max(metric_skewness(M, curvature_at(M, T, p, h)) for p in pts)
    bianchi = max(bianchi_cyclic_check(M, T, p, h) for p in pts)
    d_res, delta_res = harmonicity_residuals(M, np.asarray(pts), h)
    values = {
        "metricity": metricity,
        "skewness": skew,
        "bianchi": bianchi,
        "harmonic_d": d_res,
        "harmonic_delta": delta_res,
    }
    out = {
        key: {"max": val, "threshold": CERTIFICATE_THRESHOLDS[key],
              "pass": val < CERTIFICATE_THRESHOLDS[key]}
        for key, val in values.items()
    }
    out["christoffel_order"] = _christoffel_order(M, pts)
    out["points"] = len(pts)
    out["fd_step"] = h
    out["all_pass"] = all(v["pass"] for v in out.values() if isinstance(v, dict))
    return out


def run_experiment(cfg, with_sweep=True):
    """Verify ``dim(off-diagonal span) >= mixed rank`` at every sampled point."""
    start = time.perf_counter()
    M = cfg.manifold
    T = cfg.torsion()
    rank = mixed_rank(cfg.kclass, cfg.rank_tol)
    projected = project_form_to_class(T.form, M, quadrature_grid(M, cfg.quadrature))
    deviation = projected.max_abs_difference(cfg.kclass.to_orthonormal(M))

    rng = np.random.default_rng(cfg.seed)
    resampled = 0
    entries = []
    if cfg.explicit_points:
        candidates = []
        for q in cfg.explicit_points:
            try:
                candidates.append(M.canonicalize(q))
            except ChartDomainError as exc:
                raise ConfigError(f"sampling.explicit: {exc}") from exc
    else:
        candidates = _draw_points(cfg, rng, cfg.points)
    for p in candidates:
        for _ in range(MAX_RESAMPLES + 1):
            try:
                entries.append(_measure_point(cfg, T, p))
                break
            except ChartDomainError as exc:
                if cfg.explicit_points:
                    raise ConfigError(f"sampling.explicit: {exc}") from exc
                resampled += 1
                log.warning("resampling point %s: %s", np.round(p, 6).tolist(), exc)
                p = _draw_points(cfg, rng, 1)[0]
        else:
            raise RuntimeError(f"gave up after {MAX_RESAMPLES} resamples")
    for idx, e in enumerate(entries):
        e["index"] = idx
        dim = _verdict_dims(e, cfg.variant)
        e["verdict_rank"] = dim >= rank.total
        e["verdict_component_count"] = dim >= rank.component_count

    dims = [_verdict_dims(e, cfg.variant) for e in entries]
    verdicts = {
        "variant": cfg.variant,
        "rank_total": rank.total,
        "component_count": rank.component_count,
        "min_dimension": min(dims),
        "max_dimension": max(dims),
        "bound_holds_rank": all(e["verdict_rank"] for e in entries),
        "bound_holds_component_count": all(e["verdict_component_count"] for e in entries),
        "endomorphism_dimension_within_block": all(e["endomorphism_bound_ok"] for e in entries),
        "class_preserved": deviation < 1e-6,
    }
    certificates = run_certificates(cfg, T)
    sweep = []
    if with_sweep and cfg.sweep:
        sweep = [
            r.to_dict()
            for r in metric_independence_sweep(
                cfg.kclass, M, cfg.sweep, cfg.rank_tol, cfg.quadrature
            )
        ]
    return BoundReport(
        config=cfg.to_dict(),
        mixed_rank=rank.to_dict(),
        projected_class=projected.to_dict(),
        class_deviation=deviation,
        points=entries,
        verdicts=verdicts,
        certificates=certificates,
        sweep=sweep,
        resampled=resampled,
        runtime_seconds=time.perf_counter() - start,
    )


def run_sweep(cfg):
    """One report per metric in ``cfg.sweep``; failures stay isolated."""
    if not cfg.sweep:
        raise ValueError("sweep parameters are empty")
    reports = []
    for params in cfg.sweep:
        try:
            report = run_experiment(cfg.with_metric(params), with_sweep=False)
        except Exception as exc:  # one broken metric must not abort the sweep
            log.error("sweep metric %s failed: %s", params, exc)
            report = BoundReport(
                config=cfg.to_dict(), mixed_rank={}, projected_class={},
                class_deviation=float("nan"), points=[], verdicts={},
                certificates={}, error=f"{type(exc).__name__}: {exc}",
            )
        report.config["metric"] = dict(params)
        reports.append(report)
    return reports


def sweep_summary(reports):
    ranks = [
        (r.mixed_rank.get("r21"), r.mixed_rank.get("r12"), r.mixed_rank.get("total"))
        for r in reports
    ]
    return {
        "metrics": len(reports),
        "rank_constant": len(set(ranks)) == 1 and None not in ranks[0],
        "ranks": [list(t) for t in ranks],
        "bound_holds_all": all(r.bound_holds for r in reports),
        "certificates_pass_all": all(r.certificates_pass for r in reports),
        "errors": sum(r.error is not None for r in reports),
    }
