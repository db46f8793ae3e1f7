"""Report serialization: canonical JSON, per-point CSV and a text summary."""

import csv
import io
import json
import math

__all__ = ["emit_report", "emit_sweep", "canonical_json", "FORMATS"]

FORMATS = ("json", "csv", "text")
FLOAT_DIGITS = 12


def _canonical(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.{FLOAT_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _canonical(obj.item())
    return obj


def canonical_json(data):
    """Sorted keys, 12 significant digits, no runtime-dependent fields."""
    return json.dumps(_canonical(data), sort_keys=True, indent=2) + "\n"


CSV_COLUMNS = [
    "index",
    "point",
    "dim_endomorphism",
    "dim_vector",
    "rank_total",
    "component_count",
    "verdict_rank",
    "verdict_component_count",
    "mixed_curvature_max",
]


def _csv_rows(report, prefix=()):
    rank = report.mixed_rank
    for e in report.points:
        yield list(prefix) + [
            e["index"],
            " ".join(f"{c:.{FLOAT_DIGITS}g}" for c in e["point"]),
            e["endomorphism"]["dimension"],
            e["vector"]["dimension"],
            rank["total"],
            rank["component_count"],
            int(e["verdict_rank"]),
            int(e["verdict_component_count"]),
            f"{e['mixed_curvature_max']:.{FLOAT_DIGITS}g}",
        ]


def _csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(_csv_rows(report))
    return buf.getvalue()


def _yes(flag):
    return "yes" if flag else "no"


def _text(report):
    if report.error:
        return f"run failed: {report.error}\n"
    cfg = report.config
    rank = report.mixed_rank
    v = report.verdicts
    c = report.certificates
    lines = [
        f"experiment: {cfg['name']}  (skewhol {report.version})",
        f"manifold: {cfg['manifold']['factor1']['name']} x {cfg['manifold']['factor2']['name']}",
        f"mixed rank: r21={rank['r21']} r12={rank['r12']} total={rank['total']}"
        f"  component count={rank['component_count']}  mixed={_yes(rank['is_mixed'])}",
        f"class recovered by L2 projection: max deviation {report.class_deviation:.3g}",
        f"points: {len(report.points)} (resampled {report.resampled}), span variant for verdict: {v['variant']}",
    ]
    dims_e = sorted({e["endomorphism"]["dimension"] for e in report.points})
    dims_v = sorted({e["vector"]["dimension"] for e in report.points})
    lines.append(f"off-diagonal dimension: endomorphism {dims_e}, vector {dims_v}")
    lines.append(f"BOUND HOLDS (mixed rank): {_yes(v['bound_holds_rank'])}")
    lines.append(
        f"BOUND HOLDS (component count, informational): {_yes(v['bound_holds_component_count'])}"
    )
    lines.append("certificates:")
    for key in ("metricity", "skewness", "bianchi", "harmonic_d", "harmonic_delta"):
        entry = c[key]
        lines.append(
            f"  {key:<15} max {entry['max']:.3e}  < {entry['threshold']:.0e}  {'ok' if entry['pass'] else 'FAIL'}"
        )
    order = c["christoffel_order"]
    slope = "exact" if order["slope"] is None else f"slope {order['slope']:.3f}"
    lines.append(f"  {'christoffel':<15} {slope}  {'ok' if order['pass'] else 'FAIL'}")
    lines.append(f"CERTIFICATES PASS: {_yes(c['all_pass'])}")
    if report.sweep:
        totals = sorted({s["total"] for s in report.sweep})
        lines.append(f"metric sweep: {len(report.sweep)} metrics, rank totals {totals}")
    lines.append(f"runtime: {report.runtime_seconds:.2f} s")
    return "\n".join(lines) + "\n"


def emit_report(report, fmt="json"):
    """Serialize a :class:`BoundReport` to bytes."""
    if fmt == "json":
        return canonical_json(report.to_dict()).encode()
    if fmt == "csv":
        return _csv(report).encode()
    if fmt == "text":
        return _text(report).encode()
    raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")


def emit_sweep(reports, summary, fmt="json"):
    if fmt == "json":
        data = {"summary": summary, "reports": [r.to_dict() for r in reports]}
        return canonical_json(data).encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric_index"] + CSV_COLUMNS)
        for i, r in enumerate(reports):
            writer.writerows(_csv_rows(r, prefix=(i,)))
        return buf.getvalue().encode()
    if fmt == "text":
        parts = []
        for r in reports:
            parts.append(f"--- metric {r.config.get('metric')}\n" + _text(r))
        parts.append(
            f"SWEEP: rank constant {_yes(summary['rank_constant'])}, "
            f"bound holds under every metric {_yes(summary['bound_holds_all'])}\n"
        )
        return "".join(parts).encode()
    raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
