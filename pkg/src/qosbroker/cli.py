"""Command-line surface for the ranking pipeline and broker simulator.

Exit codes: 0 success, 2 validation error, 3 I/O error. Every error path
prints one machine-parsable line to stderr: ``error: <kind>: <reason>``.
Artifacts written with ``-o`` never embed timestamps; the human banner line
on stdout is suppressed with ``--no-banner``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import report
from .broker import (
    BenchmarkConfig,
    PipelineOptions,
    SimConfig,
    record_feedback,
    run_benchmark,
    run_ranking_pipeline,
    run_scenario,
)
from .clustering import ClusterConfig, kmeans, sse_curve
from .errors import (
    BackendUnavailable,
    ParseError,
    QosBrokerError,
    ValidationError,
)
from .model import (
    DefinitionDocument,
    information_system_from_json,
    min_max_normalize,
    parse_definition_document,
    validate_information_system,
)
from .ranking import ranked_list_to_csv, ranked_list_to_json
from .reducts import (
    ReductConfig,
    build_clause_set,
    enumerate_all_reducts,
    select_best_reduct,
)
from .registry import RegistryStore


# ---------------------------------------------------------------------------
# Small output helpers


def _banner(args, subcommand: str) -> None:
    if getattr(args, "no_banner", False):
        return
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    print(f"# qosbroker {subcommand} {stamp}")


def _print_table(headers, rows) -> None:
    cells = [[str(c) for c in row] for row in rows]
    widths = [
        max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
        for i, h in enumerate(headers)
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def _write_artifact(args, json_text: str, csv_text: str | None) -> None:
    fmt = args.format
    if args.output:
        payload = csv_text if fmt == "csv" and csv_text is not None else json_text
        Path(args.output).write_text(payload)
    elif fmt == "json":
        print(json_text)
    elif fmt == "csv" and csv_text is not None:
        print(csv_text, end="")


def _load_is(path: str, strict: bool = True):
    return information_system_from_json(Path(path).read_text(), strict=strict)


def _load_request(path: str, schema) -> DefinitionDocument:
    return parse_definition_document(Path(path).read_text(), schema)


def _load_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} file is not valid JSON: {exc}") from exc


def _labels_from(args, is_) -> dict[str, int] | None:
    if getattr(args, "labels", None):
        raw = _load_json(args.labels, "labels")
        return {str(pid): int(label) for pid, label in raw.items()}
    return None


def _cluster_config(args) -> ClusterConfig:
    k = None if args.k in (None, "auto") else int(args.k)
    return ClusterConfig(
        k=k, k_max=args.k_max, nstart=args.nstart, seed=args.seed
    )


def _derive_labels(args, is_) -> dict[str, int]:
    injected = _labels_from(args, is_)
    if injected is not None:
        return injected
    assignment = kmeans(min_max_normalize(is_), _cluster_config(args))
    return dict(assignment.labels)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    is_ = _load_is(args.is_path, strict=False)
    result = validate_information_system(is_)
    _banner(args, "validate")
    if result.ok:
        print(f"ok: {len(is_.providers)} providers x {len(is_.schema)} attributes")
        return 0
    for violation in result.violations:
        print(f"violation: {violation}")
    return 2


def cmd_cluster(args) -> int:
    is_ = _load_is(args.is_path)
    norm = min_max_normalize(is_)
    config = _cluster_config(args)
    assignment = kmeans(norm, config)
    k = int(assignment.centroids.shape[0])
    _banner(args, "cluster")
    _print_table(
        ["provider", "label"],
        [(pid, assignment.labels[pid]) for pid in norm.provider_ids],
    )
    print(f"k = {k}  sse = {assignment.sse:.3f}")
    doc = {
        "k": k,
        "sse": round(assignment.sse, 6),
        "labels": {pid: assignment.labels[pid] for pid in norm.provider_ids},
    }
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["provider_id", "label"])
    for pid in norm.provider_ids:
        writer.writerow([pid, assignment.labels[pid]])
    _write_artifact(args, json.dumps(doc, indent=2), buf.getvalue())
    if args.plot:
        k_max = config.k_max if config.k_max is not None else min(10, len(is_.providers) - 1)
        curve = sse_curve(norm, config, k_max)
        report.plot_sse_curve(curve, k, args.plot)
    return 0


def _reduct_rows(reducts, request, schema):
    chosen = select_best_reduct(reducts, request, schema)
    dynamic = {s.name for s in schema if s.is_dynamic}
    requested = request.attributes
    rows = []
    for reduct in reducts:
        rows.append(
            {
                "attributes": list(reduct.sorted_names()),
                "size": len(reduct.attributes),
                "overlap": len(reduct.attributes & requested),
                "dynamic_count": len(reduct.attributes & dynamic),
                "chosen": reduct == chosen,
            }
        )
    rows.sort(key=lambda r: (-r["overlap"], -r["dynamic_count"], r["attributes"]))
    return rows


def cmd_reducts(args) -> int:
    is_ = _load_is(args.is_path)
    labels = _derive_labels(args, is_)
    from .model import DecisionSystem

    ds = DecisionSystem(base=is_, labels=labels)
    cs = build_clause_set(ds, ReductConfig(alpha=args.alpha))
    reducts = enumerate_all_reducts(cs)
    request = (
        _load_request(args.request, is_.schema)
        if args.request
        else DefinitionDocument(user_id="", requests=())
    )
    rows = _reduct_rows(reducts, request, is_.schema)
    _banner(args, "reducts")
    _print_table(
        ["size", "overlap", "dynamic", "chosen", "attributes"],
        [
            (r["size"], r["overlap"], r["dynamic_count"],
             "*" if r["chosen"] else "", ", ".join(r["attributes"]))
            for r in rows[: args.limit]
        ],
    )
    print(f"{len(rows)} reducts at alpha = {args.alpha}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["size", "overlap", "dynamic_count", "chosen", "attributes"])
    for r in rows:
        writer.writerow(
            [r["size"], r["overlap"], r["dynamic_count"], int(r["chosen"]),
             "|".join(r["attributes"])]
        )
    _write_artifact(args, json.dumps(rows, indent=2), buf.getvalue())
    return 0


def cmd_rank(args) -> int:
    is_ = _load_is(args.is_path)
    request = _load_request(args.request, is_.schema)
    reduct = None
    if args.reduct:
        reduct = frozenset(str(n) for n in _load_json(args.reduct, "reduct"))
    options = PipelineOptions(
        alpha=args.alpha,
        cluster=_cluster_config(args),
        labels=_labels_from(args, is_),
        reduct=reduct,
    )
    result = run_ranking_pipeline(is_, request, options)
    _banner(args, "rank")
    _print_table(
        ["rank", "provider", "score", "tiebreak"],
        [
            (e.rank, e.display_name, f"{e.score:.3f}", "|".join(e.tiebreak_trail))
            for e in result.entries
        ],
    )
    if args.explain:
        print()
        print(f"attributes: {result.is_attribute_count} -> {len(result.rds_attributes)} "
              f"(reduction {result.reduction_pct:.2f}%)")
        if result.reduct_count is not None:
            print(f"reducts found: {result.reduct_count}")
        print("chosen reduct: " + ", ".join(result.chosen_reduct.sorted_names()))
        weight_rows = []
        for name in result.rds_attributes:
            entry = result.weight_table.entries[name]
            weight_rows.append(
                (
                    name,
                    f"{entry.system_weight:.3f}",
                    "-" if entry.user_weight is None else f"{entry.user_weight:.3f}",
                    f"{entry.combined:.3f}",
                )
            )
        print()
        _print_table(["attribute", "system_w", "user_w", "combined"], weight_rows)
        print()
        targets = result.weighted_table.targets
        rows = result.weighted_table.rows
        contrib_rows = [
            (
                e.display_name,
                *(
                    f"{(rows[e.provider_id][a] - targets[a]) ** 2:.3f}"
                    for a in result.rds_attributes
                ),
            )
            for e in result.entries
        ]
        _print_table(["provider", *result.rds_attributes], contrib_rows)

    json_doc = json.loads(ranked_list_to_json(result.entries))
    if args.explain:
        json_doc = {
            "ranking": json_doc,
            "reduction_pct": round(result.reduction_pct, 6),
            "reduct_count": result.reduct_count,
            "chosen_reduct": list(result.chosen_reduct.sorted_names()),
            "weights": {
                name: {
                    "system_weight": round(entry.system_weight, 6),
                    "user_weight": entry.user_weight,
                    "combined": round(entry.combined, 6),
                }
                for name, entry in result.weight_table.entries.items()
            },
            "targets": {a: round(t, 6) for a, t in result.weighted_table.targets.items()},
            "contributions": {
                e.provider_id: {
                    a: round(
                        (result.weighted_table.rows[e.provider_id][a]
                         - result.weighted_table.targets[a]) ** 2, 6)
                    for a in result.rds_attributes
                }
                for e in result.entries
            },
        }
    _write_artifact(args, json.dumps(json_doc, indent=2), ranked_list_to_csv(result.entries))
    return 0


def _alpha_grid(step: float) -> list[float]:
    if not 0 < step <= 1:
        raise ValidationError(f"step out of (0,1]: {step}")
    grid = []
    i = 1
    while True:
        alpha = round(i * step, 10)
        if alpha > 1.0:
            break
        grid.append(alpha)
        i += 1
    return grid


def cmd_sweep_alpha(args) -> int:
    is_ = _load_is(args.is_path)
    labels = _derive_labels(args, is_)
    from .model import DecisionSystem

    ds = DecisionSystem(base=is_, labels=labels)
    dynamic = {s.name for s in is_.schema if s.is_dynamic}
    rows = []
    for alpha in _alpha_grid(args.step):
        cs = build_clause_set(ds, ReductConfig(alpha=alpha))
        reducts = enumerate_all_reducts(cs)
        by_size = sorted(reducts, key=lambda r: (len(r.attributes), r.sorted_names()))
        smallest, largest = by_size[0], by_size[-1]
        rows.append(
            {
                "alpha": alpha,
                "reduct_count": len(reducts),
                "min_size": len(smallest.attributes),
                "max_size": len(largest.attributes),
                "min_dynamic": len(smallest.attributes & dynamic),
                "min_static": len(smallest.attributes - dynamic),
                "max_dynamic": len(largest.attributes & dynamic),
                "max_static": len(largest.attributes - dynamic),
            }
        )
    _banner(args, "sweep-alpha")
    headers = ["alpha", "reduct_count", "min_size", "max_size",
               "min_dynamic", "min_static", "max_dynamic", "max_static"]
    _print_table(headers, [[r[h] for h in headers] for r in rows])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for r in rows:
        writer.writerow([r[h] for h in headers])
    _write_artifact(args, json.dumps(rows, indent=2), buf.getvalue())
    if args.plot:
        report.plot_alpha_sweep(rows, args.plot)
    return 0


def cmd_simulate(args) -> int:
    is_ = _load_is(args.is_path)
    request = _load_request(args.request, is_.schema)
    reduct = None
    if args.reduct:
        reduct = frozenset(str(n) for n in _load_json(args.reduct, "reduct"))
    options = PipelineOptions(
        alpha=args.alpha,
        cluster=_cluster_config(args),
        labels=_labels_from(args, is_),
        reduct=reduct,
    )
    sim = SimConfig(
        seed=args.seed,
        hosts_per_provider=args.hosts,
        tasks_per_request=args.tasks,
    )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scenario = run_scenario(
        is_,
        request,
        pipeline=options,
        sim=sim,
        select=args.select,
        feedback_level=args.feedback,
        state_dir=outdir,
        backend_config=args.backend,
        ttl_ms=args.ttl_ms,
    )
    (outdir / "ranked_first.json").write_text(
        ranked_list_to_json(scenario.first_ranking.entries)
    )
    (outdir / "ranked_second.json").write_text(
        ranked_list_to_json(scenario.second_ranking.entries)
    )
    perf_doc = {
        pid: {
            "mean_response_time": perf.mean_response_time,
            "mean_vcpu_speed": perf.mean_vcpu_speed,
            "downtime_minutes": perf.downtime_minutes,
            "availability_pct": perf.availability_pct,
            "violation_count": perf.violation_count,
        }
        for pid, perf in sorted(scenario.performance.items())
    }
    (outdir / "performance.json").write_text(json.dumps(perf_doc, indent=2))
    _banner(args, "simulate")
    selected = scenario.sla.provider_id
    perf = scenario.performance[selected]
    _print_table(
        ["field", "value"],
        [
            ("selected provider", selected),
            ("sla id", scenario.sla.sla_id),
            ("tasks executed", sim.tasks_per_request),
            ("mean response time (s)", f"{perf.mean_response_time:.6f}"),
            ("violations", perf.violation_count),
            ("feedback stored", scenario.feedback_stored),
            ("re-rank winner", scenario.second_ranking.entries[0].provider_id),
        ],
    )
    print(f"artifacts in {outdir}")
    return 0


def cmd_bench(args) -> int:
    config = BenchmarkConfig(
        seed=args.seed,
        request_counts=tuple(args.request_counts),
        provider_counts=tuple(args.provider_counts),
        fixed_providers=args.fixed_providers,
        fixed_requests=args.fixed_requests,
        alpha=args.alpha,
    )
    result = run_benchmark(config)
    _banner(args, "bench")
    _print_table(
        ["sweep", "x", "pipeline", "mean_ms", "p95_ms"],
        [
            (r.sweep, r.x, r.pipeline, f"{r.mean_ms:.3f}", f"{r.p95_ms:.3f}")
            for r in result.rows
        ],
    )
    json_doc = json.dumps(
        [
            {"sweep": r.sweep, "x": r.x, "pipeline": r.pipeline,
             "mean_ms": round(r.mean_ms, 6), "p95_ms": round(r.p95_ms, 6)}
            for r in result.rows
        ],
        indent=2,
    )
    _write_artifact(args, json_doc, result.to_csv())
    if args.plot:
        report.plot_benchmark(result.rows, args.plot)
    return 0


def cmd_feedback(args) -> int:
    store = RegistryStore.load(args.store)
    stored = record_feedback(store, args.provider, args.level)
    _banner(args, "feedback")
    print(f"{args.provider}: satisfaction level now {stored} "
          f"({store.feedback_state(args.provider).count} samples)")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}") from exc


def _add_common(sub, output=True):
    sub.add_argument("--format", choices=("json", "csv", "table"), default="table",
                     help="stdout format when -o is absent; artifact format otherwise")
    if output:
        sub.add_argument("-o", "--output", help="write the artifact to this path")
    sub.add_argument("--no-banner", action="store_true",
                     help="suppress the timestamp banner line")
    sub.add_argument("--seed", type=int, default=0, help="seed for all randomness")


def _add_cluster_flags(sub):
    sub.add_argument("--k", default="auto", help="cluster count, or 'auto' for the elbow rule")
    sub.add_argument("--k-max", dest="k_max", type=int, default=None,
                     help="largest k the elbow rule may consider")
    sub.add_argument("--nstart", type=int, default=25, help="k-means restarts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qosbroker",
        description="Rank cloud service providers against a QoS request, "
                    "with fuzzy-rough search-space reduction and a broker simulator.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("validate", help="check an information system file")
    p.add_argument("--is", dest="is_path", required=True, help="information system JSON")
    _add_common(p, output=False)
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("cluster", help="derive decision labels by k-means")
    p.add_argument("--is", dest="is_path", required=True)
    _add_cluster_flags(p)
    p.add_argument("--plot", help="render the SSE curve to this image path")
    _add_common(p)
    p.set_defaults(func=cmd_cluster)

    p = subs.add_parser("reducts", help="enumerate all reducts at one precision")
    p.add_argument("--is", dest="is_path", required=True)
    p.add_argument("--labels", help="JSON map provider id -> decision label")
    p.add_argument("--request", help="definition document JSON (for overlap metadata)")
    p.add_argument("--alpha", type=float, default=0.15, help="precision value in [0,1]")
    p.add_argument("--limit", type=int, default=20, help="table rows to print")
    _add_cluster_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_reducts)

    p = subs.add_parser("rank", help="run the full ranking pipeline")
    p.add_argument("--is", dest="is_path", required=True)
    p.add_argument("--request", required=True, help="definition document JSON")
    p.add_argument("--labels", help="inject decision labels (bypasses clustering)")
    p.add_argument("--reduct", help="inject the reduct (bypasses the all-reducts search)")
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--explain", action="store_true",
                   help="also emit reduct, weights, and per-attribute contributions")
    _add_cluster_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_rank)

    p = subs.add_parser("sweep-alpha", help="reduct statistics across the precision grid")
    p.add_argument("--is", dest="is_path", required=True)
    p.add_argument("--labels", help="inject decision labels (bypasses clustering)")
    p.add_argument("--step", type=float, default=0.05, help="grid step in (0,1]")
    p.add_argument("--plot", help="render count/size curves to this image path")
    _add_cluster_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep_alpha)

    p = subs.add_parser("simulate", help="rank, select, execute, and monitor one round")
    p.add_argument("--is", dest="is_path", required=True)
    p.add_argument("--request", required=True)
    p.add_argument("--labels")
    p.add_argument("--reduct")
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--select", default="best",
                   help="'best' or a provider id from the ranked list")
    p.add_argument("--tasks", type=int, default=100, help="tasks per execution")
    p.add_argument("--hosts", type=int, default=50, help="hosts per provider")
    p.add_argument("--feedback", type=int, default=None,
                   help="satisfaction level to record after execution")
    p.add_argument("--backend", default=None,
                   help="dynamic-QoS backend: replay:<path> or synthetic:<seed>")
    p.add_argument("--ttl-ms", dest="ttl_ms", type=int, default=300_000,
                   help="reading freshness TTL in simulated milliseconds")
    p.add_argument("--outdir", required=True, help="artifact directory")
    _add_cluster_flags(p)
    _add_common(p, output=False)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("bench", help="ranking-time sweeps on synthetic systems")
    p.add_argument("--request-counts", type=_int_list,
                   default=[1, 10, 100, 500, 1000, 2500, 5000])
    p.add_argument("--provider-counts", type=_int_list,
                   default=[10, 50, 100, 500, 1000, 2500, 5000])
    p.add_argument("--fixed-providers", type=int, default=100)
    p.add_argument("--fixed-requests", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--plot", help="render response-time curves to this image path")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = subs.add_parser("feedback", help="record a user satisfaction level")
    p.add_argument("--store", required=True, help="registry store JSON file")
    p.add_argument("--provider", required=True)
    p.add_argument("--level", type=int, required=True)
    _add_common(p, output=False)
    p.set_defaults(func=cmd_feedback)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except BackendUnavailable as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 3
    except QosBrokerError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
