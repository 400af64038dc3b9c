"""Broker orchestration: end-to-end ranking, simulated execution, monitoring.

The pipeline assembles a fresh information system, derives decision labels
(injected, or clustered), reduces the search space through the best reduct,
and ranks by weighted Euclidean distance. A broker session then snapshots an
SLA for the selected provider, executes tasks on a simulated time-shared
(egalitarian processor sharing) scheduler, logs observations against the SLA,
and feeds monitoring aggregates and user feedback into the next ranking
round. Everything runs on a simulated microsecond clock and fixed seeds;
wall-clock time is only measured inside the benchmark.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import ClusterConfig, attach_decision, kmeans
from .errors import (
    NotRanked,
    OutOfRange,
    UnknownProvider,
    ValidationError,
)
from .model import (
    DecisionSystem,
    DefinitionDocument,
    InformationSystem,
    LOWER_BETTER,
    definition_document_to_json,
    min_max_normalize,
    validate_definition_document,
)
from .ranking import (
    RankedEntry,
    WeightTable,
    WeightedTable,
    assign_weights,
    build_weighted_table,
    rank_providers,
)
from .reducts import (
    Reduct,
    ReductConfig,
    build_clause_set,
    enumerate_all_reducts,
    project_to_rds,
    select_best_reduct,
)
from .registry import RegistryStore, build_information_system, fetch_dynamic_readings
from . import catalog

_SEED_MASK = (1 << 64) - 1

# dynamic attributes observed by the execution monitor when present
_MONITORED = ("vCPU Speed", "Availability", "Down Time", "Latency", "Throughput")


# ---------------------------------------------------------------------------
# Ranking pipeline


@dataclass(frozen=True)
class PipelineOptions:
    alpha: float = 0.15
    cluster: ClusterConfig = ClusterConfig()
    labels: Mapping[str, int] | None = None  # injected decision labels
    reduct: frozenset[str] | None = None  # injected reduct attribute set
    max_attributes: int = 24

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha out of [0,1]: {self.alpha}")


@dataclass(frozen=True)
class PipelineResult:
    entries: tuple[RankedEntry, ...]
    labels: Mapping[str, int]
    chosen_reduct: Reduct
    reduct_count: int | None  # None when the reduct was injected
    rds_attributes: tuple[str, ...]
    is_attribute_count: int
    weight_table: WeightTable
    weighted_table: WeightedTable

    @property
    def reduction_pct(self) -> float:
        """Search-space reduction from the full system to the reduced one."""
        return (1.0 - len(self.rds_attributes) / self.is_attribute_count) * 100.0


def run_ranking_pipeline(
    is_: InformationSystem,
    request: DefinitionDocument,
    options: PipelineOptions = PipelineOptions(),
) -> PipelineResult:
    """Full ranking pass over an assembled information system."""
    validate_definition_document(request, is_.schema)

    if options.labels is not None:
        missing = [pid for pid in is_.provider_ids if pid not in options.labels]
        if missing:
            raise ValidationError(f"injected labels missing provider(s): {missing}")
        labels = {pid: int(options.labels[pid]) for pid in is_.provider_ids}
        ds = DecisionSystem(base=is_, labels=labels)
    else:
        assignment = kmeans(min_max_normalize(is_), options.cluster)
        ds = attach_decision(is_, assignment)

    if options.reduct is not None:
        unknown = set(options.reduct) - set(is_.attribute_names)
        if unknown:
            raise ValidationError(f"injected reduct names unknown attributes: {sorted(unknown)}")
        chosen = Reduct(frozenset(options.reduct))
        reduct_count = None
    else:
        cs = build_clause_set(ds, ReductConfig(alpha=options.alpha))
        reducts = enumerate_all_reducts(cs, options.max_attributes)
        chosen = select_best_reduct(reducts, request, is_.schema)
        reduct_count = len(reducts)

    rds = project_to_rds(ds, chosen)
    weights = assign_weights(rds, request)
    table = build_weighted_table(rds, weights, request)
    entries = tuple(rank_providers(table))
    return PipelineResult(
        entries=entries,
        labels=dict(ds.labels),
        chosen_reduct=chosen,
        reduct_count=reduct_count,
        rds_attributes=rds.base.attribute_names,
        is_attribute_count=len(is_.schema),
        weight_table=weights,
        weighted_table=table,
    )


# ---------------------------------------------------------------------------
# Simulated execution


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    hosts_per_provider: int = 50
    task_time_range: tuple[float, float] = (0.1, 1.0)  # milliseconds
    tasks_per_request: int = 100
    scheduler: str = "time_shared"

    def __post_init__(self):
        lo, hi = self.task_time_range
        if not lo < hi:
            raise ValidationError("task_time_range lo must be < hi")
        if self.hosts_per_provider < 1:
            raise ValidationError("hosts_per_provider must be >= 1")


@dataclass(frozen=True)
class SlaRecord:
    sla_id: str
    user_id: str
    provider_id: str
    agreed: Mapping[str, float]
    created_at_us: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "sla_id": self.sla_id,
                "user_id": self.user_id,
                "provider_id": self.provider_id,
                "agreed": dict(self.agreed),
                "created_at_us": self.created_at_us,
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class MonitoringEntry:
    timestamp_us: int
    provider_id: str
    attribute: str
    value: float
    violation: bool


@dataclass
class MonitoringLog:
    entries: list[MonitoringEntry] = dataclasses.field(default_factory=list)

    def extend(self, entries: Iterable[MonitoringEntry]) -> None:
        self.entries.extend(entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["timestamp_us", "provider_id", "attribute", "value", "violation"])
        for e in self.entries:
            writer.writerow(
                [e.timestamp_us, e.provider_id, e.attribute, repr(float(e.value)),
                 int(e.violation)]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MonitoringLog":
        entries = [
            MonitoringEntry(
                timestamp_us=int(row["timestamp_us"]),
                provider_id=row["provider_id"],
                attribute=row["attribute"],
                value=float(row["value"]),
                violation=bool(int(row["violation"])),
            )
            for row in csv.DictReader(io.StringIO(text))
        ]
        return cls(entries=entries)


def simulate_time_shared(demands_ms: Sequence[float], hosts: int):
    """Egalitarian processor sharing of tasks arriving together at t=0.

    Tasks go to hosts round-robin. Returns per-task completion times (ms)
    and per-host busy time; sharing is work-conserving, so each host's busy
    time equals the demand it received.
    """
    demands = np.asarray(demands_ms, dtype=float)
    completions = np.zeros(len(demands))
    busy = np.zeros(hosts)
    for h in range(hosts):
        idx = np.arange(len(demands))[np.arange(len(demands)) % hosts == h]
        if idx.size == 0:
            continue
        local = demands[idx]
        order = np.argsort(local, kind="stable")
        clock = 0.0
        previous = 0.0
        remaining = idx.size
        for pos in order:
            clock += (local[pos] - previous) * remaining
            completions[idx[pos]] = clock
            previous = local[pos]
            remaining -= 1
        busy[h] = clock
    return completions, busy


@dataclass(frozen=True)
class ProviderPerformance:
    mean_response_time: float | None
    mean_vcpu_speed: float | None
    downtime_minutes: float
    availability_pct: float | None
    violation_count: int

    def as_attribute_values(self) -> dict[str, float]:
        """Attribute overlay consumed by information-system assembly."""
        out: dict[str, float] = {}
        if self.mean_response_time is not None:
            out["Response Time"] = self.mean_response_time
        if self.mean_vcpu_speed is not None:
            out["vCPU Speed"] = self.mean_vcpu_speed
        return out


def aggregate_monitoring(log: MonitoringLog) -> dict[str, ProviderPerformance]:
    """Per-provider means/sums over the log window; empty log gives {}."""
    samples: dict[str, dict[str, list[float]]] = {}
    violations: dict[str, int] = {}
    for e in log.entries:
        samples.setdefault(e.provider_id, {}).setdefault(e.attribute, []).append(e.value)
        violations[e.provider_id] = violations.get(e.provider_id, 0) + int(e.violation)
    feed = {}
    for pid, per_attr in samples.items():
        rt = per_attr.get("Response Time")
        speed = per_attr.get("vCPU Speed")
        avail = per_attr.get("Availability")
        down = per_attr.get("Down Time", [])
        feed[pid] = ProviderPerformance(
            mean_response_time=float(np.mean(rt)) if rt else None,
            mean_vcpu_speed=float(np.mean(speed)) if speed else None,
            downtime_minutes=float(np.sum(down)),
            availability_pct=float(np.mean(avail)) if avail else None,
            violation_count=violations.get(pid, 0),
        )
    return feed


def record_feedback(store: RegistryStore, provider_id: str, level: int) -> int:
    """Fold a feedback level into the provider's profile.

    The stored Satisfaction level becomes the running mean of all received
    levels, rounded half-up; history is persisted with the store.
    """
    profile = store.get(provider_id)
    if profile is None:
        raise UnknownProvider(f"provider {provider_id!r} not registered")
    spec = next(s for s in store.schema if s.category == "Satisfaction")
    lo, hi = spec.level_range
    if not (isinstance(level, int) and lo <= level <= hi):
        raise OutOfRange(f"feedback level {level!r} outside [{lo}, {hi}]")
    state = store.feedback_state(provider_id)
    count, total = state.count + 1, state.total + level
    stored = int(np.floor(total / count + 0.5))  # round half up
    store.set_value(
        provider_id, spec.name, float(stored),
        feedback=type(state)(count=count, total=total),
    )
    return stored


def _violates(direction: str, observed: float, agreed: float) -> bool:
    if direction == LOWER_BETTER:
        return observed > agreed
    return observed < agreed


class Broker:
    """Stateful session: rank, select, execute, monitor, take feedback.

    All randomness derives from the sim seed and a per-execution counter, so
    a scenario replays identically for identical inputs.
    """

    def __init__(
        self,
        store: RegistryStore,
        pipeline: PipelineOptions = PipelineOptions(),
        sim: SimConfig = SimConfig(),
        backend=None,
        state_dir: str | Path | None = None,
        ttl_ms: int = 300_000,
    ):
        self.store = store
        self.pipeline = pipeline
        self.sim = sim
        self.backend = backend
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.ttl_ms = ttl_ms
        self.clock_us = 0
        self.log = MonitoringLog()
        self._sessions: dict[str, tuple[DefinitionDocument, PipelineResult, InformationSystem]] = {}
        self._executions = 0
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)

    # -- Algorithmic steps --------------------------------------------------

    def assemble_information_system(self) -> InformationSystem:
        readings = ()
        now_ms = self.clock_us // 1000
        if self.backend is not None:
            dynamic = [s.name for s in self.store.schema if s.is_dynamic]
            readings = fetch_dynamic_readings(
                self.backend, self.store.provider_ids, dynamic,
                self.store.schema, now_ms=now_ms,
            )
        feed = {
            pid: perf.as_attribute_values()
            for pid, perf in aggregate_monitoring(self.log).items()
        }
        feed = {pid: vals for pid, vals in feed.items() if vals}
        return build_information_system(
            self.store, readings=readings, monitor_feed=feed or None,
            now_ms=now_ms if (self.backend is not None or self.log.entries) else None,
            ttl_ms=self.ttl_ms,
        )

    def handle_ranking_request(self, doc: DefinitionDocument) -> PipelineResult:
        """Rank against a fresh system snapshot and remember the session."""
        is_ = self.assemble_information_system()
        result = run_ranking_pipeline(is_, doc, self.pipeline)
        self._sessions[doc.user_id] = (doc, result, is_)
        if self.state_dir is not None:
            requests_dir = self.state_dir / "requests"
            requests_dir.mkdir(exist_ok=True)
            (requests_dir / f"{doc.user_id}.json").write_text(
                definition_document_to_json(doc)
            )
        return result

    def execute_selection(
        self, user_id: str, provider_id: str, tasks: int | None = None
    ) -> tuple[SlaRecord, MonitoringLog]:
        """Snapshot an SLA and run the workload on the simulated scheduler."""
        session = self._sessions.get(user_id)
        if session is None:
            raise NotRanked(f"user {user_id!r} has no ranked list")
        doc, result, assembled = session
        if provider_id not in {e.provider_id for e in result.entries}:
            raise UnknownProvider(
                f"provider {provider_id!r} not in the latest ranked list for {user_id!r}"
            )
        row = next(p for p in assembled.providers if p.id == provider_id)
        sla = SlaRecord(
            sla_id=f"sla-{self._executions:06d}",
            user_id=user_id,
            provider_id=provider_id,
            agreed=dict(row.values),
            created_at_us=self.clock_us,
        )

        n_tasks = self.sim.tasks_per_request if tasks is None else int(tasks)
        rng = np.random.default_rng([self.sim.seed & _SEED_MASK, self._executions])
        lo, hi = self.sim.task_time_range
        demands = rng.uniform(lo, hi, size=n_tasks)
        completions, _busy = simulate_time_shared(demands, self.sim.hosts_per_provider)

        schema = {s.name: s for s in assembled.schema}
        agreed_rt = sla.agreed.get("Response Time")
        entries = []
        for completion_ms in sorted(float(c) for c in completions):
            observed_sec = completion_ms / 1000.0
            entries.append(
                MonitoringEntry(
                    timestamp_us=self.clock_us + int(round(completion_ms * 1000)),
                    provider_id=provider_id,
                    attribute="Response Time",
                    value=observed_sec,
                    violation=(
                        _violates(schema["Response Time"].direction, observed_sec, agreed_rt)
                        if agreed_rt is not None
                        else False
                    ),
                )
            )
        makespan_us = int(round(float(completions.max()) * 1000)) if n_tasks else 0
        end_us = self.clock_us + makespan_us
        for attr in _MONITORED:
            spec = schema.get(attr)
            if spec is None or attr not in sla.agreed:
                continue
            agreed = sla.agreed[attr]
            observed = agreed * (1.0 + float(rng.normal(0.0, 0.02)))
            if spec.unit.strip() == "%":
                observed = min(observed, 100.0)
            observed = max(observed, 0.0)
            if spec.is_categorical:
                lo_l, hi_l = spec.level_range
                observed = float(min(max(int(round(observed)), lo_l), hi_l))
            entries.append(
                MonitoringEntry(
                    timestamp_us=end_us,
                    provider_id=provider_id,
                    attribute=attr,
                    value=observed,
                    violation=_violates(spec.direction, observed, agreed),
                )
            )

        self.clock_us = end_us
        self._executions += 1
        self.log.extend(entries)
        if self.state_dir is not None:
            with open(self.state_dir / "sla_records.jsonl", "a") as fh:
                fh.write(sla.to_json() + "\n")
            (self.state_dir / "monitoring.csv").write_text(self.log.to_csv())
        return sla, MonitoringLog(entries=entries)

    def record_feedback(self, provider_id: str, level: int) -> int:
        return record_feedback(self.store, provider_id, level)


# ---------------------------------------------------------------------------
# End-to-end scenario (register -> rank -> select -> execute -> feedback -> re-rank)


@dataclass(frozen=True)
class ScenarioResult:
    first_ranking: PipelineResult
    sla: SlaRecord
    execution_log: MonitoringLog
    performance: Mapping[str, ProviderPerformance]
    feedback_stored: int | None
    second_ranking: PipelineResult

    def artifact_bytes(self) -> bytes:
        """Canonical serialization of everything the scenario produced."""
        from .ranking import ranked_list_to_json

        doc = {
            "first_ranking": json.loads(ranked_list_to_json(self.first_ranking.entries)),
            "sla": json.loads(self.sla.to_json()),
            "monitoring_csv": self.execution_log.to_csv(),
            "performance": {
                pid: dataclasses.asdict(perf)
                for pid, perf in sorted(self.performance.items())
            },
            "feedback_stored": self.feedback_stored,
            "second_ranking": json.loads(ranked_list_to_json(self.second_ranking.entries)),
        }
        return json.dumps(doc, sort_keys=True).encode()


def run_scenario(
    is_: InformationSystem,
    request: DefinitionDocument,
    pipeline: PipelineOptions = PipelineOptions(),
    sim: SimConfig = SimConfig(),
    select: str = "best",
    feedback_level: int | None = None,
    state_dir: str | Path | None = None,
    backend_config: str | None = None,
    ttl_ms: int = 300_000,
) -> ScenarioResult:
    """One full brokerage round against a fresh registry built from ``is_``."""
    from .registry import backend_from_config

    store_path = None
    if state_dir is not None:
        state_dir = Path(state_dir)
        state_dir.mkdir(parents=True, exist_ok=True)
        store_path = state_dir / "store.json"
    store = RegistryStore.from_information_system(is_, path=store_path)
    backend = backend_from_config(backend_config, store) if backend_config else None
    broker = Broker(store, pipeline=pipeline, sim=sim, backend=backend,
                    state_dir=state_dir, ttl_ms=ttl_ms)

    first = broker.handle_ranking_request(request)
    provider_id = first.entries[0].provider_id if select == "best" else select
    sla, log = broker.execute_selection(request.user_id, provider_id)
    stored = None
    if feedback_level is not None:
        stored = broker.record_feedback(provider_id, feedback_level)
    second = broker.handle_ranking_request(request)
    return ScenarioResult(
        first_ranking=first,
        sla=sla,
        execution_log=log,
        performance=aggregate_monitoring(broker.log),
        feedback_stored=stored,
        second_ranking=second,
    )


# ---------------------------------------------------------------------------
# Benchmark


@dataclass(frozen=True)
class BenchmarkConfig:
    seed: int = 0
    fixed_providers: int = 100
    request_counts: tuple[int, ...] = (1, 10, 100, 500, 1000, 2500, 5000)
    fixed_requests: int = 100
    provider_counts: tuple[int, ...] = (10, 50, 100, 500, 1000, 2500, 5000)
    alpha: float = 0.15
    k: int = 3
    nstart: int = 5
    sample_providers: int = 300  # clause-building sample above this many providers


@dataclass(frozen=True)
class BenchmarkRow:
    sweep: str
    x: int
    pipeline: str
    mean_ms: float
    p95_ms: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sweep", "x", "pipeline", "mean_ms", "p95_ms"])
        for r in self.rows:
            writer.writerow([r.sweep, r.x, r.pipeline, f"{r.mean_ms:.6f}", f"{r.p95_ms:.6f}"])
        return buf.getvalue()


def rank_stage(system: DecisionSystem | InformationSystem, request: DefinitionDocument):
    """The per-request ranking computation the benchmark times."""
    weights = assign_weights(system, request)
    table = build_weighted_table(system, weights, request)
    return rank_providers(table)


def prepare_reduced_system(
    is_: InformationSystem, config: BenchmarkConfig, request: DefinitionDocument
) -> DecisionSystem:
    """Cluster, reduce, and project a synthetic system (untimed benchmark prep).

    Above ``sample_providers`` providers the clause set is built on a seeded
    provider sample; the derived attribute set is what the timing needs.
    """
    assignment = kmeans(
        min_max_normalize(is_),
        ClusterConfig(k=config.k, nstart=config.nstart, seed=config.seed),
    )
    ds = attach_decision(is_, assignment)
    clause_source = ds
    if len(is_.providers) > config.sample_providers:
        rng = np.random.default_rng([config.seed & _SEED_MASK, 13])
        chosen = rng.choice(
            len(is_.providers), size=config.sample_providers, replace=False
        )
        sampled = tuple(is_.providers[int(i)] for i in sorted(chosen))
        sub = InformationSystem(schema=is_.schema, providers=sampled)
        clause_source = DecisionSystem(
            base=sub, labels={p.id: ds.labels[p.id] for p in sampled}
        )
    cs = build_clause_set(clause_source, ReductConfig(alpha=config.alpha))
    reducts = enumerate_all_reducts(cs)
    best = select_best_reduct(reducts, request, is_.schema)
    return project_to_rds(ds, best)


def _measure(system, requests) -> tuple[float, float]:
    times = []
    for request in requests:
        t0 = time.perf_counter()
        rank_stage(system, request)
        times.append((time.perf_counter() - t0) * 1000.0)
    return float(np.mean(times)), float(np.percentile(times, 95))


def run_benchmark(config: BenchmarkConfig = BenchmarkConfig()) -> BenchmarkReport:
    """Ranking-time sweeps over request count and provider count.

    The timed region is the per-request ranking stage; system assembly,
    clustering, and reduct search happen once per sweep point, untimed, for
    both pipelines. ``full`` ranks over every attribute, ``reduced`` over the
    best reduct plus network QoS.
    """
    rows = []
    points = [("requests", x, config.fixed_providers, x) for x in config.request_counts]
    points += [("providers", x, x, config.fixed_requests) for x in config.provider_counts]
    for sweep, x, n_providers, n_requests in points:
        is_ = catalog.synthetic_information_system(n_providers, config.seed)
        requests = [catalog.synthetic_request(config.seed, i) for i in range(n_requests)]
        reduced = prepare_reduced_system(is_, config, requests[0])
        for pipeline, system in (("full", is_), ("reduced", reduced)):
            mean_ms, p95_ms = _measure(system, requests)
            rows.append(BenchmarkRow(sweep, x, pipeline, mean_ms, p95_ms))
    return BenchmarkReport(rows=tuple(rows))
