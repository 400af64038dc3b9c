"""Provider repository and dynamic-QoS reading backends.

The store persists the provider catalogue (schema, profiles, a monotonically
increasing version, and feedback history) as a single JSON file with atomic
replace-on-write. Fresh information systems are assembled per ranking
request with a fixed precedence: monitoring feed over dynamic readings over
the stored profile. Readings older than the TTL fall back to the stored
baseline with a warning.

Two backends stand in for live provider web services: ``replay`` serves a
timestamped CSV trace verbatim, ``synthetic`` derives a seeded random walk
around the stored baseline, clamped to the attribute's domain.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .errors import (
    BackendUnavailable,
    EmptyRegistry,
    ParseError,
    SchemaMismatch,
    UnknownAttribute,
    ValidationError,
)
from .model import (
    AttributeSpec,
    InformationSystem,
    ProviderProfile,
    information_system_from_json,
    profile_violations,
    schema_to_json_obj,
    validate_information_system,
)

log = logging.getLogger(__name__)

DEFAULT_TTL_MS = 300_000
_WALK_STEP_MS = 60_000
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class DynamicReading:
    provider_id: str
    attribute: str
    value: float
    timestamp_ms: int


@dataclass(frozen=True)
class FeedbackState:
    count: int = 0
    total: int = 0


class RegistryStore:
    """Single-writer provider catalogue with versioned snapshots."""

    def __init__(self, schema: Sequence[AttributeSpec], path: str | Path | None = None):
        self.schema = tuple(schema)
        self.path = Path(path) if path is not None else None
        self._providers: dict[str, ProviderProfile] = {}
        self._feedback: dict[str, FeedbackState] = {}
        self._version = 0
        self._lock = threading.Lock()

    @property
    def version(self) -> int:
        return self._version

    @property
    def provider_ids(self) -> tuple[str, ...]:
        return tuple(self._providers)

    def __len__(self) -> int:
        return len(self._providers)

    def get(self, provider_id: str) -> ProviderProfile | None:
        return self._providers.get(provider_id)

    def feedback_state(self, provider_id: str) -> FeedbackState:
        return self._feedback.get(provider_id, FeedbackState())

    def upsert_provider(self, profile: ProviderProfile) -> int:
        """Store or replace a profile after schema validation; bumps version."""
        problems = profile_violations(profile, self.schema)
        if problems:
            raise SchemaMismatch("; ".join(problems))
        with self._lock:
            self._providers[profile.id] = profile
            self._version += 1
            self._persist_locked()
            return self._version

    def set_value(self, provider_id: str, attribute: str, value: float,
                  feedback: FeedbackState | None = None) -> int:
        """Overwrite one stored attribute value (used by the feedback loop)."""
        profile = self._providers[provider_id]
        updated = ProviderProfile(
            id=profile.id,
            display_name=profile.display_name,
            values={**profile.values, attribute: value},
        )
        with self._lock:
            self._providers[provider_id] = updated
            if feedback is not None:
                self._feedback[provider_id] = feedback
            self._version += 1
            self._persist_locked()
            return self._version

    def to_information_system(self) -> InformationSystem:
        if not self._providers:
            raise EmptyRegistry("no providers registered")
        return InformationSystem(
            schema=self.schema, providers=tuple(self._providers.values())
        )

    # -- persistence --------------------------------------------------------

    def _persist_locked(self) -> None:
        if self.path is None:
            return
        doc = {
            "version": self._version,
            "schema": schema_to_json_obj(self.schema),
            "providers": [
                {"id": p.id, "name": p.display_name, "values": dict(p.values)}
                for p in self._providers.values()
            ],
            "feedback": {
                pid: {"count": st.count, "total": st.total}
                for pid, st in self._feedback.items()
            },
        }
        payload = json.dumps(doc, indent=2)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".store-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def save(self, path: str | Path | None = None) -> None:
        if path is not None:
            self.path = Path(path)
        if self.path is None:
            raise ValueError("store has no path")
        with self._lock:
            self._persist_locked()

    @classmethod
    def load(cls, path: str | Path) -> "RegistryStore":
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"store file is not valid JSON: {exc}") from exc
        is_ = information_system_from_json(
            {"schema": doc.get("schema", []), "providers": doc.get("providers", [])}
        )
        store = cls(schema=is_.schema, path=path)
        store._providers = {p.id: p for p in is_.providers}
        store._feedback = {
            pid: FeedbackState(count=int(st["count"]), total=int(st["total"]))
            for pid, st in doc.get("feedback", {}).items()
        }
        store._version = int(doc.get("version", 0))
        return store

    @classmethod
    def from_information_system(
        cls, is_: InformationSystem, path: str | Path | None = None
    ) -> "RegistryStore":
        store = cls(schema=is_.schema, path=path)
        for profile in is_.providers:
            store.upsert_provider(profile)
        return store


# ---------------------------------------------------------------------------
# Dynamic-QoS backends


class ReadingBackend(Protocol):
    def fetch(
        self, provider_ids: Sequence[str], attributes: Sequence[str], now_ms: int
    ) -> list[DynamicReading]: ...


class ReplayBackend:
    """Serves readings verbatim from a CSV trace.

    Trace format: ``timestamp_ms,provider_id,attribute,value`` with a header.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def fetch(self, provider_ids, attributes, now_ms=0):
        try:
            text = self.path.read_text()
        except OSError as exc:
            raise BackendUnavailable(f"cannot read trace {self.path}: {exc}") from exc
        wanted_p, wanted_a = set(provider_ids), set(attributes)
        readings = []
        for row in csv.DictReader(io.StringIO(text)):
            try:
                reading = DynamicReading(
                    provider_id=row["provider_id"],
                    attribute=row["attribute"],
                    value=float(row["value"]),
                    timestamp_ms=int(row["timestamp_ms"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendUnavailable(f"malformed trace row {row!r}: {exc}") from exc
            if reading.provider_id in wanted_p and reading.attribute in wanted_a:
                readings.append(reading)
        return readings


def _stable_key(provider_id: str, attribute: str) -> int:
    # process-independent, unlike the builtin hash
    digest = hashlib.blake2s(
        f"{provider_id}\x00{attribute}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


class SyntheticBackend:
    """Seeded random walk around each provider's stored baseline.

    Values derive purely from (seed, provider, attribute, now_ms // step),
    so identical queries return identical readings. Categorical attributes
    stay integer levels inside their range; numeric values stay non-negative
    and percentages stay at or below 100.
    """

    def __init__(self, store: RegistryStore, seed: int, step_ms: int = _WALK_STEP_MS):
        self.store = store
        self.seed = seed & _SEED_MASK
        self.step_ms = step_ms

    def _domain(self, spec: AttributeSpec):
        if spec.is_categorical:
            return float(spec.level_range[0]), float(spec.level_range[1])
        if spec.unit.strip() == "%":
            return 0.0, 100.0
        return 0.0, np.inf

    def fetch(self, provider_ids, attributes, now_ms=0):
        steps = max(0, int(now_ms) // self.step_ms)
        readings = []
        specs = {s.name: s for s in self.store.schema}
        for pid in provider_ids:
            profile = self.store.get(pid)
            if profile is None:
                raise BackendUnavailable(f"provider {pid!r} not in registry")
            for attr in attributes:
                spec = specs[attr]
                baseline = profile.values[attr]
                rng = np.random.default_rng(
                    [self.seed, _stable_key(pid, attr), steps]
                )
                scale = 0.02 * (abs(baseline) + 1.0)
                value = baseline + float(rng.normal(0.0, scale)) * max(1, steps) ** 0.5
                lo, hi = self._domain(spec)
                value = min(max(value, lo), hi)
                if spec.is_categorical:
                    value = float(int(round(value)))
                readings.append(
                    DynamicReading(
                        provider_id=pid,
                        attribute=attr,
                        value=value,
                        timestamp_ms=int(now_ms),
                    )
                )
        return readings


def backend_from_config(config: str, store: RegistryStore):
    """Build a backend from ``replay:<path>`` or ``synthetic:<seed>``."""
    kind, _, arg = config.partition(":")
    if kind == "replay":
        return ReplayBackend(arg)
    if kind == "synthetic":
        try:
            seed = int(arg)
        except ValueError as exc:
            raise ValidationError(f"synthetic backend needs an integer seed: {arg!r}") from exc
        return SyntheticBackend(store, seed)
    raise ValidationError(f"unknown backend {config!r}")


def fetch_dynamic_readings(
    backend: ReadingBackend,
    provider_ids: Sequence[str],
    attributes: Sequence[str],
    schema: Sequence[AttributeSpec],
    now_ms: int = 0,
) -> list[DynamicReading]:
    """One reading per (provider, attribute) from the configured backend."""
    specs = {s.name: s for s in schema}
    for attr in attributes:
        spec = specs.get(attr)
        if spec is None:
            raise UnknownAttribute(f"attribute {attr!r} not in schema")
        if not spec.is_dynamic:
            raise UnknownAttribute(f"attribute {attr!r} is static, not served by backends")
    return backend.fetch(provider_ids, attributes, now_ms)


def build_information_system(
    store: RegistryStore,
    readings: Iterable[DynamicReading] = (),
    monitor_feed: Mapping[str, Mapping[str, float]] | None = None,
    now_ms: int | None = None,
    ttl_ms: int = DEFAULT_TTL_MS,
) -> InformationSystem:
    """Assemble a fresh information system from the store.

    Precedence is fixed: monitoring feed > dynamic readings > stored profile.
    With ``now_ms`` given, readings older than ``ttl_ms`` are dropped with a
    warning and the stored baseline stands.
    """
    base = store.to_information_system()
    overlay: dict[str, dict[str, tuple[int, float]]] = {}
    known = set(base.attribute_names)
    for reading in readings:
        if reading.provider_id not in store.provider_ids or reading.attribute not in known:
            log.warning("ignoring reading for unknown %s/%s",
                        reading.provider_id, reading.attribute)
            continue
        if now_ms is not None and now_ms - reading.timestamp_ms > ttl_ms:
            log.warning(
                "stale reading %s/%s (age %d ms > ttl %d ms), using stored baseline",
                reading.provider_id, reading.attribute,
                now_ms - reading.timestamp_ms, ttl_ms,
            )
            continue
        cell = overlay.setdefault(reading.provider_id, {})
        prior = cell.get(reading.attribute)
        if prior is None or reading.timestamp_ms >= prior[0]:
            cell[reading.attribute] = (reading.timestamp_ms, reading.value)

    providers = []
    for profile in base.providers:
        values = dict(profile.values)
        for attr, (_, value) in overlay.get(profile.id, {}).items():
            values[attr] = value
        if monitor_feed and profile.id in monitor_feed:
            for attr, value in monitor_feed[profile.id].items():
                if attr in known:
                    values[attr] = value
        providers.append(
            ProviderProfile(id=profile.id, display_name=profile.display_name, values=values)
        )
    assembled = InformationSystem(schema=base.schema, providers=tuple(providers))
    report = validate_information_system(assembled)
    if not report.ok:
        raise ValidationError("assembled system invalid: " + "; ".join(report.violations))
    return assembled
