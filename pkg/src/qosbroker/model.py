"""Domain model: QoS attribute schemas, provider matrices, and user requests.

An information system is a providers-by-attributes value matrix described by a
list of attribute specs. A decision system adds one crisp cluster label per
provider. A definition document is a user's QoS request: target value plus
weight per requested attribute, with weights summing to 1 inside each SMI
category that appears in the request.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

CATEGORIES = (
    "Accountability",
    "Agility",
    "Cost",
    "Assurance",
    "Security",
    "Satisfaction",
    "Performance",
    "NetworkLayerQoS",
)

STATIC = "static"
DYNAMIC = "dynamic"
NUMERIC = "numeric"
CATEGORICAL = "categorical"
LOWER_BETTER = "lower_better"
HIGHER_BETTER = "higher_better"

WEIGHT_SUM_TOLERANCE = 1e-9

# Fuzzy membership/discernibility degrees are plain floats in [0, 1].
FuzzyDegree = float


def _canon(value: str) -> str:
    return value.replace("_", "").replace("-", "").lower()


_CANON_CATEGORY = {_canon(c): c for c in CATEGORIES}


@dataclass(frozen=True)
class AttributeSpec:
    """Schema of one QoS attribute.

    ``scale`` is ``numeric`` or ``categorical``; categorical attributes take
    integer levels within ``level_range`` (default 1..10). ``network_layer``
    attributes are always dynamic.
    """

    name: str
    category: str
    unit: str = ""
    kind: str = DYNAMIC
    scale: str = NUMERIC
    level_range: tuple[int, int] = (1, 10)
    direction: str = HIGHER_BETTER
    network_layer: bool = False

    @property
    def is_categorical(self) -> bool:
        return self.scale == CATEGORICAL

    @property
    def is_dynamic(self) -> bool:
        return self.kind == DYNAMIC

    def check(self) -> list[str]:
        """Return invariant violations for this spec (empty when valid)."""
        problems = []
        if self.category not in CATEGORIES:
            problems.append(f"attribute {self.name!r}: unknown category {self.category!r}")
        if self.kind not in (STATIC, DYNAMIC):
            problems.append(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.scale not in (NUMERIC, CATEGORICAL):
            problems.append(f"attribute {self.name!r}: unknown scale {self.scale!r}")
        if self.direction not in (LOWER_BETTER, HIGHER_BETTER):
            problems.append(f"attribute {self.name!r}: unknown direction {self.direction!r}")
        if self.is_categorical and self.level_range[0] >= self.level_range[1]:
            problems.append(f"attribute {self.name!r}: level range lo must be < hi")
        if self.network_layer and self.kind != DYNAMIC:
            problems.append(f"attribute {self.name!r}: network-layer attributes must be dynamic")
        return problems


@dataclass(frozen=True)
class ProviderProfile:
    """One provider's value per schema attribute (categorical stored as its level)."""

    id: str
    display_name: str
    values: Mapping[str, float]

    def value(self, attribute: str) -> float:
        return self.values[attribute]


@dataclass(frozen=True)
class InformationSystem:
    """Rectangular providers-by-attributes matrix plus its schema."""

    schema: tuple[AttributeSpec, ...]
    providers: tuple[ProviderProfile, ...]

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.schema)

    @property
    def provider_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.providers)

    def spec(self, name: str) -> AttributeSpec:
        for s in self.schema:
            if s.name == name:
                return s
        raise KeyError(name)

    def matrix(self) -> np.ndarray:
        """Raw value matrix, one row per provider, columns in schema order."""
        return np.array(
            [[p.values[s.name] for s in self.schema] for p in self.providers],
            dtype=float,
        )


@dataclass(frozen=True)
class DecisionSystem:
    """Information system plus one crisp decision label per provider."""

    base: InformationSystem
    labels: Mapping[str, int]


@dataclass(frozen=True)
class QosRequest:
    attribute: str
    value: float
    weight: float


@dataclass(frozen=True)
class DefinitionDocument:
    """User QoS request: per-attribute target value and user weight."""

    user_id: str
    requests: tuple[QosRequest, ...]

    @property
    def attributes(self) -> frozenset[str]:
        return frozenset(r.attribute for r in self.requests)

    def weight(self, attribute: str) -> float:
        for r in self.requests:
            if r.attribute == attribute:
                return r.weight
        raise KeyError(attribute)

    def value(self, attribute: str) -> float:
        for r in self.requests:
            if r.attribute == attribute:
                return r.value
        raise KeyError(attribute)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class NormalizedMatrix:
    """Per-attribute min-max normalized values in [0, 1]."""

    values: np.ndarray
    attributes: tuple[str, ...]
    provider_ids: tuple[str, ...]

    def column(self, attribute: str) -> np.ndarray:
        return self.values[:, self.attributes.index(attribute)]


def profile_violations(profile: ProviderProfile, schema: Sequence[AttributeSpec]) -> list[str]:
    """Invariant violations of one profile against a schema."""
    violations: list[str] = []
    expected = {s.name for s in schema}
    have = set(profile.values)
    for missing in sorted(expected - have):
        violations.append(f"provider {profile.id!r}: missing value for {missing!r}")
    for extra in sorted(have - expected):
        violations.append(f"provider {profile.id!r}: value for unknown attribute {extra!r}")
    for spec in schema:
        if spec.name not in profile.values:
            continue
        v = profile.values[spec.name]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            violations.append(f"provider {profile.id!r}: non-finite value for {spec.name!r}")
            continue
        if spec.is_categorical:
            lo, hi = spec.level_range
            if v != int(v):
                violations.append(
                    f"provider {profile.id!r}: {spec.name!r} level {v} is not an integer"
                )
            elif not lo <= v <= hi:
                violations.append(
                    f"provider {profile.id!r}: {spec.name!r} level {int(v)} out of range [{lo},{hi}]"
                )
    return violations


def validate_information_system(is_: InformationSystem) -> ValidationReport:
    """Check every type invariant; returns a report instead of raising."""
    violations: list[str] = []
    if len(is_.schema) < 1:
        violations.append("schema has no attributes")
    if len(is_.providers) < 2:
        violations.append("fewer than 2 providers")

    names = [s.name for s in is_.schema]
    for name in sorted({n for n in names if names.count(n) > 1}):
        violations.append(f"duplicate attribute name {name!r}")
    for spec in is_.schema:
        violations.extend(spec.check())

    ids = [p.id for p in is_.providers]
    for pid in sorted({i for i in ids if ids.count(i) > 1}):
        violations.append(f"duplicate provider id {pid!r}")

    for p in is_.providers:
        violations.extend(profile_violations(p, is_.schema))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def min_max_normalize(is_: InformationSystem) -> NormalizedMatrix:
    """Map each attribute column onto [0, 1]; constant columns map to 0.0."""
    raw = is_.matrix()
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    out = np.zeros_like(raw)
    informative = span > 0
    out[:, informative] = (raw[:, informative] - lo[informative]) / span[informative]
    return NormalizedMatrix(out, is_.attribute_names, is_.provider_ids)


# ---------------------------------------------------------------------------
# JSON / CSV interchange


def _spec_to_json(spec: AttributeSpec) -> dict:
    scale: object = "numeric"
    if spec.is_categorical:
        scale = {"levels": list(spec.level_range)}
    return {
        "name": spec.name,
        "category": spec.category,
        "unit": spec.unit,
        "kind": spec.kind,
        "scale": scale,
        "direction": spec.direction,
        "network_layer": spec.network_layer,
    }


def _spec_from_json(obj: dict) -> AttributeSpec:
    try:
        name = obj["name"]
        category = obj["category"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"attribute spec missing field: {exc}") from exc
    category = _CANON_CATEGORY.get(_canon(str(category)), category)
    scale_obj = obj.get("scale", "numeric")
    if isinstance(scale_obj, Mapping) and "levels" in scale_obj:
        lo, hi = scale_obj["levels"]
        scale, levels = CATEGORICAL, (int(lo), int(hi))
    elif _canon(str(scale_obj)) in (CATEGORICAL, "categoricallevels"):
        scale, levels = CATEGORICAL, (1, 10)
    else:
        scale, levels = NUMERIC, (1, 10)
    kind = DYNAMIC if _canon(str(obj.get("kind", DYNAMIC))) == DYNAMIC else STATIC
    direction_raw = _canon(str(obj.get("direction", HIGHER_BETTER)))
    direction = LOWER_BETTER if direction_raw == "lowerbetter" else HIGHER_BETTER
    return AttributeSpec(
        name=str(name),
        category=str(category),
        unit=str(obj.get("unit", "")),
        kind=kind,
        scale=scale,
        level_range=levels,
        direction=direction,
        network_layer=bool(obj.get("network_layer", False)),
    )


def schema_to_json_obj(schema: Sequence[AttributeSpec]) -> list[dict]:
    return [_spec_to_json(s) for s in schema]


def information_system_to_json(is_: InformationSystem, **extra) -> str:
    doc = {
        "schema": [_spec_to_json(s) for s in is_.schema],
        "providers": [
            {"id": p.id, "name": p.display_name, "values": dict(p.values)}
            for p in is_.providers
        ],
    }
    doc.update(extra)
    return json.dumps(doc, indent=2)


def information_system_from_json(
    data: bytes | str | Mapping, strict: bool = True
) -> InformationSystem:
    """Parse an information system document.

    Raises ParseError on malformed input; with ``strict`` (the default),
    raises ValidationError when the parsed system violates an invariant.
    """
    if isinstance(data, (bytes, str)):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from exc
    else:
        obj = data
    if not isinstance(obj, Mapping) or "schema" not in obj or "providers" not in obj:
        raise ParseError("document must contain 'schema' and 'providers'")
    schema = tuple(_spec_from_json(s) for s in obj["schema"])
    providers = []
    for p in obj["providers"]:
        try:
            providers.append(
                ProviderProfile(
                    id=str(p["id"]),
                    display_name=str(p.get("name", p["id"])),
                    values={str(k): float(v) for k, v in p["values"].items()},
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad provider entry: {exc}") from exc
    is_ = InformationSystem(schema=schema, providers=tuple(providers))
    if strict:
        report = validate_information_system(is_)
        if not report.ok:
            raise ValidationError("; ".join(report.violations))
    return is_


def information_system_from_csv(csv_text: str, schema_json: bytes | str) -> InformationSystem:
    """CSV variant: first column attribute name, one column per provider id.

    The sidecar schema JSON is a list of attribute spec objects (optionally
    with a ``display_names`` map from provider id to name).
    """
    try:
        sidecar = json.loads(schema_json)
    except json.JSONDecodeError as exc:
        raise ParseError(f"schema sidecar is not valid JSON: {exc}") from exc
    if isinstance(sidecar, Mapping):
        schema_list = sidecar.get("schema", [])
        display = dict(sidecar.get("display_names", {}))
    else:
        schema_list, display = sidecar, {}
    schema = tuple(_spec_from_json(s) for s in schema_list)

    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows or len(rows[0]) < 2:
        raise ParseError("CSV needs a header row: attribute,<provider>,...")
    provider_ids = rows[0][1:]
    values: dict[str, dict[str, float]] = {pid: {} for pid in provider_ids}
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != len(provider_ids) + 1:
            raise ParseError(f"row for {row[0]!r} has {len(row) - 1} values, "
                             f"expected {len(provider_ids)}")
        attr = row[0]
        for pid, cell in zip(provider_ids, row[1:]):
            try:
                values[pid][attr] = float(cell)
            except ValueError as exc:
                raise ParseError(f"non-numeric cell for {attr!r}/{pid!r}: {cell!r}") from exc
    providers = tuple(
        ProviderProfile(id=pid, display_name=display.get(pid, pid), values=vals)
        for pid, vals in values.items()
    )
    is_ = InformationSystem(schema=schema, providers=providers)
    report = validate_information_system(is_)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    return is_


def information_system_to_csv(is_: InformationSystem) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["attribute", *is_.provider_ids])
    for s in is_.schema:
        writer.writerow([s.name, *(repr(p.values[s.name]) for p in is_.providers)])
    return buf.getvalue()


def parse_definition_document(
    data: bytes | str | Mapping, schema: Sequence[AttributeSpec]
) -> DefinitionDocument:
    """Parse a user request and validate it against the attribute schema.

    Checks: every requested attribute exists; weights are in (0, 1]; within
    each SMI category appearing in the request the weights sum to 1.
    """
    if isinstance(data, (bytes, str)):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from exc
    else:
        obj = data
    if not isinstance(obj, Mapping) or "requests" not in obj:
        raise ParseError("document must contain 'user_id' and 'requests'")
    requests = []
    for entry in obj["requests"]:
        try:
            requests.append(
                QosRequest(
                    attribute=str(entry["attribute"]),
                    value=float(entry["value"]),
                    weight=float(entry["weight"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad request entry: {exc}") from exc
    doc = DefinitionDocument(user_id=str(obj.get("user_id", "")), requests=tuple(requests))
    validate_definition_document(doc, schema)
    return doc


def validate_definition_document(
    doc: DefinitionDocument, schema: Sequence[AttributeSpec]
) -> None:
    """Raise ValidationError when the document violates a request invariant."""
    by_name = {s.name: s for s in schema}
    seen: set[str] = set()
    sums: dict[str, float] = {}
    for req in doc.requests:
        if req.attribute not in by_name:
            raise ValidationError(f"unknown attribute {req.attribute!r} in request")
        if req.attribute in seen:
            raise ValidationError(f"attribute {req.attribute!r} requested twice")
        seen.add(req.attribute)
        if not 0 < req.weight <= 1:
            raise ValidationError(
                f"weight for {req.attribute!r} must be in (0, 1], got {req.weight}"
            )
        cat = by_name[req.attribute].category
        sums[cat] = sums.get(cat, 0.0) + req.weight
    for cat, total in sums.items():
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValidationError(
                f"user weights for category {cat!r} sum to {total:.6f}, expected 1"
            )


def definition_document_to_json(doc: DefinitionDocument) -> str:
    return json.dumps(
        {
            "user_id": doc.user_id,
            "requests": [
                {"attribute": r.attribute, "value": r.value, "weight": r.weight}
                for r in doc.requests
            ],
        },
        indent=2,
    )
