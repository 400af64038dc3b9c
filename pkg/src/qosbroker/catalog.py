"""Compute-IaaS attribute catalogue and synthetic data generation.

The 17-attribute schema mirrors the bundled case-study dataset (a test keeps
the two in sync). Synthetic providers and requests draw seeded values from
per-attribute domains, for benchmarks and demos.
"""

from __future__ import annotations

import numpy as np

from .model import (
    CATEGORICAL,
    DYNAMIC,
    HIGHER_BETTER,
    LOWER_BETTER,
    NUMERIC,
    STATIC,
    AttributeSpec,
    DefinitionDocument,
    InformationSystem,
    ProviderProfile,
    QosRequest,
)

_SEED_MASK = (1 << 64) - 1

_SCHEMA_ROWS = (
    # name, category, unit, kind, scale, direction, network_layer
    ("Accountability", "Accountability", "levels", DYNAMIC, CATEGORICAL, HIGHER_BETTER, False),
    ("vCPU Count", "Agility", "vCPUs (4-core)", DYNAMIC, NUMERIC, HIGHER_BETTER, False),
    ("vCPU Speed", "Agility", "GHz", DYNAMIC, NUMERIC, HIGHER_BETTER, False),
    ("Disk", "Agility", "TB", DYNAMIC, NUMERIC, HIGHER_BETTER, False),
    ("Memory", "Agility", "GB", DYNAMIC, NUMERIC, HIGHER_BETTER, False),
    ("vCPU Cost", "Cost", "$/h", STATIC, NUMERIC, LOWER_BETTER, False),
    ("Data In Cost", "Cost", "$/TB-month", STATIC, NUMERIC, LOWER_BETTER, False),
    ("Data Out Cost", "Cost", "$/TB-month", STATIC, NUMERIC, LOWER_BETTER, False),
    ("Storage Cost", "Cost", "$/TB-month", STATIC, NUMERIC, LOWER_BETTER, False),
    ("Support", "Assurance", "levels", STATIC, CATEGORICAL, HIGHER_BETTER, False),
    ("Availability", "Assurance", "%", DYNAMIC, NUMERIC, HIGHER_BETTER, False),
    ("Security", "Security", "levels", STATIC, CATEGORICAL, HIGHER_BETTER, False),
    ("Feedback", "Satisfaction", "levels", DYNAMIC, CATEGORICAL, HIGHER_BETTER, False),
    ("Response Time", "Performance", "sec", DYNAMIC, NUMERIC, LOWER_BETTER, False),
    ("Down Time", "NetworkLayerQoS", "min", DYNAMIC, NUMERIC, LOWER_BETTER, True),
    ("Latency", "NetworkLayerQoS", "ms", DYNAMIC, NUMERIC, LOWER_BETTER, True),
    ("Throughput", "NetworkLayerQoS", "mb/s", DYNAMIC, NUMERIC, HIGHER_BETTER, True),
)

# numeric value ranges for synthetic generation, bracketing the case study
NUMERIC_DOMAINS = {
    "vCPU Count": (1.0, 32.0),
    "vCPU Speed": (2.0, 4.0),
    "Disk": (0.1, 4.0),
    "Memory": (8.0, 64.0),
    "vCPU Cost": (0.1, 1.0),
    "Data In Cost": (0.0, 20.0),
    "Data Out Cost": (10.0, 100.0),
    "Storage Cost": (20.0, 130.0),
    "Availability": (99.0, 100.0),
    "Response Time": (40.0, 120.0),
    "Down Time": (0.0, 10.0),
    "Latency": (20.0, 60.0),
    "Throughput": (5.0, 30.0),
}


def compute_iaas_schema() -> tuple[AttributeSpec, ...]:
    return tuple(
        AttributeSpec(
            name=name,
            category=category,
            unit=unit,
            kind=kind,
            scale=scale,
            direction=direction,
            network_layer=network,
        )
        for name, category, unit, kind, scale, direction, network in _SCHEMA_ROWS
    )


def synthetic_information_system(n_providers: int, seed: int) -> InformationSystem:
    """Seeded random providers over the compute-IaaS schema."""
    schema = compute_iaas_schema()
    rng = np.random.default_rng([seed & _SEED_MASK, n_providers])
    providers = []
    for i in range(n_providers):
        values = {}
        for spec in schema:
            if spec.is_categorical:
                lo, hi = spec.level_range
                values[spec.name] = float(rng.integers(lo, hi + 1))
            else:
                lo, hi = NUMERIC_DOMAINS[spec.name]
                values[spec.name] = float(rng.uniform(lo, hi))
        providers.append(
            ProviderProfile(id=f"csp-{i:05d}", display_name=f"CSP {i}", values=values)
        )
    return InformationSystem(schema=schema, providers=tuple(providers))


def synthetic_request(seed: int, index: int) -> DefinitionDocument:
    """Seeded random request: a few attributes per drawn category,
    weights normalized to 1 inside each category."""
    schema = compute_iaas_schema()
    rng = np.random.default_rng([seed & _SEED_MASK, 7919, index])
    by_category: dict[str, list[AttributeSpec]] = {}
    for spec in schema:
        if spec.network_layer:
            continue  # users do not request network-layer QoS
        by_category.setdefault(spec.category, []).append(spec)

    requests = []
    for category, specs in sorted(by_category.items()):
        if rng.random() < 0.4:
            continue
        take = int(rng.integers(1, len(specs) + 1))
        chosen = [specs[int(j)] for j in rng.choice(len(specs), size=take, replace=False)]
        raw_w = rng.uniform(0.1, 1.0, size=take)
        weights = raw_w / raw_w.sum()
        for spec, weight in zip(chosen, weights):
            if spec.is_categorical:
                lo, hi = spec.level_range
                value = float(rng.integers(lo, hi + 1))
            else:
                lo, hi = NUMERIC_DOMAINS[spec.name]
                value = float(rng.uniform(lo, hi))
            requests.append(QosRequest(spec.name, value, float(weight)))
    if not requests:
        # degenerate draw: request one attribute outright
        requests.append(QosRequest("Availability", 99.9, 1.0))
    return DefinitionDocument(user_id=f"synthetic-{index}", requests=tuple(requests))
