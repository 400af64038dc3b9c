#!/usr/bin/env python3
"""Regenerate the bundled compute-IaaS case-study fixtures."""

import json
from pathlib import Path

HERE = Path(__file__).parent

CAT = {"levels": [1, 10]}

SCHEMA = [
    # name, category, unit, kind, scale, direction, network_layer
    ("Accountability", "Accountability", "levels", "dynamic", CAT, "higher_better", False),
    ("vCPU Count", "Agility", "vCPUs (4-core)", "dynamic", "numeric", "higher_better", False),
    ("vCPU Speed", "Agility", "GHz", "dynamic", "numeric", "higher_better", False),
    ("Disk", "Agility", "TB", "dynamic", "numeric", "higher_better", False),
    ("Memory", "Agility", "GB", "dynamic", "numeric", "higher_better", False),
    ("vCPU Cost", "Cost", "$/h", "static", "numeric", "lower_better", False),
    ("Data In Cost", "Cost", "$/TB-month", "static", "numeric", "lower_better", False),
    ("Data Out Cost", "Cost", "$/TB-month", "static", "numeric", "lower_better", False),
    ("Storage Cost", "Cost", "$/TB-month", "static", "numeric", "lower_better", False),
    ("Support", "Assurance", "levels", "static", CAT, "higher_better", False),
    ("Availability", "Assurance", "%", "dynamic", "numeric", "higher_better", False),
    ("Security", "Security", "levels", "static", CAT, "higher_better", False),
    ("Feedback", "Satisfaction", "levels", "dynamic", CAT, "higher_better", False),
    ("Response Time", "Performance", "sec", "dynamic", "numeric", "lower_better", False),
    ("Down Time", "NetworkLayerQoS", "min", "dynamic", "numeric", "lower_better", True),
    ("Latency", "NetworkLayerQoS", "ms", "dynamic", "numeric", "lower_better", True),
    ("Throughput", "NetworkLayerQoS", "mb/s", "dynamic", "numeric", "higher_better", True),
]

PROVIDERS = [
    ("google-compute-engine", "Google Compute Engine"),
    ("storm-on-demand", "Storm on Demand"),
    ("century-link", "Century Link"),
    ("amazon-ec2", "Amazon EC2"),
    ("vultr-cloud", "Vultr Cloud"),
    ("ibm-soft-layer", "IBM Soft Layer"),
    ("linode", "Linode"),
    ("digital-ocean", "Digital Ocean"),
    ("microsoft-azure", "Microsoft Azure"),
    ("rackspace", "Rackspace"),
]

# Columns follow the provider order above.
VALUES = {
    "Accountability": [8, 4, 4, 9, 3, 7, 1, 6, 8, 2],
    "vCPU Count": [16, 8, 1, 8, 6, 4, 3, 8, 8, 8],
    "vCPU Speed": [2.6, 2.7, 3.6, 3.6, 3.8, 3.4, 2.3, 2.2, 3.5, 3.3],
    "Disk": [3, 0.89, 2, 1, 2, 1, 0.76, 2, 0.195, 1],
    "Memory": [14.4, 16, 16, 15, 24, 32, 16, 16, 32, 15],
    "vCPU Cost": [0.56, 0.48, 0.56, 0.39, 0.44, 0.69, 0.48, 0.23, 0.38, 0.51],
    "Data In Cost": [0, 8, 10, 0, 7, 8, 10, 9, 18.43, 15.2],
    "Data Out Cost": [70.6, 40, 51.2, 51.2, 22.86, 92.16, 51.2, 45.72, 18.43, 40],
    "Storage Cost": [40.96, 122.8, 40.96, 21.5, 102, 36.86, 80.86, 40.96, 40.96, 36.86],
    "Support": [8, 4, 7, 10, 5, 7, 3, 10, 8, 2],
    "Availability": [99.99, 100, 99.97, 99.99, 99.89, 99.97, 100, 99.99, 100, 99.95],
    "Security": [9, 8, 6, 10, 8, 10, 6, 8, 10, 2],
    "Feedback": [9, 7, 6, 10, 6, 9, 6, 8, 9, 7],
    "Response Time": [83.5, 90, 97, 52, 90, 100, 97, 85, 76, 57],
    "Down Time": [1.02, 0, 1.98, 0.51, 9.05, 7.5, 0, 1.53, 2.83, 2.83],
    "Latency": [31, 57, 31, 29, 28, 29, 28, 28, 32, 32],
    "Throughput": [20.24, 16.99, 24.99, 16.23, 10.11, 16.23, 8.12, 24.67, 23.11, 23.67],
}

LABELS = [3, 1, 3, 2, 1, 3, 1, 2, 2, 2]

# (attribute, target value, verbatim weight, effective weight)
REQUEST = [
    ("Accountability", 4, 1.0, 1.0),
    ("vCPU Count", 4, 0.4, 0.4),
    ("vCPU Speed", 3.6, 0.2, 0.2),
    ("Disk", 0.5, 0.3, 0.1),
    ("Memory", 16, 0.1, 0.3),
    ("vCPU Cost", 0.54, 0.6, 0.6),
    ("Data In Cost", 10, 0.1, 0.1),
    ("Data Out Cost", 51, 0.1, 0.1),
    ("Storage Cost", 50, 0.2, 0.2),
    ("Support", 8, 0.3, 0.3),
    ("Availability", 99.9, 0.7, 0.7),
    ("Security", 10, 1.0, 1.0),
    ("Feedback", 9, 1.0, 1.0),
]

BASELINE_REDUCT = [
    "Accountability",
    "vCPU Speed",
    "Memory",
    "vCPU Cost",
    "Data In Cost",
    "Data Out Cost",
    "Availability",
    "Response Time",
    "Latency",
    "Throughput",
]


def main() -> None:
    schema = [
        {
            "name": name,
            "category": category,
            "unit": unit,
            "kind": kind,
            "scale": scale,
            "direction": direction,
            "network_layer": network,
        }
        for name, category, unit, kind, scale, direction, network in SCHEMA
    ]
    providers = [
        {
            "id": pid,
            "name": display,
            "values": {name: VALUES[name][i] for name, *_ in SCHEMA},
        }
        for i, (pid, display) in enumerate(PROVIDERS)
    ]
    (HERE / "providers.json").write_text(
        json.dumps({"schema": schema, "providers": providers}, indent=2) + "\n"
    )
    (HERE / "labels.json").write_text(
        json.dumps({pid: lab for (pid, _), lab in zip(PROVIDERS, LABELS)}, indent=2) + "\n"
    )
    for fname, col in (("request.json", 2), ("request_effective.json", 3)):
        doc = {
            "user_id": "case-study-user",
            "requests": [
                {"attribute": attr, "value": value, "weight": row[col]}
                for row in REQUEST
                for attr, value in [row[:2]]
            ],
        }
        (HERE / fname).write_text(json.dumps(doc, indent=2) + "\n")
    (HERE / "baseline_reduct.json").write_text(
        json.dumps(BASELINE_REDUCT, indent=2) + "\n"
    )
    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()
