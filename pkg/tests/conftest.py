import json
from pathlib import Path

import pytest

from qosbroker import DecisionSystem, information_system_from_json, parse_definition_document
from qosbroker.reducts import Reduct

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "case_study"


@pytest.fixture(scope="session")
def case_study_is():
    return information_system_from_json((DATA_DIR / "providers.json").read_text())


@pytest.fixture(scope="session")
def case_study_labels():
    return json.loads((DATA_DIR / "labels.json").read_text())


@pytest.fixture(scope="session")
def case_study_ds(case_study_is, case_study_labels):
    return DecisionSystem(base=case_study_is, labels=case_study_labels)


@pytest.fixture(scope="session")
def case_study_request(case_study_is):
    return parse_definition_document(
        (DATA_DIR / "request.json").read_text(), case_study_is.schema
    )


@pytest.fixture(scope="session")
def effective_request(case_study_is):
    return parse_definition_document(
        (DATA_DIR / "request_effective.json").read_text(), case_study_is.schema
    )


@pytest.fixture(scope="session")
def baseline_reduct():
    return Reduct(frozenset(json.loads((DATA_DIR / "baseline_reduct.json").read_text())))
