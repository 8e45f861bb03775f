"""Shared fixtures: the hand-built 12-transaction corpus under tests/data.

The corpus is small enough to verify by hand and exercises every branch the
unit tests care about: a two-hop consolidation (t07), a service-tagged
exchange (X1), an equal-output mix (t11) and a coinbase reward (t12).
"""

from pathlib import Path

import pytest

from caselink.coinjoin import classify_ledger
from caselink.entities import build_partition
from caselink.entity_graph import build_graph
from caselink.ledger import (
    LedgerStore,
    RateTable,
    filter_active_cases,
    parse_cases,
    parse_rates,
    parse_tags,
    parse_transactions,
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def ledger() -> LedgerStore:
    with open(DATA_DIR / "transactions.jsonl", "rb") as fh:
        return LedgerStore(parse_transactions(fh, "jsonl"))


@pytest.fixture(scope="session")
def tags():
    with open(DATA_DIR / "tags.csv", "rb") as fh:
        return parse_tags(fh)


@pytest.fixture(scope="session")
def rates() -> RateTable:
    with open(DATA_DIR / "rates.csv", "rb") as fh:
        return parse_rates(fh)


@pytest.fixture(scope="session")
def all_cases():
    with open(DATA_DIR / "cases.csv", "rb") as fh:
        return parse_cases(fh)


@pytest.fixture(scope="session")
def active_cases(all_cases, ledger):
    cases, _ = filter_active_cases(all_cases, ledger)
    return cases


@pytest.fixture(scope="session")
def verdicts(ledger):
    return classify_ledger(ledger)


@pytest.fixture(scope="session")
def partition(ledger, verdicts):
    return build_partition(ledger, verdicts)


@pytest.fixture(scope="session")
def partition_unfiltered(ledger):
    return build_partition(ledger, None)


@pytest.fixture(scope="session")
def graph(ledger, partition, tags, verdicts):
    return build_graph(ledger, partition, tags=tags, verdicts=verdicts)
