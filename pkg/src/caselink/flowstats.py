"""Inflow series, payment-size distributions, and victim estimates.

Money arithmetic stays in integer satoshi; EUR appears only through the
daily reference rate of each transaction's UTC day and is carried as
Decimal. Series come in two scopes: "seed" counts only what annotated
addresses received, "expanded" counts their whole entities, so expanded
is always at least seed.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable

from .entities import EntityPartition
from .entity_graph import EntityGraph
from .ledger import COINBASE_ADDRESS, LedgerStore, RateTable

SCOPES = ("seed", "expanded")

_CENT = Decimal("0.01")


@dataclass(frozen=True)
class SeriesPoint:
    timestamp: int
    tx_id: str
    value_satoshi: int
    value_eur: Decimal
    cumulative_satoshi: int
    cumulative_eur: Decimal


@dataclass(frozen=True)
class InflowSeries:
    scope: str
    points: tuple[SeriesPoint, ...]

    @property
    def total_satoshi(self) -> int:
        return self.points[-1].cumulative_satoshi if self.points else 0

    @property
    def total_eur(self) -> Decimal:
        return self.points[-1].cumulative_eur if self.points else Decimal("0.00")

    def to_csv(self) -> bytes:
        buffer = io.StringIO()
        buffer.write("t,eur_cum,sat_cum\n")
        for p in self.points:
            buffer.write(f"{p.timestamp},{p.cumulative_eur},{p.cumulative_satoshi}\n")
        return buffer.getvalue().encode("utf-8")

    def payload(self) -> dict:
        return {
            "scope": self.scope,
            "points": [
                {
                    "t": p.timestamp,
                    "eur_cum": float(p.cumulative_eur),
                    "sat_cum": p.cumulative_satoshi,
                }
                for p in self.points
            ],
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.payload(), indent=2) + "\n").encode("utf-8")


def inflow_series(
    graph: EntityGraph,
    seeds: Iterable[str],
    scope: str,
    rates: RateTable,
    exclude_service: bool = True,
) -> InflowSeries:
    """Cumulative inflow to the seed addresses or their entities.

    Transactions spent by any seed entity are internal movements and are
    never inflow, which is what keeps seed <= expanded pointwise. With
    exclude_service, value landing on service-like entities (custodial
    deposits) is not attributed. Raises RateLookupError when the rate
    table starts after the first inflow.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    seed_set = frozenset(seeds)
    partition = graph.partition
    seed_entities = {partition.entity_of(addr) for addr in seed_set}
    if scope == "seed":
        targets = seed_set
    else:
        targets = frozenset(
            member for entity in seed_entities for member in partition.members(entity)
        )

    candidate_ids: set[str] = set()
    for addr in targets:
        for tx in graph.ledger.by_address(addr):
            if graph.includes_tx(tx.tx_id):
                candidate_ids.add(tx.tx_id)

    raw: list[tuple[int, str, int]] = []
    for tx_id in candidate_ids:
        tx = graph.ledger.get(tx_id)
        source = partition.entity_of(tx.inputs[0][0])
        if source in seed_entities:
            continue
        value = 0
        for addr, out_value in tx.outputs:
            if addr not in targets:
                continue
            if exclude_service and graph.meta(partition.entity_of(addr)).is_service_like:
                continue
            value += out_value
        if value > 0:
            raw.append((tx.timestamp, tx.tx_id, value))

    raw.sort()
    points: list[SeriesPoint] = []
    cumulative_satoshi = 0
    cumulative_eur = Decimal(0)
    for timestamp, tx_id, value in raw:
        eur = rates.eur_value(value, timestamp)
        cumulative_satoshi += value
        cumulative_eur += eur
        points.append(
            SeriesPoint(
                timestamp,
                tx_id,
                value,
                eur.quantize(_CENT),
                cumulative_satoshi,
                cumulative_eur.quantize(_CENT),
            )
        )
    return InflowSeries(scope, tuple(points))


DEFAULT_BUCKET_EDGES_EUR = (10, 100, 1_000, 10_000, 100_000, 1_000_000)


@dataclass(frozen=True)
class PaymentDistribution:
    bucket_edges: tuple[Decimal, ...]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def labels(self) -> tuple[str, ...]:
        # format(..., "f") keeps large edges out of scientific notation
        edges = [format(e.normalize(), "f") for e in self.bucket_edges]
        labels = [f"<{edges[0]}"]
        labels += [f"{a}-{b}" for a, b in zip(edges, edges[1:])]
        labels.append(f">={edges[-1]}")
        return tuple(labels)

    def payload(self) -> dict:
        return {
            "bucket_edges": [float(e) for e in self.bucket_edges],
            "labels": list(self.labels()),
            "counts": list(self.counts),
        }


def value_distribution(
    payments: Iterable[Decimal | float | int],
    bucket_edges: Iterable[Decimal | float | int] = DEFAULT_BUCKET_EDGES_EUR,
) -> PaymentDistribution:
    """Histogram of payment values over half-open buckets.

    k edges make k+1 buckets with open outer ends; every payment lands in
    exactly one bucket, so the counts always sum to the payment count.
    """
    edges = [Decimal(str(e)) for e in bucket_edges]
    if not edges:
        raise ValueError("at least one bucket edge required")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bucket edges must be strictly increasing")
    counts = [0] * (len(edges) + 1)
    for payment in payments:
        value = Decimal(str(payment)) if not isinstance(payment, Decimal) else payment
        idx = 0
        while idx < len(edges) and value >= edges[idx]:
            idx += 1
        counts[idx] += 1
    return PaymentDistribution(tuple(edges), tuple(counts))


@dataclass(frozen=True)
class VictimEstimate:
    unique_senders: int
    incoming_tx_count: int


def victim_estimate(
    seeds: Iterable[str],
    ledger: LedgerStore,
    partition: EntityPartition | None = None,
) -> VictimEstimate:
    """Distinct sending addresses and payment count into the seed set.

    Senders belonging to the seeds' own entities are internal and do not
    count (neither the sender nor the transaction); coinbase pays nobody.
    Without a partition only the literal seed addresses are internal.
    """
    seed_set = frozenset(seeds)
    if partition is not None:
        internal = partition.expand(seed_set).expanded_addresses | seed_set
    else:
        internal = seed_set
    senders: set[str] = set()
    tx_ids: set[str] = set()
    for seed in seed_set:
        for tx in ledger.by_address(seed):
            if tx.is_coinbase or tx.tx_id in tx_ids:
                continue
            if not any(addr in seed_set for addr in tx.output_addresses()):
                continue
            external = {
                addr
                for addr in tx.input_addresses()
                if addr not in internal and addr != COINBASE_ADDRESS
            }
            if not external:
                continue
            tx_ids.add(tx.tx_id)
            senders.update(external)
    return VictimEstimate(len(senders), len(tx_ids))
