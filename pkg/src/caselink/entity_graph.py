"""Directed value flows between entities.

One edge per (source entity, target entity) pair, aggregating every
non-coinbase, non-CoinJoin transaction between them: total satoshi moved,
transaction count, first and last timestamp. Transaction fees belong to
no entity and are simply not edge value. Self-edges (change, internal
shuffles) are kept but excluded from neighborhood queries by default.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Mapping

from .coinjoin import CoinJoinVerdict
from .entities import EntityPartition
from .ledger import AttributionTag, LedgerStore

# An entity is service-like when any member address carries a service tag
# or when it is too large to be a private wallet.
SERVICE_SIZE_THRESHOLD = 10_000


@dataclass(frozen=True)
class EntityMeta:
    entity: str
    address_count: int
    labels: tuple[str, ...]
    categories: frozenset[str]
    is_service_tagged: bool

    @property
    def is_service_like(self) -> bool:
        return self.is_service_tagged or self.address_count > SERVICE_SIZE_THRESHOLD


@dataclass(frozen=True)
class EntityEdge:
    source: str
    target: str
    total_value: int
    tx_count: int
    first_ts: int
    last_ts: int

    @property
    def is_self(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class InflowEntry:
    """One incoming payment: a transaction crediting one target entity."""

    tx_id: str
    timestamp: int
    value: int
    entity: str


class EntityGraph:
    def __init__(
        self,
        ledger: LedgerStore,
        partition: EntityPartition,
        edges: dict[tuple[str, str], EntityEdge],
        meta: dict[str, EntityMeta],
        included_tx_ids: frozenset[str],
    ) -> None:
        self.ledger = ledger
        self.partition = partition
        self._edges = edges
        self._meta = meta
        self._included = included_tx_ids
        out: dict[str, dict[str, EntityEdge]] = {}
        for (source, target), edge in edges.items():
            out.setdefault(source, {})[target] = edge
        self._out = out

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edges(self) -> tuple[EntityEdge, ...]:
        return tuple(self._edges[key] for key in sorted(self._edges))

    def edge(self, source: str, target: str) -> EntityEdge | None:
        return self._edges.get((source, target))

    def includes_tx(self, tx_id: str) -> bool:
        return tx_id in self._included

    def meta(self, entity: str) -> EntityMeta:
        """Metadata for an entity; unknown ids read as untagged singletons.

        Lenient on purpose: case files may reference addresses the ledger
        has never seen, and those behave as one-address entities.
        """
        found = self._meta.get(entity)
        if found is not None:
            return found
        return EntityMeta(entity, 1, (), frozenset(), False)

    def is_known(self, entity: str) -> bool:
        return entity in self._meta

    def out_neighbors(
        self,
        entity: str,
        max_hops: int = 1,
        include_self_edges: bool = False,
    ) -> list[tuple[str, EntityEdge]]:
        """Entities reachable within max_hops, with the discovering edge.

        Deterministic order: breadth-first, neighbors sorted per hop.
        A sink entity yields an empty list; an unknown one is an error.
        """
        if entity not in self._meta:
            raise ValueError(f"unknown entity {entity!r}")
        if max_hops < 1:
            raise ValueError("max_hops must be at least 1")
        seen: set[str] = {entity}
        frontier = [entity]
        result: list[tuple[str, EntityEdge]] = []
        for _ in range(max_hops):
            next_frontier: list[str] = []
            for node in frontier:
                for target in sorted(self._out.get(node, ())):
                    if target == node and not include_self_edges:
                        continue
                    if target in seen:
                        continue
                    seen.add(target)
                    result.append((target, self._out[node][target]))
                    next_frontier.append(target)
            if not next_frontier:
                break
            frontier = next_frontier
        if include_self_edges:
            self_edge = self._out.get(entity, {}).get(entity)
            if self_edge is not None:
                result.insert(0, (entity, self_edge))
        return result

    def inflow(
        self,
        entities: Iterable[str],
        exclude_service_entities: bool = False,
    ) -> tuple[int, list[InflowEntry]]:
        """Total satoshi received by the entity set, with per-tx detail.

        Transactions originating inside the set are internal movements,
        not inflow, and are skipped entirely. With the exclusion flag,
        service-like members of the set receive nothing (their deposits
        are custodial, not attributable to the investigated actor).
        """
        requested = frozenset(entities)
        targets = {
            e for e in requested if not (exclude_service_entities and self.meta(e).is_service_like)
        }
        candidate_ids: set[str] = set()
        for entity in targets:
            for member in self.partition.members(entity):
                for tx in self.ledger.by_address(member):
                    if tx.tx_id in self._included:
                        candidate_ids.add(tx.tx_id)
        per_target: dict[tuple[str, str], InflowEntry] = {}
        for tx_id in candidate_ids:
            tx = self.ledger.get(tx_id)
            source = self.partition.entity_of(tx.inputs[0][0])
            if source in requested:
                continue
            credit: dict[str, int] = {}
            for addr, value in tx.outputs:
                target = self.partition.entity_of(addr)
                if target in targets:
                    credit[target] = credit.get(target, 0) + value
            for target, value in credit.items():
                per_target[(tx.tx_id, target)] = InflowEntry(tx.tx_id, tx.timestamp, value, target)
        entries = sorted(per_target.values(), key=lambda e: (e.timestamp, e.tx_id, e.entity))
        return sum(e.value for e in entries), entries

    def to_csv(self) -> bytes:
        """Deterministic dump sorted by (source, target)."""
        buffer = io.StringIO()
        buffer.write("source,target,total_value,tx_count,first_ts,last_ts\n")
        for key in sorted(self._edges):
            e = self._edges[key]
            buffer.write(
                f"{e.source},{e.target},{e.total_value},{e.tx_count},{e.first_ts},{e.last_ts}\n"
            )
        return buffer.getvalue().encode("utf-8")


def build_graph(
    ledger: LedgerStore,
    partition: EntityPartition,
    tags: Iterable[AttributionTag] = (),
    verdicts: Mapping[str, CoinJoinVerdict] | None = None,
) -> EntityGraph:
    """Aggregate the ledger into entity-level flows.

    Coinbase transactions have no source entity and are excluded.
    CoinJoin-flagged transactions (per verdicts) contribute no edges:
    their input attribution is exactly what the screen distrusts.
    """
    tags_by_address: dict[str, list[AttributionTag]] = {}
    for tag in tags:
        tags_by_address.setdefault(tag.address, []).append(tag)

    meta: dict[str, EntityMeta] = {}
    for entity in partition.entities():
        members = partition.members(entity)
        labels: list[str] = []
        categories: set[str] = set()
        service = False
        for member in members:
            for tag in tags_by_address.get(member, ()):
                labels.append(tag.label)
                categories.add(tag.category)
                service = service or tag.is_service or tag.category in ("exchange", "service")
        meta[entity] = EntityMeta(
            entity, len(members), tuple(sorted(set(labels))), frozenset(categories), service
        )

    accum: dict[tuple[str, str], list[int]] = {}
    included: set[str] = set()
    for tx in ledger:
        if tx.is_coinbase:
            continue
        verdict = verdicts.get(tx.tx_id) if verdicts is not None else None
        if verdict is not None and verdict.is_coinjoin:
            continue
        included.add(tx.tx_id)
        source = partition.entity_of(tx.inputs[0][0])
        credit: dict[str, int] = {}
        for addr, value in tx.outputs:
            credit_target = partition.entity_of(addr)
            credit[credit_target] = credit.get(credit_target, 0) + value
        for target, value in credit.items():
            slot = accum.get((source, target))
            if slot is None:
                accum[(source, target)] = [value, 1, tx.timestamp, tx.timestamp]
            else:
                slot[0] += value
                slot[1] += 1
                slot[2] = min(slot[2], tx.timestamp)
                slot[3] = max(slot[3], tx.timestamp)

    edges = {
        (source, target): EntityEdge(source, target, total, count, first, last)
        for (source, target), (total, count, first, last) in accum.items()
    }
    return EntityGraph(ledger, partition, edges, meta, frozenset(included))
