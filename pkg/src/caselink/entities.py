"""Multi-input address clustering.

Addresses co-spent by one non-CoinJoin transaction are assumed to share a
controller; the transitive closure of that relation partitions the address
space into entities. Union-find with path compression and union by rank
over interned integer ids keeps this linear-ish in ledger size. The
finished partition is frozen: entity ids are stable (lexicographically
smallest member address) and safe to share across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .coinjoin import CoinJoinVerdict
from .ledger import LedgerStore


class _UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self) -> None:
        self.parent: list[int] = []
        self.rank: list[int] = []

    def add(self) -> int:
        idx = len(self.parent)
        self.parent.append(idx)
        self.rank.append(0)
        return idx

    def find(self, idx: int) -> int:
        root = idx
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[idx] != root:
            self.parent[idx], idx = root, self.parent[idx]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


@dataclass(frozen=True)
class ExpansionResult:
    seed_addresses: frozenset[str]
    entities: frozenset[str]
    expanded_addresses: frozenset[str]


class EntityPartition:
    """Frozen address partition; unknown addresses act as singletons."""

    def __init__(self, entity_of: Mapping[str, str]) -> None:
        members: dict[str, list[str]] = {}
        for address, entity in entity_of.items():
            members.setdefault(entity, []).append(address)
        self._entity_of = dict(entity_of)
        self._members = {e: tuple(sorted(addrs)) for e, addrs in members.items()}

    def __contains__(self, address: str) -> bool:
        return address in self._entity_of

    def __len__(self) -> int:
        return len(self._entity_of)

    @property
    def entity_count(self) -> int:
        return len(self._members)

    def entity_of(self, address: str) -> str:
        """Entity id for an address; an uninterned address is its own entity."""
        return self._entity_of.get(address, address)

    def members(self, entity: str) -> tuple[str, ...]:
        found = self._members.get(entity)
        if found is not None:
            return found
        if entity in self._entity_of:
            raise KeyError(f"{entity!r} is a member address, not an entity id")
        return (entity,)

    def member_count(self, entity: str) -> int:
        return len(self.members(entity))

    def entities(self) -> Iterator[str]:
        return iter(self._members)

    def addresses(self) -> Iterator[str]:
        return iter(self._entity_of)

    def expand(self, seeds: Iterable[str]) -> ExpansionResult:
        """Close a seed set over its entities (perpetrator-universe lookup)."""
        seed_set = frozenset(seeds)
        entity_ids = frozenset(self.entity_of(addr) for addr in seed_set)
        expanded: set[str] = set()
        for entity in entity_ids:
            expanded.update(self.members(entity))
        return ExpansionResult(seed_set, entity_ids, frozenset(expanded))

    def to_csv(self) -> bytes:
        """Deterministic dump, one row per address, sorted by address."""
        buffer = io.StringIO()
        buffer.write("address,entity_representative\n")
        for address in sorted(self._entity_of):
            buffer.write(f"{address},{self._entity_of[address]}\n")
        return buffer.getvalue().encode("utf-8")


def build_partition(
    ledger: LedgerStore,
    verdicts: Mapping[str, CoinJoinVerdict] | None = None,
) -> EntityPartition:
    """Cluster every ledger address by co-spending.

    CoinJoin-flagged transactions contribute no unions; their addresses
    stay interned as singletons unless other transactions link them.
    Pass verdicts=None to run without any screen (ablation mode). Output
    addresses that never spend are interned too, so the partition covers
    the full address universe of the ledger.
    """
    uf = _UnionFind()
    ids: dict[str, int] = {}

    def intern(address: str) -> int:
        idx = ids.get(address)
        if idx is None:
            idx = uf.add()
            ids[address] = idx
        return idx

    for tx in ledger:
        if tx.is_coinbase:
            for addr, _ in tx.outputs:
                intern(addr)
            continue
        input_ids = [intern(addr) for addr in sorted(tx.input_addresses())]
        for addr, _ in tx.outputs:
            intern(addr)
        verdict = verdicts.get(tx.tx_id) if verdicts is not None else None
        if verdict is not None and verdict.is_coinjoin:
            continue
        first = input_ids[0]
        for other in input_ids[1:]:
            uf.union(first, other)

    groups: dict[int, list[str]] = {}
    for address, idx in ids.items():
        groups.setdefault(uf.find(idx), []).append(address)
    entity_of: dict[str, str] = {}
    for group in groups.values():
        representative = min(group)
        for address in group:
            entity_of[address] = representative
    return EntityPartition(entity_of)


def partition_identical(a: EntityPartition, b: EntityPartition, addresses: Iterable[str]) -> bool:
    """Same grouping over the given addresses (entity ids may differ)."""
    addrs = list(addresses)
    groups_a: dict[str, set[str]] = {}
    groups_b: dict[str, set[str]] = {}
    for addr in addrs:
        groups_a.setdefault(a.entity_of(addr), set()).add(addr)
        groups_b.setdefault(b.entity_of(addr), set()).add(addr)
    return sorted(map(sorted, groups_a.values())) == sorted(map(sorted, groups_b.values()))


def partition_coarser_or_equal(
    fine: EntityPartition, coarse: EntityPartition, addresses: Iterable[str]
) -> bool:
    """True when every fine-partition group sits inside one coarse group."""
    by_fine: dict[str, set[str]] = {}
    for addr in addresses:
        by_fine.setdefault(fine.entity_of(addr), set()).add(addr)
    for group in by_fine.values():
        coarse_ids = {coarse.entity_of(addr) for addr in group}
        if len(coarse_ids) != 1:
            return False
    return True
