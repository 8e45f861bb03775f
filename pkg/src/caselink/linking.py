"""Linking case files into case clusters.

Three evidence levels, each strictly cumulative, so clusterings only
coarsen: shared perpetrator address, shared entity, shared collector.
Victim annotations never link anything. Entities that look like services
(exchange-tagged or implausibly large) are excluded as evidence: two
unrelated cases whose perpetrators cash out at the same exchange share
infrastructure, not identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .entity_graph import EntityGraph
from .ledger import CaseRecord

LINK_LEVELS = ("address", "entity", "collector")

_Item = tuple[str, str]


@dataclass(frozen=True)
class CaseCluster:
    case_ids: tuple[str, ...]
    shared_addresses: tuple[str, ...]
    shared_entities: tuple[str, ...]
    shared_collectors: tuple[str, ...]
    inflow_satoshi: int | None
    contains_service_evidence: bool

    @property
    def size(self) -> int:
        return len(self.case_ids)

    @property
    def is_singleton(self) -> bool:
        return len(self.case_ids) == 1


@dataclass(frozen=True)
class CaseClustering:
    level: str
    clusters: tuple[CaseCluster, ...]

    @property
    def case_count(self) -> int:
        return sum(c.size for c in self.clusters)

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    @property
    def singleton_count(self) -> int:
        return sum(1 for c in self.clusters if c.is_singleton)

    def cluster_of(self, case_id: str) -> CaseCluster:
        for cluster in self.clusters:
            if case_id in cluster.case_ids:
                return cluster
        raise KeyError(f"unknown case {case_id!r}")


def linkage_rate(clustering: CaseClustering) -> float:
    """Fraction of cases linked to at least one other case."""
    total = clustering.case_count
    if total == 0:
        return 0.0
    return (total - clustering.singleton_count) / total


def _address_items(case: CaseRecord) -> set[_Item]:
    return {("address", addr) for addr in case.perpetrator_addresses}


def _perp_entities(case: CaseRecord, graph: EntityGraph) -> set[str]:
    return {graph.partition.entity_of(addr) for addr in case.perpetrator_addresses}


def _entity_items(case: CaseRecord, graph: EntityGraph) -> set[_Item]:
    return {
        ("entity", entity)
        for entity in _perp_entities(case, graph)
        if not graph.meta(entity).is_service_like
    }


def collector_evidence(
    cases: Sequence[CaseRecord], graph: EntityGraph, min_distinct_sources: int = 1
) -> tuple[dict[str, set[_Item]], dict[str, frozenset[str]]]:
    """Collector evidence: per-case items and per-entity collector map.

    A collector is a non-service entity one hop downstream of a
    non-service perpetrator entity. Collectors fed by fewer than
    min_distinct_sources perpetrator entities (across all cases) are
    not admissible evidence. The second mapping gives each perpetrator
    entity its admissible collectors (network rendering needs it).
    """
    collectors_of_entity: dict[str, set[str]] = {}
    payers: dict[str, set[str]] = {}
    for case in cases:
        for entity in _perp_entities(case, graph):
            if graph.meta(entity).is_service_like or entity in collectors_of_entity:
                continue
            found: set[str] = set()
            if graph.is_known(entity):
                for neighbor, _ in graph.out_neighbors(entity):
                    if not graph.meta(neighbor).is_service_like:
                        found.add(neighbor)
                        payers.setdefault(neighbor, set()).add(entity)
            collectors_of_entity[entity] = found
    admissible = {c for c, sources in payers.items() if len(sources) >= min_distinct_sources}
    items: dict[str, set[_Item]] = {}
    for case in cases:
        case_items: set[_Item] = set()
        for entity in _perp_entities(case, graph):
            for collector in collectors_of_entity.get(entity, ()):
                if collector in admissible:
                    case_items.add(("collector", collector))
        items[case.case_id] = case_items
    admissible_of_entity = {
        entity: frozenset(c for c in found if c in admissible)
        for entity, found in collectors_of_entity.items()
    }
    return items, admissible_of_entity


def _connected_components(evidence: dict[str, set[_Item]]) -> list[list[str]]:
    parent: dict[str, str] = {case_id: case_id for case_id in evidence}

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    first_case: dict[_Item, str] = {}
    for case_id in sorted(evidence):
        for item in evidence[case_id]:
            anchor = first_case.setdefault(item, case_id)
            if anchor != case_id:
                ra, rb = find(anchor), find(case_id)
                if ra != rb:
                    parent[rb] = ra
    groups: dict[str, list[str]] = {}
    for case_id in evidence:
        groups.setdefault(find(case_id), []).append(case_id)
    return [sorted(group) for group in groups.values()]


def _assemble(
    level: str,
    cases: Sequence[CaseRecord],
    evidence: dict[str, set[_Item]],
    graph: EntityGraph | None,
) -> CaseClustering:
    by_id = {case.case_id: case for case in cases}
    clusters: list[CaseCluster] = []
    for group in _connected_components(evidence):
        counts: dict[_Item, int] = {}
        for case_id in group:
            for item in evidence[case_id]:
                counts[item] = counts.get(item, 0) + 1
        shared = sorted(item for item, n in counts.items() if n >= 2)
        inflow: int | None = None
        service = False
        if graph is not None:
            entities = set()
            for case_id in group:
                entities |= _perp_entities(by_id[case_id], graph)
            inflow = graph.inflow(entities)[0]
            service = any(graph.meta(e).is_service_like for e in entities)
        clusters.append(
            CaseCluster(
                case_ids=tuple(group),
                shared_addresses=tuple(v for k, v in shared if k == "address"),
                shared_entities=tuple(v for k, v in shared if k == "entity"),
                shared_collectors=tuple(v for k, v in shared if k == "collector"),
                inflow_satoshi=inflow,
                contains_service_evidence=service,
            )
        )
    clusters.sort(key=lambda c: (-c.size, c.case_ids[0]))
    return CaseClustering(level, tuple(clusters))


def _check_cases(cases: Sequence[CaseRecord]) -> None:
    seen: set[str] = set()
    for case in cases:
        if case.case_id in seen:
            raise ValueError(f"duplicate case id {case.case_id!r}")
        seen.add(case.case_id)


def link_by_address(
    cases: Sequence[CaseRecord], graph: EntityGraph | None = None
) -> CaseClustering:
    """Cluster cases sharing a perpetrator address.

    The graph is optional enrichment: with it, clusters carry inflow
    totals and the service flag; linking itself needs no chain data.
    """
    _check_cases(cases)
    evidence = {case.case_id: _address_items(case) for case in cases}
    return _assemble("address", cases, evidence, graph)


def link_by_entity(cases: Sequence[CaseRecord], graph: EntityGraph) -> CaseClustering:
    """Cluster cases sharing an address or a non-service entity."""
    _check_cases(cases)
    evidence = {
        case.case_id: _address_items(case) | _entity_items(case, graph) for case in cases
    }
    return _assemble("entity", cases, evidence, graph)


def link_by_collector(
    cases: Sequence[CaseRecord], graph: EntityGraph, min_distinct_sources: int = 1
) -> CaseClustering:
    """Cluster cases sharing an address, entity, or downstream collector."""
    _check_cases(cases)
    if min_distinct_sources < 1:
        raise ValueError("min_distinct_sources must be at least 1")
    collector_items, _ = collector_evidence(cases, graph, min_distinct_sources)
    evidence = {
        case.case_id: _address_items(case)
        | _entity_items(case, graph)
        | collector_items[case.case_id]
        for case in cases
    }
    return _assemble("collector", cases, evidence, graph)


def link_cases(
    cases: Sequence[CaseRecord],
    level: str,
    graph: EntityGraph | None = None,
    min_distinct_sources: int = 1,
) -> CaseClustering:
    """Dispatch by level name; entity and collector levels need the graph."""
    if level == "address":
        return link_by_address(cases, graph)
    if level == "entity":
        if graph is None:
            raise ValueError("entity-level linking requires the entity graph")
        return link_by_entity(cases, graph)
    if level == "collector":
        if graph is None:
            raise ValueError("collector-level linking requires the entity graph")
        return link_by_collector(cases, graph, min_distinct_sources)
    raise ValueError(f"unknown link level {level!r}")


@dataclass(frozen=True)
class BreakdownRow:
    cluster_size: int
    cluster_count: int
    inflow_satoshi: int
    contains_service_evidence: bool


def cluster_breakdown(clustering: CaseClustering) -> list[BreakdownRow]:
    """Cluster-size histogram with summed inflow, smallest size first.

    Requires a clustering built with the entity graph (so inflows are
    attached). Inflow includes value parked at service-like entities;
    the service flag marks rows containing such clusters instead of
    silently dropping their value.
    """
    by_size: dict[int, list[CaseCluster]] = {}
    for cluster in clustering.clusters:
        if cluster.inflow_satoshi is None:
            raise ValueError("clustering carries no inflow data; link with the entity graph")
        by_size.setdefault(cluster.size, []).append(cluster)
    rows: list[BreakdownRow] = []
    for size in sorted(by_size):
        members = by_size[size]
        rows.append(
            BreakdownRow(
                cluster_size=size,
                cluster_count=len(members),
                inflow_satoshi=sum(c.inflow_satoshi or 0 for c in members),
                contains_service_evidence=any(c.contains_service_evidence for c in members),
            )
        )
    return rows
