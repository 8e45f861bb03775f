"""Case network documents for visual inspection.

Nodes are cases, annotated perpetrator addresses, and (depending on the
link level) entities and collector entities. Edge kinds mirror how the
link was established: annotation (case to address), membership (address
to entity), flow (entity to collector). Exports are JSON for programmatic
consumers and Graphviz DOT for quick rendering; both are deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .entity_graph import EntityGraph
from .ledger import CaseRecord
from .linking import CaseClustering, collector_evidence

NODE_FILLCOLORS = {
    "case": "#ccffcc",
    "address": "#ffe6cc",
    "entity": "#ccccff",
    "collector_entity": "#ffcccc",
}

_TYPE_ORDER = {"case": 0, "address": 1, "entity": 2, "collector_entity": 3}

_EDGE_STYLE = {
    "annotation": " [dir=none]",
    "membership": " [dir=none, style=dashed]",
    "flow": "",
}


@dataclass(frozen=True)
class NetworkNode:
    id: str
    type: str
    label: str


@dataclass(frozen=True)
class NetworkEdge:
    src: str
    dst: str
    kind: str


@dataclass(frozen=True)
class CaseNetwork:
    nodes: tuple[NetworkNode, ...]
    edges: tuple[NetworkEdge, ...]


def build_network(
    cases: Sequence[CaseRecord],
    clustering: CaseClustering,
    graph: EntityGraph | None = None,
    min_distinct_sources: int = 1,
) -> CaseNetwork:
    """Assemble the node/edge document for a clustering's link level.

    Entity and collector levels need the entity graph. Service-like
    entities are not drawn; they were never admissible link evidence.
    """
    level = clustering.level
    if level not in ("address", "entity", "collector"):
        raise ValueError(f"unknown link level {level!r}")
    if level != "address" and graph is None:
        raise ValueError(f"{level}-level network requires the entity graph")

    nodes: dict[str, NetworkNode] = {}
    edges: set[NetworkEdge] = set()

    def add_node(node_id: str, node_type: str, label: str) -> None:
        existing = nodes.get(node_id)
        if existing is None:
            nodes[node_id] = NetworkNode(node_id, node_type, label)
        elif existing.type != node_type and node_type == "collector_entity":
            # Collector role wins when an entity plays both parts.
            nodes[node_id] = NetworkNode(node_id, node_type, label)

    for case in cases:
        add_node(f"case:{case.case_id}", "case", case.case_id)
        for addr in case.perpetrator_addresses:
            add_node(f"addr:{addr}", "address", addr)
            edges.add(NetworkEdge(f"case:{case.case_id}", f"addr:{addr}", "annotation"))

    if level in ("entity", "collector") and graph is not None:
        for case in cases:
            for addr in case.perpetrator_addresses:
                entity = graph.partition.entity_of(addr)
                if graph.meta(entity).is_service_like:
                    continue
                add_node(f"ent:{entity}", "entity", entity)
                edges.add(NetworkEdge(f"addr:{addr}", f"ent:{entity}", "membership"))

    if level == "collector" and graph is not None:
        _, collectors_of_entity = collector_evidence(cases, graph, min_distinct_sources)
        for entity, collectors in sorted(collectors_of_entity.items()):
            for collector in sorted(collectors):
                add_node(f"ent:{collector}", "collector_entity", collector)
                edges.add(NetworkEdge(f"ent:{entity}", f"ent:{collector}", "flow"))

    ordered_nodes = sorted(nodes.values(), key=lambda n: (_TYPE_ORDER[n.type], n.id))
    ordered_edges = sorted(edges, key=lambda e: (e.kind, e.src, e.dst))
    return CaseNetwork(tuple(ordered_nodes), tuple(ordered_edges))


def network_payload(network: CaseNetwork) -> dict:
    return {
        "nodes": [{"id": n.id, "type": n.type, "label": n.label} for n in network.nodes],
        "edges": [{"src": e.src, "dst": e.dst, "kind": e.kind} for e in network.edges],
    }


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(network: CaseNetwork) -> str:
    lines = ["digraph case_network {"]
    if network.nodes:
        lines.append("  node [style=filled];")
    for node in network.nodes:
        fill = NODE_FILLCOLORS[node.type]
        lines.append(f"  {_quote(node.id)} [label={_quote(node.label)}, fillcolor=\"{fill}\"];")
    for edge in network.edges:
        lines.append(f"  {_quote(edge.src)} -> {_quote(edge.dst)}{_EDGE_STYLE[edge.kind]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_network(network: CaseNetwork, fmt: str = "json") -> bytes:
    """Serialize a network document as 'json' or 'dot'."""
    if fmt == "json":
        return (json.dumps(network_payload(network), indent=2) + "\n").encode("utf-8")
    if fmt == "dot":
        return to_dot(network).encode("utf-8")
    raise ValueError(f"unknown network format {fmt!r}")
