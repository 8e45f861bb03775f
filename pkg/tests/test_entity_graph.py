import pytest

from caselink.coinjoin import classify_ledger
from caselink.entities import build_partition
from caselink.entity_graph import EntityMeta, build_graph
from caselink.ledger import LedgerStore, Transaction


EXPECTED_EDGES = {
    ("A1", "P1"): 30_000_000,
    ("A1", "P2"): 20_000_000,
    ("A1", "X1"): 5_000_000,
    ("A2", "P1"): 40_000_000,
    ("A3", "P1"): 100_000_000,
    ("A4", "P1"): 80_000_000,
    ("A5", "P2"): 25_000_000,
    ("A6", "X1"): 10_000_000,
    ("P1", "C1"): 250_000_000,
    ("P2", "C1"): 45_000_000,
}


def test_edge_set(graph):
    assert {(e.source, e.target): e.total_value for e in graph.edges()} == EXPECTED_EDGES
    assert graph.edge_count == 10


def test_value_conservation(graph, ledger):
    """Every attributed output satoshi lands on exactly one edge."""
    attributed = sum(
        tx.output_value for tx in ledger if graph.includes_tx(tx.tx_id)
    )
    assert sum(e.total_value for e in graph.edges()) == attributed == 605_000_000


def test_mix_and_coinbase_excluded(graph):
    assert not graph.includes_tx("t11")
    assert not graph.includes_tx("t12")
    assert graph.includes_tx("t01")
    assert graph.edge("N1", "MX1") is None
    # the coinbase reward gives M1 no incoming edge
    assert all(e.target != "M1" for e in graph.edges())


def test_edge_lookup(graph):
    edge = graph.edge("P1", "C1")
    assert edge.total_value == 250_000_000
    assert edge.tx_count == 1
    assert edge.first_ts == edge.last_ts
    assert graph.edge("C1", "P1") is None


def test_edge_aggregation_window():
    txs = [
        Transaction("x1", 100, (("A", 5),), (("B", 5),)),
        Transaction("x2", 900, (("A", 7),), (("B", 7),)),
    ]
    ledger = LedgerStore(txs)
    graph = build_graph(ledger, build_partition(ledger, None))
    edge = graph.edge("A", "B")
    assert edge.total_value == 12
    assert edge.tx_count == 2
    assert (edge.first_ts, edge.last_ts) == (100, 900)


def test_self_edges_stored_but_not_neighbors():
    txs = [Transaction("x1", 0, (("A", 10),), (("A", 6), ("B", 4)))]
    ledger = LedgerStore(txs)
    graph = build_graph(ledger, build_partition(ledger, None))
    self_edge = graph.edge("A", "A")
    assert self_edge.is_self
    assert self_edge.total_value == 6
    assert [t for t, _ in graph.out_neighbors("A")] == ["B"]
    with_self = graph.out_neighbors("A", include_self_edges=True)
    assert [t for t, _ in with_self] == ["A", "B"]


def test_meta(graph):
    x1 = graph.meta("X1")
    assert x1.is_service_tagged
    assert x1.is_service_like
    assert x1.labels == ("ShadyExchange",)
    p1 = graph.meta("P1")
    assert p1.address_count == 2
    assert not p1.is_service_like
    m1 = graph.meta("M1")
    assert not m1.is_service_like  # 'other' tags do not mark services


def test_meta_unknown_entity_is_untagged_singleton(graph):
    ghost = graph.meta("ghost")
    assert ghost.address_count == 1
    assert not ghost.is_service_like
    assert not graph.is_known("ghost")
    assert graph.is_known("P1")


def test_oversized_entity_counts_as_service():
    meta = EntityMeta("big", 10_001, (), frozenset(), False)
    assert meta.is_service_like
    assert not EntityMeta("ok", 10_000, (), frozenset(), False).is_service_like


def test_out_neighbors(graph):
    assert [(t, e.total_value) for t, e in graph.out_neighbors("P1")] == [("C1", 250_000_000)]
    assert [t for t, _ in graph.out_neighbors("A1")] == ["P1", "P2", "X1"]
    assert graph.out_neighbors("C1") == []


def test_out_neighbors_multi_hop(graph):
    reached = [t for t, _ in graph.out_neighbors("A1", max_hops=2)]
    assert reached == ["P1", "P2", "X1", "C1"]


def test_out_neighbors_errors(graph):
    with pytest.raises(ValueError, match="unknown entity"):
        graph.out_neighbors("ghost")
    with pytest.raises(ValueError, match="max_hops"):
        graph.out_neighbors("P1", max_hops=0)


def test_inflow_totals(graph):
    total, entries = graph.inflow({"P1", "P2"})
    assert total == 295_000_000
    assert [e.tx_id for e in entries] == ["t01", "t02", "t03", "t04", "t05", "t06"]
    assert [e.value for e in entries][:2] == [30_000_000, 40_000_000]


def test_inflow_skips_internal_movement(graph):
    # t07 moves P1's funds to C1; inside the requested set it is not inflow
    total, entries = graph.inflow({"P1", "C1"})
    assert total == 295_000_000
    assert "t07" not in {e.tx_id for e in entries}
    assert "t08" in {e.tx_id for e in entries}


def test_inflow_service_exclusion(graph):
    with_service, _ = graph.inflow({"P1", "P2", "X1"})
    assert with_service == 310_000_000
    without, entries = graph.inflow({"P1", "P2", "X1"}, exclude_service_entities=True)
    assert without == 295_000_000
    assert all(e.entity != "X1" for e in entries)


def test_inflow_empty(graph):
    assert graph.inflow(()) == (0, [])


def test_csv_dump(graph, ledger, tags, verdicts, partition):
    dump = graph.to_csv()
    lines = dump.decode().splitlines()
    assert lines[0] == "source,target,total_value,tx_count,first_ts,last_ts"
    assert len(lines) == 11
    assert lines[1:] == sorted(lines[1:])
    rebuilt = build_graph(ledger, partition, tags=tags, verdicts=verdicts)
    assert rebuilt.to_csv() == dump


def test_unfiltered_graph_includes_mix(ledger, tags, partition_unfiltered):
    graph = build_graph(ledger, partition_unfiltered, tags=tags, verdicts=None)
    assert graph.includes_tx("t11")
    # mix outputs now credit the merged spender entity's targets
    assert graph.edge("N1", "MX1").total_value == 7_000_000
