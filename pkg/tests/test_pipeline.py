import hashlib
import json
from pathlib import Path

import pytest

from caselink.pipeline import (
    PipelineConfig,
    PipelineStageError,
    build_analysis,
    load_config,
    run_pipeline,
)

EXPECTED_ARTIFACTS = {
    "partition.csv",
    "entity_graph.csv",
    "linkage.json",
    "network.json",
    "network.dot",
    "inflow_seed.csv",
    "inflow_seed.json",
    "inflow_expanded.csv",
    "inflow_expanded.json",
    "stats_summary.json",
}


def _write_config(tmp_path, data_dir, out_name="out", extra=""):
    path = tmp_path / "run.conf"
    path.write_text(
        f"transactions = {data_dir}/transactions.jsonl\n"
        f"cases = {data_dir}/cases.csv\n"
        f"tags = {data_dir}/tags.csv\n"
        f"rates = {data_dir}/rates.csv\n"
        f"out_dir = {out_name}\n" + extra
    )
    return path


@pytest.fixture()
def config(tmp_path, data_dir):
    return load_config(_write_config(tmp_path, data_dir))


def test_load_config_resolves_paths(tmp_path, data_dir):
    config = load_config(_write_config(tmp_path, data_dir, extra="threads = 3\n"))
    assert config.transactions == (data_dir / "transactions.jsonl").resolve()
    assert config.out_dir == (tmp_path / "out").resolve()
    assert config.threads == 3
    assert config.level == "collector"


def test_load_config_rejects_garbage(tmp_path, data_dir):
    bad = tmp_path / "bad.conf"
    bad.write_text("transactions foo\n")
    with pytest.raises(ValueError, match="key = value"):
        load_config(bad)
    bad.write_text("wibble = 3\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_config(bad)
    bad.write_text(f"transactions = {data_dir}/transactions.jsonl\n")
    with pytest.raises(ValueError, match="missing required"):
        load_config(bad)
    with pytest.raises(ValueError, match="link level"):
        load_config(_write_config(tmp_path, data_dir, extra="level = wallet\n"))
    with pytest.raises(ValueError, match="integer"):
        load_config(_write_config(tmp_path, data_dir, extra="threads = many\n"))


def test_build_analysis(config):
    bundle = build_analysis(config)
    assert len(bundle.ledger) == 12
    assert bundle.partition.entity_count == 17
    assert bundle.graph.edge_count == 10
    assert [c.case_id for c in bundle.cases] == [
        "BY1001-000001-21/1",
        "BY1002-000002-21/2",
        "BY1004-000005-21/5",
        "BY2001-000004-21/4",
    ]
    assert bundle.inactive_seed_count == 1


def test_run_pipeline_artifacts(config):
    manifest = run_pipeline(config)
    out_dir = Path(config.out_dir)
    on_disk = {p.name for p in out_dir.iterdir()}
    assert on_disk == EXPECTED_ARTIFACTS | {"run_manifest.json"}
    assert set(manifest.outputs) == EXPECTED_ARTIFACTS
    for name, digest in manifest.outputs.items():
        assert hashlib.sha256((out_dir / name).read_bytes()).hexdigest() == digest
    stored = json.loads((out_dir / "run_manifest.json").read_text())
    assert stored == manifest.payload()
    assert stored["tool"] == "caselink"
    assert set(stored["inputs"]) == {"transactions", "cases", "tags", "rates"}
    assert "threads" not in stored["config"]
    assert "out_dir" not in stored["config"]


def test_linkage_artifact_numbers(config):
    run_pipeline(config)
    linkage = json.loads((Path(config.out_dir) / "linkage.json").read_text())
    assert linkage["inactive_seed_count"] == 1
    levels = linkage["levels"]
    assert levels["address"] == {
        "case_count": 4,
        "cluster_count": 4,
        "singleton_count": 4,
        "linkage_rate": 0.0,
    }
    assert levels["entity"]["cluster_count"] == 3
    assert levels["entity"]["linkage_rate"] == 0.5
    assert levels["collector"]["cluster_count"] == 2
    assert levels["collector"]["linkage_rate"] == 0.75
    assert linkage["breakdown"] == [
        {
            "cluster_size": 1,
            "cluster_count": 1,
            "inflow_satoshi": 15_000_000,
            "contains_service_evidence": True,
        },
        {
            "cluster_size": 3,
            "cluster_count": 1,
            "inflow_satoshi": 295_000_000,
            "contains_service_evidence": False,
        },
    ]


def test_stats_artifact_numbers(config):
    run_pipeline(config)
    summary = json.loads((Path(config.out_dir) / "stats_summary.json").read_text())
    assert summary["seed_address_count"] == 4
    assert summary["inflow"]["seed"]["total_satoshi"] == 295_000_000
    assert summary["inflow"]["expanded"]["total_satoshi"] == 295_000_000
    assert summary["inflow"]["expanded"]["payments"] == 6
    assert summary["victim_estimate"] == {"unique_senders": 6, "incoming_tx_count": 8}
    assert summary["value_distribution"]["counts"] == [0, 0, 0, 1, 5, 0, 0]


def test_runs_are_deterministic(tmp_path, data_dir):
    first = run_pipeline(load_config(_write_config(tmp_path, data_dir, "out_a")))
    second = run_pipeline(
        load_config(_write_config(tmp_path, data_dir, "out_b", extra="threads = 4\n"))
    )
    assert first.outputs == second.outputs
    assert first.to_json() == second.to_json()
    for name in EXPECTED_ARTIFACTS:
        assert (tmp_path / "out_a" / name).read_bytes() == (tmp_path / "out_b" / name).read_bytes()


def test_stats_without_rates_fails_in_flow_stage(tmp_path, data_dir):
    path = tmp_path / "run.conf"
    path.write_text(
        f"transactions = {data_dir}/transactions.jsonl\n"
        f"cases = {data_dir}/cases.csv\n"
        "out_dir = out\n"
    )
    with pytest.raises(PipelineStageError, match="^stage flow-stats:") as err:
        run_pipeline(load_config(path))
    assert err.value.stage == "flow-stats"
    # with stats off the same configuration runs fine
    path.write_text(path.read_text() + "stats = false\n")
    manifest = run_pipeline(load_config(path))
    assert "stats_summary.json" not in manifest.outputs
    assert "inflow_seed.csv" not in manifest.outputs


def test_broken_input_fails_in_ingest_stage(tmp_path, data_dir):
    broken = tmp_path / "broken.jsonl"
    broken.write_text("not json\n")
    path = tmp_path / "run.conf"
    path.write_text(
        f"transactions = {broken}\n"
        f"cases = {data_dir}/cases.csv\n"
        "out_dir = out\n"
        "stats = false\n"
    )
    with pytest.raises(PipelineStageError, match="^stage ingest:") as err:
        run_pipeline(load_config(path))
    assert err.value.stage == "ingest"


def test_coinjoin_policy_off_changes_partition(tmp_path, data_dir):
    config = load_config(
        _write_config(tmp_path, data_dir, extra="coinjoin_policy = off\nstats = false\n")
    )
    bundle = build_analysis(config)
    assert bundle.partition.entity_count == 16  # the mix now merges N1 and N2
    assert bundle.graph.includes_tx("t11")


def test_config_validation_direct(tmp_path, data_dir):
    base = dict(
        transactions=data_dir / "transactions.jsonl",
        cases=data_dir / "cases.csv",
        out_dir=tmp_path / "out",
    )
    PipelineConfig(**base).validate()
    with pytest.raises(ValueError, match="export format"):
        PipelineConfig(**base, export_formats=("svg",)).validate()
    with pytest.raises(ValueError, match="threads"):
        PipelineConfig(**base, threads=0).validate()
    with pytest.raises(ValueError, match="min_collector_sources"):
        PipelineConfig(**base, min_collector_sources=0).validate()
