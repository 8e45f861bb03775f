"""End-to-end run orchestration.

A run reads the four input files, screens CoinJoins, clusters addresses,
builds the entity graph, links cases at the configured level, computes
flow statistics, and writes every artifact plus a manifest of sha256
digests. Failures surface as PipelineStageError naming the stage, so a
missing rate table reads as "stage flow-stats: ..." and not a stack trace
from deep inside a parser. All compute is single-threaded and ordered;
rerunning a config byte-identically reproduces every output.
"""

from __future__ import annotations

import hashlib
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from . import __version__
from .coinjoin import CoinJoinVerdict, classify_ledger, resolve_policy
from .entities import EntityPartition, build_partition
from .entity_graph import EntityGraph, build_graph
from .flowstats import InflowSeries, inflow_series, value_distribution, victim_estimate
from .ledger import (
    AttributionTag,
    CaseRecord,
    LedgerStore,
    RateTable,
    filter_active_cases,
    parse_cases,
    parse_rates,
    parse_tags,
    parse_transactions,
)
from .linking import LINK_LEVELS, CaseClustering, cluster_breakdown, link_cases, linkage_rate
from .network import build_network, export_network

EXPORT_FORMATS = ("json", "dot")


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, cause: object) -> None:
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


@dataclass(frozen=True)
class PipelineConfig:
    transactions: Path
    cases: Path
    out_dir: Path
    transactions_format: str = "jsonl"
    tags: Path | None = None
    rates: Path | None = None
    coinjoin_policy: str = "default"
    level: str = "collector"
    min_collector_sources: int = 1
    export_formats: tuple[str, ...] = ("json", "dot")
    stats: bool = True
    threads: int = 1

    def validate(self) -> None:
        if self.level not in LINK_LEVELS:
            raise ValueError(f"unknown link level {self.level!r}")
        if self.min_collector_sources < 1:
            raise ValueError("min_collector_sources must be at least 1")
        for fmt in self.export_formats:
            if fmt not in EXPORT_FORMATS:
                raise ValueError(f"unknown export format {fmt!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def analysis_snapshot(self) -> dict:
        # Only knobs that influence analysis output; execution knobs
        # (threads, out_dir) deliberately stay out of the manifest.
        return {
            "transactions_format": self.transactions_format,
            "coinjoin_policy": self.coinjoin_policy,
            "level": self.level,
            "min_collector_sources": self.min_collector_sources,
            "export_formats": list(self.export_formats),
            "stats": self.stats,
        }


_CONFIG_KEYS = {
    "transactions": "path",
    "cases": "path",
    "out_dir": "path",
    "tags": "path",
    "rates": "path",
    "transactions_format": "str",
    "coinjoin_policy": "str",
    "level": "str",
    "min_collector_sources": "int",
    "export_formats": "list",
    "stats": "bool",
    "threads": "int",
}


def load_config(path: Path | str) -> PipelineConfig:
    """Read a run config of key = value lines; paths resolve against it."""
    config_path = Path(path)
    base = config_path.parent
    fields: dict[str, object] = {}
    with open(config_path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep:
                raise ValueError(f"{config_path}:{lineno}: expected key = value")
            kind = _CONFIG_KEYS.get(key)
            if kind is None:
                raise ValueError(f"{config_path}:{lineno}: unknown key {key!r}")
            if kind == "path":
                fields[key] = (base / value).resolve()
            elif kind == "int":
                try:
                    fields[key] = int(value)
                except ValueError:
                    raise ValueError(f"{config_path}:{lineno}: {key} must be an integer") from None
            elif kind == "bool":
                if value.lower() not in ("true", "false"):
                    raise ValueError(f"{config_path}:{lineno}: {key} must be true or false")
                fields[key] = value.lower() == "true"
            elif kind == "list":
                fields[key] = tuple(part.strip() for part in value.split(",") if part.strip())
            else:
                fields[key] = value
    for required in ("transactions", "cases", "out_dir"):
        if required not in fields:
            raise ValueError(f"{config_path}: missing required key {required!r}")
    config = PipelineConfig(**fields)  # type: ignore[arg-type]
    config.validate()
    return config


@dataclass
class AnalysisBundle:
    """Everything downstream consumers need, built once, then read-only."""

    ledger: LedgerStore
    tags: tuple[AttributionTag, ...]
    rates: RateTable | None
    cases: tuple[CaseRecord, ...]
    inactive_seed_count: int
    verdicts: dict[str, CoinJoinVerdict]
    partition: EntityPartition
    graph: EntityGraph


def build_analysis(config: PipelineConfig) -> AnalysisBundle:
    """Ingest through entity graph; the shared front half of every run."""
    config.validate()
    with _stage("ingest"):
        with open(config.transactions, "rb") as handle:
            ledger = LedgerStore(parse_transactions(handle, config.transactions_format))
        tags: tuple[AttributionTag, ...] = ()
        if config.tags is not None:
            with open(config.tags, "rb") as handle:
                tags = tuple(parse_tags(handle))
        rates: RateTable | None = None
        if config.rates is not None:
            with open(config.rates, "rb") as handle:
                rates = parse_rates(handle)
        with open(config.cases, "rb") as handle:
            all_cases = parse_cases(handle)
        active, inactive_count = filter_active_cases(all_cases, ledger)
    with _stage("coinjoin-filter"):
        policy = resolve_policy(config.coinjoin_policy)
        verdicts = classify_ledger(ledger, policy)
    with _stage("entity-cluster"):
        partition = build_partition(ledger, verdicts)
    with _stage("entity-graph"):
        graph = build_graph(ledger, partition, tags, verdicts)
    return AnalysisBundle(
        ledger=ledger,
        tags=tags,
        rates=rates,
        cases=tuple(active),
        inactive_seed_count=inactive_count,
        verdicts=verdicts,
        partition=partition,
        graph=graph,
    )


@dataclass(frozen=True)
class RunManifest:
    tool: str
    version: str
    config: dict
    inputs: dict
    outputs: dict

    def payload(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.payload(), indent=2, sort_keys=True) + "\n").encode("utf-8")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run everything, write artifacts to config.out_dir, return manifest."""
    bundle = build_analysis(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, bytes] = {}

    with _stage("entity-cluster"):
        outputs["partition.csv"] = bundle.partition.to_csv()
    with _stage("entity-graph"):
        outputs["entity_graph.csv"] = bundle.graph.to_csv()

    with _stage("case-link"):
        clusterings: dict[str, CaseClustering] = {}
        for level in LINK_LEVELS:
            clusterings[level] = link_cases(
                bundle.cases, level, bundle.graph, config.min_collector_sources
            )
        linkage = {
            "inactive_seed_count": bundle.inactive_seed_count,
            "levels": {
                level: {
                    "case_count": clustering.case_count,
                    "cluster_count": clustering.cluster_count,
                    "singleton_count": clustering.singleton_count,
                    "linkage_rate": linkage_rate(clustering),
                }
                for level, clustering in clusterings.items()
            },
            "breakdown": [
                {
                    "cluster_size": row.cluster_size,
                    "cluster_count": row.cluster_count,
                    "inflow_satoshi": row.inflow_satoshi,
                    "contains_service_evidence": row.contains_service_evidence,
                }
                for row in cluster_breakdown(clusterings[config.level])
            ],
        }
        outputs["linkage.json"] = (json.dumps(linkage, indent=2) + "\n").encode("utf-8")

    with _stage("export"):
        network = build_network(
            bundle.cases, clusterings[config.level], bundle.graph, config.min_collector_sources
        )
        for fmt in config.export_formats:
            outputs[f"network.{fmt}"] = export_network(network, fmt)

    if config.stats:
        with _stage("flow-stats"):
            if bundle.rates is None:
                raise ValueError("EUR statistics requested but no rates file configured")
            seeds = sorted(
                {addr for case in bundle.cases for addr in case.perpetrator_addresses}
            )
            series: dict[str, InflowSeries] = {}
            for scope in ("seed", "expanded"):
                series[scope] = inflow_series(bundle.graph, seeds, scope, bundle.rates)
                outputs[f"inflow_{scope}.csv"] = series[scope].to_csv()
                outputs[f"inflow_{scope}.json"] = series[scope].to_json()
            estimate = victim_estimate(seeds, bundle.ledger, bundle.partition)
            distribution = value_distribution(
                p.value_eur for p in series["expanded"].points
            )
            summary = {
                "seed_address_count": len(seeds),
                "inflow": {
                    scope: {
                        "total_satoshi": s.total_satoshi,
                        "total_eur": float(s.total_eur),
                        "payments": len(s.points),
                    }
                    for scope, s in series.items()
                },
                "victim_estimate": {
                    "unique_senders": estimate.unique_senders,
                    "incoming_tx_count": estimate.incoming_tx_count,
                },
                "value_distribution": distribution.payload(),
            }
            outputs["stats_summary.json"] = (json.dumps(summary, indent=2) + "\n").encode("utf-8")

    with _stage("export"):
        for name, data in outputs.items():
            (out_dir / name).write_bytes(data)
        inputs = {"transactions": _sha256_file(config.transactions), "cases": _sha256_file(config.cases)}
        if config.tags is not None:
            inputs["tags"] = _sha256_file(config.tags)
        if config.rates is not None:
            inputs["rates"] = _sha256_file(config.rates)
        manifest = RunManifest(
            tool="caselink",
            version=__version__,
            config=config.analysis_snapshot(),
            inputs=inputs,
            outputs={name: _sha256(data) for name, data in sorted(outputs.items())},
        )
        (out_dir / "run_manifest.json").write_bytes(manifest.to_json())
    return manifest
