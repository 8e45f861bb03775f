"""Command line front end.

Subcommands mirror the pipeline stages: ingest (parse and summarize),
link (case clustering), stats (inflow and victim numbers), export (case
network documents), gen (synthetic scenarios), serve (the case service),
token (issue service credentials), run (everything, with manifest).
Global options may appear before or after the subcommand.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .flowstats import inflow_series, victim_estimate
from .ledger import LedgerParseError
from .linking import LINK_LEVELS, link_cases, linkage_rate
from .network import build_network, export_network
from .pipeline import PipelineStageError, build_analysis, load_config, run_pipeline
from .synthgen import ScenarioSpec, generate, parse_scenario_spec, write_scenario


def _add_global_options(parser: argparse.ArgumentParser, top_level: bool) -> None:
    # Defined on the main parser with defaults and on every subparser
    # with SUPPRESS, so the flags work in either position.
    default = None if top_level else argparse.SUPPRESS
    parser.add_argument("--config", default=default, help="run configuration file")
    parser.add_argument(
        "--threads",
        type=int,
        default=1 if top_level else argparse.SUPPRESS,
        help="worker cap for the service; analysis is single-threaded and deterministic",
    )
    parser.add_argument(
        "--out-dir",
        default=default,
        help="override the configured output directory",
    )


def _require_config(args: argparse.Namespace):
    if not args.config:
        raise SystemExit("error: this command needs --config pointing at a run configuration")
    config = load_config(args.config)
    if args.out_dir:
        config = replace(config, out_dir=Path(args.out_dir).resolve())
    if args.threads and args.threads >= 1:
        config = replace(config, threads=args.threads)
    return config


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = _require_config(args)
    bundle = build_analysis(config)
    flagged = sum(1 for v in bundle.verdicts.values() if v.is_coinjoin)
    print(f"transactions        {len(bundle.ledger)}")
    print(f"addresses           {len(bundle.ledger.addresses())}")
    print(f"coinjoin flagged    {flagged}")
    print(f"entities            {bundle.partition.entity_count}")
    print(f"active cases        {len(bundle.cases)}")
    print(f"inactive seed addrs {bundle.inactive_seed_count}")
    return 0


def _cmd_link(args: argparse.Namespace) -> int:
    config = _require_config(args)
    if args.level:
        config = replace(config, level=args.level)
    if args.min_collector_sources is not None:
        config = replace(config, min_collector_sources=args.min_collector_sources)
    bundle = build_analysis(config)
    clustering = link_cases(bundle.cases, config.level, bundle.graph, config.min_collector_sources)
    rate = linkage_rate(clustering)
    print(
        f"level {clustering.level}: {clustering.cluster_count} clusters over "
        f"{clustering.case_count} cases, {clustering.singleton_count} singletons, "
        f"linkage rate {rate:.4f}"
    )
    for cluster in clustering.clusters:
        if cluster.size < 2:
            continue
        ids = ", ".join(cluster.case_ids[:4]) + (" ..." if cluster.size > 4 else "")
        print(f"  [{cluster.size:>3}] {ids}")
    if args.export:
        network = build_network(bundle.cases, clustering, bundle.graph, config.min_collector_sources)
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"network.{args.export}"
        target.write_bytes(export_network(network, args.export))
        print(f"wrote {target}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    config = _require_config(args)
    bundle = build_analysis(config)
    if bundle.rates is None:
        raise SystemExit("error: stats needs a rates file in the configuration")
    seeds = sorted({addr for case in bundle.cases for addr in case.perpetrator_addresses})
    scopes = ("seed", "expanded") if args.scope == "both" else (args.scope,)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for scope in scopes:
        series = inflow_series(bundle.graph, seeds, scope, bundle.rates)
        (out_dir / f"inflow_{scope}.csv").write_bytes(series.to_csv())
        (out_dir / f"inflow_{scope}.json").write_bytes(series.to_json())
        print(
            f"{scope:>8} scope: {len(series.points)} payments, "
            f"{series.total_satoshi} sat, {series.total_eur} EUR"
        )
    estimate = victim_estimate(seeds, bundle.ledger, bundle.partition)
    print(
        f"victim estimate: {estimate.unique_senders} unique senders, "
        f"{estimate.incoming_tx_count} incoming transactions"
    )
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    config = _require_config(args)
    if args.level:
        config = replace(config, level=args.level)
    bundle = build_analysis(config)
    clustering = link_cases(bundle.cases, config.level, bundle.graph, config.min_collector_sources)
    network = build_network(bundle.cases, clustering, bundle.graph, config.min_collector_sources)
    data = export_network(network, args.format)
    if args.output:
        Path(args.output).write_bytes(data)
        print(f"wrote {args.output}")
    else:
        sys.stdout.buffer.write(data)
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = parse_scenario_spec(args.spec) if args.spec else ScenarioSpec()
    scenario = generate(spec)
    written = write_scenario(scenario, args.out)
    print(
        f"generated {len(scenario.transactions)} transactions, "
        f"{len(scenario.cases)} cases, {scenario.metadata['coinjoin_noise_count']} mixes"
    )
    for path in written:
        print(f"  {path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.api import create_app
    from .service.store import CaseStore

    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise SystemExit(f"error: --listen must be host:port, got {args.listen!r}")
    bundle = None
    if args.config:
        bundle = build_analysis(_require_config(args))
    store = CaseStore(args.db)
    app = create_app(store, bundle)
    uvicorn.run(app, host=host, port=int(port), workers=1, log_level="info")
    return 0


def _cmd_token(args: argparse.Namespace) -> int:
    from .service.store import CaseStore

    store = CaseStore(args.db)
    if store.get_zone(args.zone) is None:
        store.create_zone(args.zone, args.zone)
    token = store.issue_token(args.zone, args.member, admin=args.admin)
    kind = "admin" if args.admin else "member"
    print(f"{kind} token for zone {args.zone}: {token}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _require_config(args)
    manifest = run_pipeline(config)
    print(f"wrote {len(manifest.outputs)} artifacts to {config.out_dir}")
    for name in sorted(manifest.outputs):
        print(f"  {name}  {manifest.outputs[name][:12]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caselink",
        description="Link cryptoasset criminal cases through on-chain payment flows.",
    )
    parser.add_argument("--version", action="version", version=f"caselink {__version__}")
    _add_global_options(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse inputs and print corpus summary")
    _add_global_options(p, top_level=False)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("link", help="cluster case files")
    _add_global_options(p, top_level=False)
    p.add_argument("--level", choices=LINK_LEVELS, help="link evidence level")
    p.add_argument("--min-collector-sources", type=int, default=None)
    p.add_argument("--export", choices=("json", "dot"), help="also write the case network")
    p.set_defaults(handler=_cmd_link)

    p = sub.add_parser("stats", help="inflow series and victim estimate")
    _add_global_options(p, top_level=False)
    p.add_argument("--scope", choices=("seed", "expanded", "both"), default="both")
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("export", help="write the case network document")
    _add_global_options(p, top_level=False)
    p.add_argument("--level", choices=LINK_LEVELS)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--output", help="target file (default stdout)")
    p.set_defaults(handler=_cmd_export)

    p = sub.add_parser("gen", help="generate a synthetic scenario")
    p.add_argument("--spec", help="scenario spec file (key = value lines)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("serve", help="run the case-management service")
    _add_global_options(p, top_level=False)
    p.add_argument("--db", required=True, help="sqlite database path")
    p.add_argument("--listen", default="127.0.0.1:8571", help="host:port to bind")
    p.set_defaults(handler=_cmd_serve)

    p = sub.add_parser("token", help="issue a service bearer token")
    p.add_argument("--db", required=True, help="sqlite database path")
    p.add_argument("--zone", required=True, help="zone the token belongs to")
    p.add_argument("--member", default="cli", help="member name recorded for the token")
    p.add_argument("--admin", action="store_true", help="zone-management token")
    p.set_defaults(handler=_cmd_token)

    p = sub.add_parser("run", help="run the whole pipeline and write a manifest")
    _add_global_options(p, top_level=False)
    p.set_defaults(handler=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LedgerParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
