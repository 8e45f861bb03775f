"""Synthetic case corpora with known ground truth.

A scenario is a set of extortion or fraud campaigns. Each campaign owns a
wallet of payment addresses, victims pay them, and the campaign finally
sweeps everything into a collector address. Knobs control
address reuse across cases, extra in-wallet co-spending, custodial
(exchange-hosted) payment addresses, collector sharing, and injected
CoinJoin noise. Because the wallet and campaign structure is known, the
generated corpus doubles as an oracle: clustering, case linkage, and
inflow numbers are all predictable from the spec.

Determinism: every draw comes from stdlib random.Random (Mersenne
Twister), with separate streams for the base scenario and the noise, so
toggling noise cannot move a single base byte. The same spec always
emits identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from datetime import date, timedelta
from decimal import Decimal
from pathlib import Path
from typing import Mapping

from .ledger import (
    AttributionTag,
    CaseRecord,
    RateTable,
    Transaction,
    dump_cases,
    dump_tags,
    dump_transactions,
)
from .linking import CaseClustering

RNG_IDENTITY = "mt19937(python-random)"

EPOCH_START = 1_609_459_200  # 2021-01-01T00:00:00 UTC
TX_INTERVAL = 600

PAYMENT_VALUE_MODELS = ("fraud_like", "sextortion_like")

# Log-normal EUR payment models. fraud_like peaks around 2k EUR with a
# heavy tail past 100k; sextortion_like stays under 1k EUR by rejection.
_FRAUD_MU, _FRAUD_SIGMA = 8.881, 1.132
_SEXTORTION_MU, _SEXTORTION_SIGMA = 6.011, 0.7
_SEXTORTION_CAP_EUR = 1_000.0

_MIX_DENOMINATION = 5_000_000
_EXCHANGE_FLOAT = 10_000_000
_SWEEP_FEE = 1_000


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 1
    n_campaigns: int = 1
    cases_per_campaign: int = 1
    address_reuse_prob: float = 0.0
    wallet_cospend_prob: float = 0.0
    collector_fanin: int = 1
    payment_value_model: str = "sextortion_like"
    custodial_reuse_prob: float = 0.0
    coinjoin_noise_prob: float = 0.0
    # Optional extras: explicit per-campaign case counts (overrides the
    # two counts above), unreported extra victim payments per case, and
    # an address namespace so scenarios can be merged without collisions.
    campaign_sizes: tuple[int, ...] | None = None
    hidden_payment_ratio: float = 0.0
    label: str | None = None

    def validate(self) -> None:
        for name in (
            "address_reuse_prob",
            "wallet_cospend_prob",
            "custodial_reuse_prob",
            "coinjoin_noise_prob",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.n_campaigns < 1:
            raise ValueError("n_campaigns must be at least 1")
        if self.cases_per_campaign < 1:
            raise ValueError("cases_per_campaign must be at least 1")
        if self.collector_fanin < 1:
            raise ValueError("collector_fanin must be at least 1")
        if self.payment_value_model not in PAYMENT_VALUE_MODELS:
            raise ValueError(f"unknown payment_value_model {self.payment_value_model!r}")
        if self.campaign_sizes is not None and (
            not self.campaign_sizes or any(k < 1 for k in self.campaign_sizes)
        ):
            raise ValueError("campaign_sizes must be non-empty positive counts")
        if self.hidden_payment_ratio < 0:
            raise ValueError("hidden_payment_ratio must be non-negative")

    @property
    def sizes(self) -> tuple[int, ...]:
        if self.campaign_sizes is not None:
            return self.campaign_sizes
        return (self.cases_per_campaign,) * self.n_campaigns

    @property
    def namespace(self) -> str:
        return self.label if self.label is not None else f"s{self.seed}"

    @property
    def category(self) -> str:
        return "cyberfraud" if self.payment_value_model == "fraud_like" else "sextortion"


@dataclass(frozen=True)
class GroundTruth:
    address_wallet: dict[str, str]
    case_campaign: dict[str, str]
    campaign_collector: dict[str, str]
    collector_addresses: frozenset[str]
    coinjoin_tx_ids: frozenset[str]
    service_wallets: frozenset[str]

    def payload(self) -> dict:
        return {
            "address_wallet": dict(sorted(self.address_wallet.items())),
            "case_campaign": dict(sorted(self.case_campaign.items())),
            "campaign_collector": dict(sorted(self.campaign_collector.items())),
            "collector_addresses": sorted(self.collector_addresses),
            "coinjoin_tx_ids": sorted(self.coinjoin_tx_ids),
            "service_wallets": sorted(self.service_wallets),
        }


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    transactions: tuple[Transaction, ...]
    cases: tuple[CaseRecord, ...]
    tags: tuple[AttributionTag, ...]
    rate_rows: tuple[tuple[date, Decimal], ...]
    truth: GroundTruth
    metadata: dict

    def rate_table(self) -> RateTable:
        return RateTable(self.rate_rows)


def reference_rate(day: date) -> Decimal:
    """Synthetic EUR/BTC day rate: flat 20k with a small weekly wobble."""
    day_index = (day - date(2021, 1, 1)).days
    return Decimal(20_000 + 150 * (day_index % 5))


def _draw_eur(rng: random.Random, model: str) -> float:
    if model == "fraud_like":
        return rng.lognormvariate(_FRAUD_MU, _FRAUD_SIGMA)
    while True:
        value = rng.lognormvariate(_SEXTORTION_MU, _SEXTORTION_SIGMA)
        if value < _SEXTORTION_CAP_EUR:
            return value


def generate(spec: ScenarioSpec) -> Scenario:
    """Generate the scenario for a spec; same spec, same bytes."""
    spec.validate()
    ns = spec.namespace
    rng = random.Random(f"base:{spec.seed}")
    noise_rng = random.Random(f"noise:{spec.seed}")
    sizes = spec.sizes

    transactions: list[Transaction] = []
    cases: list[CaseRecord] = []
    balances: dict[str, int] = {}
    address_wallet: dict[str, str] = {}
    case_campaign: dict[str, str] = {}
    campaign_collector: dict[str, str] = {}
    collector_addresses: set[str] = set()
    own_by_campaign: list[list[str]] = []

    exchange_wallet = f"{ns}-exchange"
    hot_addr = f"{ns}xhot"
    float_addr = f"{ns}xfloat"
    hot_funded = False
    any_custodial = False

    clock = EPOCH_START
    victim_n = 0
    custodial_n = 0
    mix_n = 0
    case_seq = 0

    def emit(inputs: list[tuple[str, int]], outputs: list[tuple[str, int]]) -> Transaction:
        nonlocal clock
        tx = Transaction(f"{ns}-tx{len(transactions)}", clock, tuple(inputs), tuple(outputs))
        clock += TX_INTERVAL
        transactions.append(tx)
        return tx

    def pay(source: str, target: str, value: int) -> None:
        emit([(source, value)], [(target, value)])
        balances[target] = balances.get(target, 0) + value

    def satoshi_at_clock(eur: float) -> int:
        day = date(2021, 1, 1) + timedelta(days=(clock - EPOCH_START) // 86_400)
        return max(1, round(eur / float(reference_rate(day)) * 100_000_000))

    for ci, campaign_cases in enumerate(sizes):
        campaign_id = f"{ns}-c{ci}"
        wallet_id = f"{ns}-w{ci}"
        own_addrs: list[str] = []
        hidden_addrs: list[str] = []
        perp_n = 0

        for _ in range(campaign_cases):
            case_seq += 1
            case_id = f"BY{1000 + ci:04d}-{case_seq:06d}-21/{case_seq % 10}"
            if rng.random() < spec.custodial_reuse_prob:
                seed_addr = f"{ns}x{custodial_n}"
                custodial_n += 1
                any_custodial = True
                address_wallet[seed_addr] = exchange_wallet
                custodial = True
            else:
                if own_addrs and rng.random() < spec.address_reuse_prob:
                    seed_addr = rng.choice(own_addrs)
                else:
                    seed_addr = f"{ns}c{ci}p{perp_n}"
                    perp_n += 1
                    own_addrs.append(seed_addr)
                    address_wallet[seed_addr] = wallet_id
                custodial = False
            victim_addr = f"{ns}v{victim_n}"
            victim_n += 1
            address_wallet[victim_addr] = f"{ns}-victim{victim_n - 1}"
            pay(victim_addr, seed_addr, satoshi_at_clock(_draw_eur(rng, spec.payment_value_model)))
            rows: list[tuple[str, str]] = [(seed_addr, "perpetrator")]
            if spec.payment_value_model == "fraud_like":
                rows.append((victim_addr, "victim"))
            cases.append(CaseRecord(case_id, spec.category, "Z0", tuple(rows)))
            case_campaign[case_id] = campaign_id
            if custodial:
                # The exchange promptly consolidates the deposit into its
                # hot wallet; that co-spend is what glues all custodial
                # addresses into one service entity.
                if not hot_funded:
                    address_wallet[hot_addr] = exchange_wallet
                    address_wallet[float_addr] = exchange_wallet
                    pay(float_addr, hot_addr, _EXCHANGE_FLOAT)
                    hot_funded = True
                total = balances[seed_addr] + balances[hot_addr]
                emit([(seed_addr, balances[seed_addr]), (hot_addr, balances[hot_addr])], [(hot_addr, total)])
                balances[seed_addr] = 0
                balances[hot_addr] = total

        for h in range(round(campaign_cases * spec.hidden_payment_ratio)):
            hidden_addr = f"{ns}c{ci}h{h}"
            hidden_addrs.append(hidden_addr)
            address_wallet[hidden_addr] = wallet_id
            victim_addr = f"{ns}v{victim_n}"
            victim_n += 1
            address_wallet[victim_addr] = f"{ns}-victim{victim_n - 1}"
            pay(victim_addr, hidden_addr, satoshi_at_clock(_draw_eur(rng, spec.payment_value_model)))

        wallet_addrs = own_addrs + hidden_addrs
        for idx in range(1, len(wallet_addrs)):
            if rng.random() < spec.wallet_cospend_prob:
                a, b = wallet_addrs[idx], wallet_addrs[idx - 1]
                if balances.get(a, 0) > 0 and balances.get(b, 0) > 0:
                    # In-wallet consolidation of a into b.
                    total = balances[a] + balances[b]
                    emit([(a, balances[a]), (b, balances[b])], [(b, total)])
                    balances[a] = 0
                    balances[b] = total

        group = ci // spec.collector_fanin
        collector_addr = f"{ns}k{group}"
        address_wallet.setdefault(collector_addr, f"{ns}-collector{group}")
        collector_addresses.add(collector_addr)
        campaign_collector[campaign_id] = collector_addr
        sweep_inputs = [(a, balances[a]) for a in wallet_addrs if balances.get(a, 0) > 0]
        if sweep_inputs:
            total = sum(v for _, v in sweep_inputs)
            fee = _SWEEP_FEE if total > 1_000_000 else 0
            emit(sweep_inputs, [(collector_addr, total - fee)])
            for a, _ in sweep_inputs:
                balances[a] = 0
            balances[collector_addr] = balances.get(collector_addr, 0) + total - fee
        own_by_campaign.append(own_addrs)

    coinjoin_ids: set[str] = set()
    eligible = [ci for ci in range(len(sizes)) if own_by_campaign[ci]]
    if len(eligible) >= 2 and spec.coinjoin_noise_prob > 0:
        for _ in range(sum(sizes)):
            if noise_rng.random() >= spec.coinjoin_noise_prob:
                continue
            k = noise_rng.randint(2, min(4, len(eligible)))
            chosen = noise_rng.sample(eligible, k)
            inputs: list[tuple[str, int]] = []
            outputs: list[tuple[str, int]] = []
            for ci in chosen:
                participant = noise_rng.choice(own_by_campaign[ci])
                change = noise_rng.randint(10_000, 500_000)
                inputs.append((participant, _MIX_DENOMINATION + change))
                mix_addr = f"{ns}m{mix_n}"
                change_addr = f"{ns}mc{mix_n}"
                mix_n += 1
                outputs.append((mix_addr, _MIX_DENOMINATION))
                outputs.append((change_addr, change))
                address_wallet[mix_addr] = f"{ns}-mix{mix_n - 1}"
                address_wallet[change_addr] = address_wallet[participant]
            coinjoin_ids.add(emit(inputs, outputs).tx_id)

    tags: list[AttributionTag] = []
    if any_custodial:
        tags.append(AttributionTag(hot_addr, "SyntheticExchange", "exchange", True))

    first_day = date(2021, 1, 1)
    last_day = first_day + timedelta(days=(transactions[-1].timestamp - EPOCH_START) // 86_400)
    rate_rows = tuple(
        (first_day + timedelta(days=i), reference_rate(first_day + timedelta(days=i)))
        for i in range((last_day - first_day).days + 1)
    )

    truth = GroundTruth(
        address_wallet=address_wallet,
        case_campaign=case_campaign,
        campaign_collector=campaign_collector,
        collector_addresses=frozenset(collector_addresses),
        coinjoin_tx_ids=frozenset(coinjoin_ids),
        service_wallets=frozenset({exchange_wallet} if any_custodial else set()),
    )
    metadata = {
        "generator": "caselink-synthgen",
        "rng": RNG_IDENTITY,
        "spec": _spec_payload(spec),
        "case_count": len(cases),
        "transaction_count": len(transactions),
        "coinjoin_noise_count": len(coinjoin_ids),
    }
    return Scenario(spec, tuple(transactions), tuple(cases), tuple(tags), rate_rows, truth, metadata)


def _spec_payload(spec: ScenarioSpec) -> dict:
    payload = asdict(spec)
    if payload["campaign_sizes"] is not None:
        payload["campaign_sizes"] = list(payload["campaign_sizes"])
    return payload


def write_scenario(scenario: Scenario, out_dir: Path | str) -> list[Path]:
    """Write the scenario corpus; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rates_csv = "date,eur_per_btc\n" + "".join(
        f"{day.isoformat()},{rate}\n" for day, rate in scenario.rate_rows
    )
    files = {
        "transactions.jsonl": dump_transactions(scenario.transactions, "jsonl"),
        "cases.csv": dump_cases(scenario.cases),
        "tags.csv": dump_tags(scenario.tags),
        "rates.csv": rates_csv.encode("utf-8"),
        "ground_truth.json": (json.dumps(scenario.truth.payload(), indent=2) + "\n").encode(),
        "metadata.json": (json.dumps(scenario.metadata, indent=2, sort_keys=True) + "\n").encode(),
    }
    written = []
    for name, data in files.items():
        path = out / name
        path.write_bytes(data)
        written.append(path)
    return written


_SPEC_KEY_TYPES = {
    "seed": int,
    "n_campaigns": int,
    "cases_per_campaign": int,
    "address_reuse_prob": float,
    "wallet_cospend_prob": float,
    "collector_fanin": int,
    "payment_value_model": str,
    "custodial_reuse_prob": float,
    "coinjoin_noise_prob": float,
    "hidden_payment_ratio": float,
    "label": str,
}


def parse_scenario_spec(path: Path | str) -> ScenarioSpec:
    """Read a scenario spec of key = value lines."""
    fields: dict[str, object] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            if key == "campaign_sizes":
                try:
                    fields[key] = tuple(int(part) for part in value.split(",") if part.strip())
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: campaign_sizes must be integers") from None
            elif key in _SPEC_KEY_TYPES:
                caster = _SPEC_KEY_TYPES[key]
                try:
                    fields[key] = caster(value)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: {key} must be {caster.__name__}"
                    ) from None
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    spec = ScenarioSpec(**fields)  # type: ignore[arg-type]
    spec.validate()
    return spec


def pairwise_precision_recall(
    clustering: CaseClustering, case_campaign: Mapping[str, str]
) -> tuple[float, float]:
    """Pairwise linkage quality against the true campaign grouping.

    A pair of cases is predicted-linked when they share a cluster and
    true-linked when they share a campaign. Empty denominators read as
    perfect (nothing wrongly linked, nothing missed).
    """
    cluster_of: dict[str, int] = {}
    for idx, cluster in enumerate(clustering.clusters):
        for case_id in cluster.case_ids:
            cluster_of[case_id] = idx
    case_ids = sorted(cluster_of)
    predicted = 0
    true = 0
    both = 0
    for i, a in enumerate(case_ids):
        for b in case_ids[i + 1 :]:
            same_pred = cluster_of[a] == cluster_of[b]
            same_true = case_campaign.get(a) == case_campaign.get(b)
            predicted += same_pred
            true += same_true
            both += same_pred and same_true
    precision = both / predicted if predicted else 1.0
    recall = both / true if true else 1.0
    return precision, recall
