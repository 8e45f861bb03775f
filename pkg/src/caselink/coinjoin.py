"""Equal-output CoinJoin screening.

The multi-input clustering heuristic is unsound for collaborative mixes,
so those get screened out before any co-spend union. The signature looked
for is the classic one: several outputs of identical value, with at least
as many distinct input addresses as equal outputs, so every equal output
can belong to a different participant.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .ledger import LedgerStore, Transaction

# Outputs at or below the network dust limit are change artifacts, not
# mix denominations; they never count towards the equal-output signature.
DUST_THRESHOLD_SATOSHI = 546


@dataclass(frozen=True)
class CoinJoinPolicy:
    enabled: bool = True
    min_equal_outputs: int = 2
    min_output_value: int = DUST_THRESHOLD_SATOSHI

    @classmethod
    def off(cls) -> CoinJoinPolicy:
        return cls(enabled=False)

    def validate(self) -> None:
        if self.min_equal_outputs < 2:
            raise ValueError("min_equal_outputs must be at least 2")
        if self.min_output_value < 1:
            raise ValueError("min_output_value must be positive")


@dataclass(frozen=True)
class CoinJoinVerdict:
    tx_id: str
    is_coinjoin: bool
    # Only set on positive verdicts: the shared denomination and the
    # multiplicity it occurs with (a floor on the participant count).
    matched_output_value: int | None = None
    participant_estimate: int | None = None


def classify(tx: Transaction, policy: CoinJoinPolicy = CoinJoinPolicy()) -> CoinJoinVerdict:
    """Classify one transaction under the given policy.

    Coinbase records are refused: they have no spending participants and
    callers are expected to exclude them before screening.
    """
    if tx.is_coinbase:
        raise ValueError(f"coinbase transaction {tx.tx_id!r} cannot be screened")
    policy.validate()
    if not policy.enabled:
        return CoinJoinVerdict(tx.tx_id, False)
    distinct_inputs = len(tx.input_addresses())
    if distinct_inputs < 2:
        return CoinJoinVerdict(tx.tx_id, False)
    counts = Counter(value for _, value in tx.outputs if value >= policy.min_output_value)
    if not counts:
        return CoinJoinVerdict(tx.tx_id, False)
    # Most frequent eligible value; ties resolve towards the larger value.
    value, freq = max(counts.items(), key=lambda item: (item[1], item[0]))
    if freq < policy.min_equal_outputs:
        return CoinJoinVerdict(tx.tx_id, False)
    if distinct_inputs < freq or len(tx.outputs) < freq:
        return CoinJoinVerdict(tx.tx_id, False)
    return CoinJoinVerdict(tx.tx_id, True, matched_output_value=value, participant_estimate=freq)


def classify_ledger(
    ledger: LedgerStore | Iterable[Transaction],
    policy: CoinJoinPolicy = CoinJoinPolicy(),
) -> dict[str, CoinJoinVerdict]:
    """Verdict for every transaction; coinbase records get a negative one."""
    verdicts: dict[str, CoinJoinVerdict] = {}
    for tx in ledger:
        if tx.is_coinbase:
            verdicts[tx.tx_id] = CoinJoinVerdict(tx.tx_id, False)
        else:
            verdicts[tx.tx_id] = classify(tx, policy)
    return verdicts


def flagged_tx_ids(verdicts: Mapping[str, CoinJoinVerdict]) -> frozenset[str]:
    return frozenset(tx_id for tx_id, v in verdicts.items() if v.is_coinjoin)


def load_policy(path: str) -> CoinJoinPolicy:
    """Read a policy file of key = value lines (f_min, v_min, enabled)."""
    fields = {"enabled": True, "min_equal_outputs": 2, "min_output_value": DUST_THRESHOLD_SATOSHI}
    aliases = {"f_min": "min_equal_outputs", "v_min": "min_output_value"}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key = aliases.get(key, key)
            if key == "enabled":
                if value.lower() not in ("true", "false"):
                    raise ValueError(f"{path}:{lineno}: enabled must be true or false")
                fields["enabled"] = value.lower() == "true"
            elif key in ("min_equal_outputs", "min_output_value"):
                try:
                    fields[key] = int(value)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: {key} must be an integer") from None
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    policy = CoinJoinPolicy(**fields)
    policy.validate()
    return policy


def resolve_policy(flag: str) -> CoinJoinPolicy:
    """Resolve a CLI policy flag: default, off, or custom:<path>."""
    if flag == "default":
        return CoinJoinPolicy()
    if flag == "off":
        return CoinJoinPolicy.off()
    if flag.startswith("custom:"):
        return load_policy(flag.split(":", 1)[1])
    raise ValueError(f"unknown coinjoin policy {flag!r}")
