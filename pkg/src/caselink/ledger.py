"""Transaction, tag, rate, and case-file ingestion.

Parsers are strict: every record validates or the parse fails with the
offending line number. Values are integer satoshi end to end; EUR exists
only at reporting time via RateTable. All record types are frozen and the
LedgerStore is immutable after construction, so readers never need locks.
"""

from __future__ import annotations

import csv
import io
import json
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date, datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable, Iterator

from .filenumber import FileNumberError, parse_file_number

# Input marker for newly minted coins. Not a real address: it is never
# interned into entity partitions and never counts as a sender.
COINBASE_ADDRESS = "COINBASE"

TAG_CATEGORIES = ("exchange", "service", "spam_campaign", "other")
CASE_CATEGORIES = ("cyberfraud", "sextortion")
ANNOTATION_ROLES = ("perpetrator", "victim")

TRANSACTION_FORMATS = ("jsonl", "csv")


class LedgerParseError(ValueError):
    """Malformed input; message carries the 1-based line number."""

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class RateLookupError(LookupError):
    pass


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    timestamp: int
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]

    @property
    def is_coinbase(self) -> bool:
        return len(self.inputs) == 1 and self.inputs[0][0] == COINBASE_ADDRESS

    def input_addresses(self) -> frozenset[str]:
        return frozenset(addr for addr, _ in self.inputs)

    def output_addresses(self) -> frozenset[str]:
        return frozenset(addr for addr, _ in self.outputs)

    @property
    def input_value(self) -> int:
        return sum(value for _, value in self.inputs)

    @property
    def output_value(self) -> int:
        return sum(value for _, value in self.outputs)

    @property
    def fee(self) -> int:
        # Coinbase records carry the subsidy on the input side, fee is moot.
        return self.input_value - self.output_value


@dataclass(frozen=True)
class AttributionTag:
    address: str
    label: str
    category: str
    is_service: bool


@dataclass(frozen=True)
class CaseRecord:
    """One case file: id, category, owning zone, annotated seed addresses."""

    case_id: str
    category: str
    zone_id: str
    seed_addresses: tuple[tuple[str, str], ...]  # (address, role) pairs

    def addresses_with_role(self, role: str) -> tuple[str, ...]:
        return tuple(addr for addr, r in self.seed_addresses if r == role)

    @property
    def perpetrator_addresses(self) -> tuple[str, ...]:
        return self.addresses_with_role("perpetrator")


class RateTable:
    """Daily EUR/BTC reference rates with nearest-earlier lookup."""

    def __init__(self, rates: Iterable[tuple[date, Decimal]]) -> None:
        entries = sorted(rates, key=lambda item: item[0])
        self._days = [day for day, _ in entries]
        self._rates = [rate for _, rate in entries]

    def __len__(self) -> int:
        return len(self._days)

    def rate_for_day(self, day: date) -> Decimal:
        idx = bisect_right(self._days, day)
        if idx == 0:
            raise RateLookupError(f"no rate at or before {day.isoformat()}")
        return self._rates[idx - 1]

    def rate_for_timestamp(self, timestamp: int) -> Decimal:
        return self.rate_for_day(day_of_timestamp(timestamp))

    def eur_value(self, satoshi: int, timestamp: int) -> Decimal:
        """Convert satoshi to EUR at the day rate of the transaction."""
        rate = self.rate_for_timestamp(timestamp)
        return Decimal(satoshi) * rate / Decimal(100_000_000)


def day_of_timestamp(timestamp: int) -> date:
    """UTC calendar day; day boundaries are UTC midnights everywhere."""
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date()


def _text_lines(source: IO[bytes] | bytes) -> Iterator[str]:
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    yield from io.TextIOWrapper(source, encoding="utf-8", newline="")


def _validate_transaction(
    line: int,
    tx_id: object,
    timestamp: object,
    inputs: list[tuple[str, int]],
    outputs: list[tuple[str, int]],
) -> Transaction:
    if not isinstance(tx_id, str) or not tx_id:
        raise LedgerParseError(line, "tx_id must be a non-empty string")
    if isinstance(timestamp, bool) or not isinstance(timestamp, int):
        raise LedgerParseError(line, "timestamp must be an integer")
    if not inputs:
        raise LedgerParseError(line, "transaction has no inputs")
    if not outputs:
        raise LedgerParseError(line, "transaction has no outputs")
    for side, pairs in (("input", inputs), ("output", outputs)):
        for addr, value in pairs:
            if not addr:
                raise LedgerParseError(line, f"empty {side} address")
            if value <= 0:
                raise LedgerParseError(line, f"{side} value must be positive, got {value}")
    if any(addr == COINBASE_ADDRESS for addr, _ in outputs):
        raise LedgerParseError(line, "coinbase marker cannot receive value")
    if any(addr == COINBASE_ADDRESS for addr, _ in inputs) and len(inputs) != 1:
        raise LedgerParseError(line, "coinbase transactions carry exactly one input")
    return Transaction(tx_id, timestamp, tuple(inputs), tuple(outputs))


def _pairs_from_json(line: int, side: str, raw: object) -> list[tuple[str, int]]:
    if not isinstance(raw, list):
        raise LedgerParseError(line, f"{side} must be a list of [address, value] pairs")
    pairs: list[tuple[str, int]] = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise LedgerParseError(line, f"{side} entry must be an [address, value] pair")
        addr, value = item
        if not isinstance(addr, str):
            raise LedgerParseError(line, f"{side} address must be a string")
        if isinstance(value, bool) or not isinstance(value, int):
            raise LedgerParseError(line, f"{side} value must be an integer satoshi amount")
        pairs.append((addr, value))
    return pairs


def _parse_transactions_jsonl(source: IO[bytes] | bytes) -> list[Transaction]:
    transactions: list[Transaction] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_text_lines(source), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LedgerParseError(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise LedgerParseError(lineno, "record must be a JSON object")
        for key in ("tx_id", "timestamp", "inputs", "outputs"):
            if key not in record:
                raise LedgerParseError(lineno, f"missing field {key!r}")
        tx = _validate_transaction(
            lineno,
            record["tx_id"],
            record["timestamp"],
            _pairs_from_json(lineno, "inputs", record["inputs"]),
            _pairs_from_json(lineno, "outputs", record["outputs"]),
        )
        if tx.tx_id in seen:
            raise LedgerParseError(lineno, f"duplicate tx_id {tx.tx_id!r}")
        seen.add(tx.tx_id)
        transactions.append(tx)
    return transactions


def _pairs_from_cell(line: int, side: str, cell: str) -> list[tuple[str, int]]:
    # Cell syntax: "addr:value;addr:value". Addresses never contain ':' or ';'.
    pairs: list[tuple[str, int]] = []
    if not cell:
        raise LedgerParseError(line, f"empty {side} cell")
    for chunk in cell.split(";"):
        addr, sep, raw_value = chunk.rpartition(":")
        if not sep:
            raise LedgerParseError(line, f"{side} entry {chunk!r} lacks ':' separator")
        try:
            value = int(raw_value)
        except ValueError:
            raise LedgerParseError(line, f"{side} value {raw_value!r} is not an integer") from None
        pairs.append((addr, value))
    return pairs


def _parse_transactions_csv(source: IO[bytes] | bytes) -> list[Transaction]:
    reader = csv.reader(_text_lines(source))
    transactions: list[Transaction] = []
    seen: set[str] = set()
    header: list[str] | None = None
    for row in reader:
        if header is None:
            header = row
            if row != ["tx_id", "timestamp", "inputs", "outputs"]:
                raise LedgerParseError(reader.line_num, f"unexpected header {row!r}")
            continue
        if not row:
            continue
        lineno = reader.line_num
        if len(row) != 4:
            raise LedgerParseError(lineno, f"expected 4 columns, got {len(row)}")
        tx_id, raw_ts, raw_inputs, raw_outputs = row
        try:
            timestamp: object = int(raw_ts)
        except ValueError:
            raise LedgerParseError(lineno, f"timestamp {raw_ts!r} is not an integer") from None
        tx = _validate_transaction(
            lineno,
            tx_id,
            timestamp,
            _pairs_from_cell(lineno, "inputs", raw_inputs),
            _pairs_from_cell(lineno, "outputs", raw_outputs),
        )
        if tx.tx_id in seen:
            raise LedgerParseError(lineno, f"duplicate tx_id {tx.tx_id!r}")
        seen.add(tx.tx_id)
        transactions.append(tx)
    if header is None:
        raise LedgerParseError(1, "missing header row")
    return transactions


def parse_transactions(source: IO[bytes] | bytes, fmt: str = "jsonl") -> list[Transaction]:
    """Parse a transaction export in 'jsonl' or 'csv' format."""
    if fmt == "jsonl":
        return _parse_transactions_jsonl(source)
    if fmt == "csv":
        return _parse_transactions_csv(source)
    raise ValueError(f"unknown transaction format {fmt!r}")


def dump_transactions(transactions: Iterable[Transaction], fmt: str = "jsonl") -> bytes:
    """Serialize transactions; parse(dump(x)) == x for both formats."""
    if fmt == "jsonl":
        lines = []
        for tx in transactions:
            record = {
                "tx_id": tx.tx_id,
                "timestamp": tx.timestamp,
                "inputs": [[addr, value] for addr, value in tx.inputs],
                "outputs": [[addr, value] for addr, value in tx.outputs],
            }
            lines.append(json.dumps(record, separators=(",", ":")))
        return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["tx_id", "timestamp", "inputs", "outputs"])
        for tx in transactions:
            writer.writerow(
                [
                    tx.tx_id,
                    tx.timestamp,
                    ";".join(f"{addr}:{value}" for addr, value in tx.inputs),
                    ";".join(f"{addr}:{value}" for addr, value in tx.outputs),
                ]
            )
        return buffer.getvalue().encode("utf-8")
    raise ValueError(f"unknown transaction format {fmt!r}")


def parse_tags(source: IO[bytes] | bytes) -> list[AttributionTag]:
    """Parse attribution tags: address,label,category,is_service."""
    reader = csv.reader(_text_lines(source))
    tags: list[AttributionTag] = []
    seen: set[tuple[str, str]] = set()
    header: list[str] | None = None
    for row in reader:
        if header is None:
            header = row
            if row != ["address", "label", "category", "is_service"]:
                raise LedgerParseError(reader.line_num, f"unexpected header {row!r}")
            continue
        if not row:
            continue
        lineno = reader.line_num
        if len(row) != 4:
            raise LedgerParseError(lineno, f"expected 4 columns, got {len(row)}")
        address, label, category, raw_service = row
        if not address:
            raise LedgerParseError(lineno, "empty address")
        if category not in TAG_CATEGORIES:
            raise LedgerParseError(lineno, f"unknown tag category {category!r}")
        if raw_service.lower() in ("true", "1"):
            is_service = True
        elif raw_service.lower() in ("false", "0"):
            is_service = False
        else:
            raise LedgerParseError(lineno, f"is_service must be boolean, got {raw_service!r}")
        if category == "exchange" and not is_service:
            raise LedgerParseError(lineno, "exchange tags are service tags by definition")
        if (address, label) in seen:
            raise LedgerParseError(lineno, f"duplicate tag ({address!r}, {label!r})")
        seen.add((address, label))
        tags.append(AttributionTag(address, label, category, is_service))
    if header is None:
        raise LedgerParseError(1, "missing header row")
    return tags


def dump_tags(tags: Iterable[AttributionTag]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["address", "label", "category", "is_service"])
    for tag in tags:
        writer.writerow([tag.address, tag.label, tag.category, "true" if tag.is_service else "false"])
    return buffer.getvalue().encode("utf-8")


def parse_rates(source: IO[bytes] | bytes) -> RateTable:
    """Parse daily reference rates: date,eur_per_btc (ISO dates)."""
    reader = csv.reader(_text_lines(source))
    entries: list[tuple[date, Decimal]] = []
    seen: set[date] = set()
    header: list[str] | None = None
    for row in reader:
        if header is None:
            header = row
            if row != ["date", "eur_per_btc"]:
                raise LedgerParseError(reader.line_num, f"unexpected header {row!r}")
            continue
        if not row:
            continue
        lineno = reader.line_num
        if len(row) != 2:
            raise LedgerParseError(lineno, f"expected 2 columns, got {len(row)}")
        raw_day, raw_rate = row
        try:
            day = date.fromisoformat(raw_day)
        except ValueError:
            raise LedgerParseError(lineno, f"invalid date {raw_day!r}") from None
        try:
            rate = Decimal(raw_rate)
        except InvalidOperation:
            raise LedgerParseError(lineno, f"invalid rate {raw_rate!r}") from None
        if rate <= 0:
            raise LedgerParseError(lineno, f"rate must be positive, got {raw_rate}")
        if day in seen:
            raise LedgerParseError(lineno, f"duplicate rate for {raw_day}")
        seen.add(day)
        entries.append((day, rate))
    if header is None:
        raise LedgerParseError(1, "missing header row")
    return RateTable(entries)


def parse_cases(source: IO[bytes] | bytes) -> list[CaseRecord]:
    """Parse case files: case_id,category,zone_id,address,role, one row per seed."""
    reader = csv.reader(_text_lines(source))
    seeds: dict[str, list[tuple[str, str]]] = {}
    meta: dict[str, tuple[str, str]] = {}
    order: list[str] = []
    header: list[str] | None = None
    for row in reader:
        if header is None:
            header = row
            if row != ["case_id", "category", "zone_id", "address", "role"]:
                raise LedgerParseError(reader.line_num, f"unexpected header {row!r}")
            continue
        if not row:
            continue
        lineno = reader.line_num
        if len(row) != 5:
            raise LedgerParseError(lineno, f"expected 5 columns, got {len(row)}")
        case_id, category, zone_id, address, role = row
        try:
            parse_file_number(case_id)
        except FileNumberError as exc:
            raise LedgerParseError(lineno, f"invalid file number: {exc}") from exc
        if category not in CASE_CATEGORIES:
            raise LedgerParseError(lineno, f"unknown case category {category!r}")
        if not zone_id:
            raise LedgerParseError(lineno, "empty zone_id")
        if not address:
            raise LedgerParseError(lineno, "empty address")
        if role not in ANNOTATION_ROLES:
            raise LedgerParseError(lineno, f"unknown role {role!r}")
        if case_id in meta:
            if meta[case_id] != (category, zone_id):
                raise LedgerParseError(lineno, f"case {case_id} changes category or zone")
        else:
            meta[case_id] = (category, zone_id)
            seeds[case_id] = []
            order.append(case_id)
        if any(addr == address for addr, _ in seeds[case_id]):
            raise LedgerParseError(lineno, f"case {case_id} repeats address {address!r}")
        seeds[case_id].append((address, role))
    if header is None:
        raise LedgerParseError(1, "missing header row")
    return [
        CaseRecord(case_id, meta[case_id][0], meta[case_id][1], tuple(seeds[case_id]))
        for case_id in order
    ]


def dump_cases(cases: Iterable[CaseRecord]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["case_id", "category", "zone_id", "address", "role"])
    for case in cases:
        for address, role in case.seed_addresses:
            writer.writerow([case.case_id, case.category, case.zone_id, address, role])
    return buffer.getvalue().encode("utf-8")


class LedgerStore:
    """Immutable transaction index: by id, by address, in input order."""

    def __init__(self, transactions: Iterable[Transaction]) -> None:
        txs = tuple(transactions)
        by_id: dict[str, Transaction] = {}
        by_address: dict[str, list[str]] = {}
        for tx in txs:
            if tx.tx_id in by_id:
                raise ValueError(f"duplicate tx_id {tx.tx_id!r}")
            by_id[tx.tx_id] = tx
            for addr in sorted(tx.input_addresses() | tx.output_addresses()):
                if addr == COINBASE_ADDRESS:
                    continue
                bucket = by_address.setdefault(addr, [])
                if not bucket or bucket[-1] != tx.tx_id:
                    bucket.append(tx.tx_id)
        self._transactions = txs
        self._by_id = by_id
        self._by_address = {addr: tuple(ids) for addr, ids in by_address.items()}

    def __len__(self) -> int:
        return len(self._transactions)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self._transactions)

    @property
    def transactions(self) -> tuple[Transaction, ...]:
        return self._transactions

    def get(self, tx_id: str) -> Transaction:
        try:
            return self._by_id[tx_id]
        except KeyError:
            raise KeyError(f"unknown tx_id {tx_id!r}") from None

    def has_address(self, address: str) -> bool:
        return address in self._by_address

    def by_address(self, address: str) -> tuple[Transaction, ...]:
        """Exactly the transactions mentioning the address, either side."""
        return tuple(self._by_id[tx_id] for tx_id in self._by_address.get(address, ()))

    def addresses(self) -> frozenset[str]:
        """Every address appearing in the ledger, coinbase marker excluded."""
        return frozenset(self._by_address)


def filter_active_cases(
    cases: Iterable[CaseRecord], ledger: LedgerStore
) -> tuple[list[CaseRecord], int]:
    """Split cases by ledger activity of their perpetrator seeds.

    A case is active when at least one perpetrator-annotated address appears
    in the ledger. Returns (active cases, count of distinct perpetrator
    addresses that never appear). Victim annotations do not make a case
    active; they are context, not chain evidence.
    """
    active: list[CaseRecord] = []
    inactive_addresses: set[str] = set()
    for case in cases:
        found = False
        for addr in case.perpetrator_addresses:
            if ledger.has_address(addr):
                found = True
            else:
                inactive_addresses.add(addr)
        if found:
            active.append(case)
    return active, len(inactive_addresses)
