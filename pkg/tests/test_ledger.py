from datetime import date
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from caselink.ledger import (
    COINBASE_ADDRESS,
    CaseRecord,
    LedgerParseError,
    LedgerStore,
    RateLookupError,
    Transaction,
    day_of_timestamp,
    dump_cases,
    dump_tags,
    dump_transactions,
    filter_active_cases,
    parse_cases,
    parse_rates,
    parse_tags,
    parse_transactions,
)


# ---------------------------------------------------------------- transactions


def test_jsonl_corpus_shape(ledger):
    assert len(ledger) == 12
    t07 = ledger.get("t07")
    assert t07.inputs == (("P1", 70_000_000), ("P1b", 180_000_000))
    assert t07.outputs == (("C1", 250_000_000),)
    assert t07.fee == 0


def test_csv_parse_matches_jsonl(ledger, data_dir):
    with open(data_dir / "transactions.csv", "rb") as fh:
        from_csv = parse_transactions(fh, "csv")
    assert from_csv == list(ledger)


def test_coinbase_flagging(ledger):
    assert ledger.get("t12").is_coinbase
    assert not ledger.get("t01").is_coinbase
    # subsidy rides on the input side, so the fee nets to zero
    assert ledger.get("t12").input_value == 625_000_000
    assert ledger.get("t12").fee == 0


def test_transaction_accessors(ledger):
    t11 = ledger.get("t11")
    assert t11.input_addresses() == frozenset({"N1", "N2"})
    assert t11.output_addresses() == frozenset({"MX1", "MX2", "D1", "D2"})
    assert t11.input_value == 14_000_179
    assert t11.output_value == 14_000_179


def test_unknown_format_rejected():
    with pytest.raises(ValueError, match="format"):
        parse_transactions(b"", "xml")
    with pytest.raises(ValueError, match="format"):
        dump_transactions([], "xml")


@pytest.mark.parametrize(
    "line,reason",
    [
        (b'{"tx_id": "a", "timestamp": 1}\n', "inputs"),
        (b'{"tx_id": "a", "timestamp": 1, "inputs": [], "outputs": [["B", 1]]}\n', "coinbase|input"),
        (b'{"tx_id": "a", "timestamp": 1, "inputs": [["A", 0]], "outputs": [["B", 1]]}\n', "positive"),
        (b'{"tx_id": "a", "timestamp": 1, "inputs": [["A", true]], "outputs": [["B", 1]]}\n', "integer"),
        (b'{"tx_id": "", "timestamp": 1, "inputs": [["A", 1]], "outputs": [["B", 1]]}\n', "tx_id"),
        (b'{"tx_id": "a", "timestamp": "x", "inputs": [["A", 1]], "outputs": [["B", 1]]}\n', "timestamp"),
        (b"not json\n", "JSON"),
    ],
)
def test_jsonl_rejects_invalid_rows(line, reason):
    with pytest.raises(LedgerParseError, match=reason):
        parse_transactions(line, "jsonl")


def test_parse_error_carries_line_number():
    good = b'{"tx_id": "a", "timestamp": 1, "inputs": [["A", 1]], "outputs": [["B", 1]]}\n'
    with pytest.raises(LedgerParseError) as err:
        parse_transactions(good + b"broken\n", "jsonl")
    assert err.value.line == 2
    assert str(err.value).startswith("line 2:")


def test_duplicate_tx_id_rejected():
    row = b'{"tx_id": "a", "timestamp": 1, "inputs": [["A", 1]], "outputs": [["B", 1]]}\n'
    with pytest.raises(LedgerParseError, match="duplicate"):
        parse_transactions(row + row, "jsonl")


def test_coinbase_rules():
    # the sentinel cannot receive and a reward has exactly one input
    recv = b'{"tx_id": "a", "timestamp": 1, "inputs": [["A", 1]], "outputs": [["COINBASE", 1]]}\n'
    with pytest.raises(LedgerParseError, match="receive"):
        parse_transactions(recv, "jsonl")
    multi = (
        b'{"tx_id": "a", "timestamp": 1,'
        b' "inputs": [["COINBASE", 1], ["A", 1]], "outputs": [["B", 2]]}\n'
    )
    with pytest.raises(LedgerParseError, match="exactly one input"):
        parse_transactions(multi, "jsonl")


def test_csv_rejects_bad_cells():
    header = b"tx_id,timestamp,inputs,outputs\n"
    with pytest.raises(LedgerParseError, match="separator"):
        parse_transactions(header + b"a,1,A,B:1\n", "csv")
    with pytest.raises(LedgerParseError, match="integer"):
        parse_transactions(header + b"a,1,A:x,B:1\n", "csv")


def test_round_trip_corpus_both_formats(ledger):
    txs = list(ledger)
    for fmt in ("jsonl", "csv"):
        assert parse_transactions(dump_transactions(txs, fmt), fmt) == txs


_address = st.text(alphabet="abcdefgh123", min_size=1, max_size=6)
_amount = st.integers(min_value=1, max_value=10**12)
_pairs = st.lists(st.tuples(_address, _amount), min_size=1, max_size=4)


@st.composite
def _transactions(draw):
    txs = []
    for i in range(draw(st.integers(min_value=0, max_value=8))):
        if draw(st.booleans()):
            inputs = [(COINBASE_ADDRESS, draw(_amount))]
        else:
            inputs = draw(_pairs)
        txs.append(
            Transaction(
                tx_id=f"tx{i}",
                timestamp=draw(st.integers(min_value=0, max_value=2**31)),
                inputs=tuple(inputs),
                outputs=tuple(draw(_pairs)),
            )
        )
    return txs


@given(_transactions(), st.sampled_from(["jsonl", "csv"]))
def test_round_trip_random(txs, fmt):
    assert parse_transactions(dump_transactions(txs, fmt), fmt) == txs


# ------------------------------------------------------------------- tags


def test_tags_corpus(tags):
    assert len(tags) == 2
    by_addr = {t.address: t for t in tags}
    assert by_addr["X1"].category == "exchange"
    assert by_addr["X1"].is_service
    assert not by_addr["M1"].is_service


def test_tags_round_trip(tags):
    assert parse_tags(dump_tags(tags)) == tags


def test_exchange_must_be_service():
    rows = b"address,label,category,is_service\nX,Lab,exchange,false\n"
    with pytest.raises(LedgerParseError, match="service"):
        parse_tags(rows)


def test_tag_duplicates_and_category():
    dup = b"address,label,category,is_service\nX,L,other,false\nX,L,other,false\n"
    with pytest.raises(LedgerParseError, match="duplicate"):
        parse_tags(dup)
    bad = b"address,label,category,is_service\nX,L,casino,false\n"
    with pytest.raises(LedgerParseError, match="category"):
        parse_tags(bad)


# ------------------------------------------------------------------- rates


def test_rate_lookup_nearest_earlier(rates):
    assert rates.rate_for_day(date(2021, 3, 3)) == Decimal("45000")
    # gap days fall back to the last preceding row
    assert rates.rate_for_day(date(2021, 3, 1)) == Decimal("40000")
    assert rates.rate_for_day(date(2021, 3, 6)) == Decimal("45000")
    assert rates.rate_for_day(date(2021, 3, 20)) == Decimal("42000")


def test_rate_before_table_start(rates):
    with pytest.raises(RateLookupError):
        rates.rate_for_day(date(2021, 2, 1))


def test_eur_value(rates):
    # 0.3 BTC at the 2021-03-01 effective rate of 40000
    assert rates.eur_value(30_000_000, 1_614_600_000) == Decimal("12000")


def test_day_of_timestamp_is_utc():
    assert day_of_timestamp(1_614_556_799) == date(2021, 2, 28)
    assert day_of_timestamp(1_614_556_800) == date(2021, 3, 1)


def test_rates_reject_duplicates_and_nonpositive():
    with pytest.raises(LedgerParseError, match="duplicate"):
        parse_rates(b"date,eur_per_btc\n2021-01-01,10\n2021-01-01,11\n")
    with pytest.raises(LedgerParseError, match="positive"):
        parse_rates(b"date,eur_per_btc\n2021-01-01,0\n")
    with pytest.raises(LedgerParseError, match="date"):
        parse_rates(b"date,eur_per_btc\nfirst of may,10\n")


# ------------------------------------------------------------------- cases


def test_cases_corpus(all_cases):
    assert [c.case_id for c in all_cases] == [
        "BY1001-000001-21/1",
        "BY1002-000002-21/2",
        "BY1003-000003-21/3",
        "BY1004-000005-21/5",
        "BY2001-000004-21/4",
    ]
    f1 = all_cases[0]
    assert f1.category == "cyberfraud"
    assert f1.zone_id == "Z1"
    assert f1.perpetrator_addresses == ("P1",)
    assert f1.addresses_with_role("victim") == ("A1",)


def test_cases_round_trip(all_cases):
    assert parse_cases(dump_cases(all_cases)) == all_cases


def test_case_rejects_invalid_file_number():
    rows = b"case_id,category,zone_id,address,role\nnot-a-number,cyberfraud,Z1,P1,perpetrator\n"
    with pytest.raises(LedgerParseError, match="file number"):
        parse_cases(rows)


def test_case_rejects_role_and_category():
    head = b"case_id,category,zone_id,address,role\n"
    with pytest.raises(LedgerParseError, match="role"):
        parse_cases(head + b"BY1001-000001-21/1,cyberfraud,Z1,P1,witness\n")
    with pytest.raises(LedgerParseError, match="category"):
        parse_cases(head + b"BY1001-000001-21/1,arson,Z1,P1,perpetrator\n")


def test_case_field_consistency():
    head = b"case_id,category,zone_id,address,role\n"
    rows = (
        head
        + b"BY1001-000001-21/1,cyberfraud,Z1,P1,perpetrator\n"
        + b"BY1001-000001-21/1,sextortion,Z1,P2,perpetrator\n"
    )
    with pytest.raises(LedgerParseError, match="category"):
        parse_cases(rows)
    rows = (
        head
        + b"BY1001-000001-21/1,cyberfraud,Z1,P1,perpetrator\n"
        + b"BY1001-000001-21/1,cyberfraud,Z2,P2,perpetrator\n"
    )
    with pytest.raises(LedgerParseError, match="zone"):
        parse_cases(rows)
    rows = (
        head
        + b"BY1001-000001-21/1,cyberfraud,Z1,P1,perpetrator\n"
        + b"BY1001-000001-21/1,cyberfraud,Z1,P1,victim\n"
    )
    with pytest.raises(LedgerParseError, match="repeats"):
        parse_cases(rows)


# ------------------------------------------------------------------- store


def test_store_lookups(ledger):
    assert [tx.tx_id for tx in ledger.by_address("A1")] == ["t01", "t05", "t10"]
    assert ledger.by_address("nope") == ()
    assert ledger.has_address("C1")
    assert not ledger.has_address(COINBASE_ADDRESS)
    assert ledger.by_address(COINBASE_ADDRESS) == ()
    assert COINBASE_ADDRESS not in ledger.addresses()
    assert len(ledger.addresses()) == 18


def test_store_get_unknown(ledger):
    with pytest.raises(KeyError):
        ledger.get("t99")


def test_store_rejects_duplicate_ids(ledger):
    tx = ledger.get("t01")
    with pytest.raises(ValueError, match="duplicate"):
        LedgerStore([tx, tx])


def test_active_case_filter(all_cases, ledger):
    active, inactive_seeds = filter_active_cases(all_cases, ledger)
    assert [c.case_id for c in active] == [
        "BY1001-000001-21/1",
        "BY1002-000002-21/2",
        "BY1004-000005-21/5",
        "BY2001-000004-21/4",
    ]
    # only the absent perpetrator address counts; the absent victim does not
    assert inactive_seeds == 1


def test_victim_only_case_is_inactive(ledger):
    cases = [
        CaseRecord(
            case_id="BY1001-000009-21/9",
            category="cyberfraud",
            zone_id="Z1",
            seed_addresses=(("A1", "victim"),),
        )
    ]
    active, inactive_seeds = filter_active_cases(cases, ledger)
    assert active == []
    assert inactive_seeds == 0
