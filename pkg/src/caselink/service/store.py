"""SQLite persistence for the case service.

The schema is deliberately minimal: case ids, categories, zone ids,
addresses, roles, and timestamps. No victim names, no contact data, no
free-text fields; the only personal data the service ever holds is what
an address annotation itself implies. Zones own their cases, and read
access flows only through explicit directional grants.

One shared connection, serialized by a lock; WAL keeps readers cheap.
"""

from __future__ import annotations

import hashlib
import secrets
import sqlite3
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..ledger import ANNOTATION_ROLES, CASE_CATEGORIES, CaseRecord

_SCHEMA = """
CREATE TABLE IF NOT EXISTS zones (
    zone_id TEXT PRIMARY KEY,
    name TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS zone_grants (
    zone_id TEXT NOT NULL REFERENCES zones(zone_id),
    reader_zone_id TEXT NOT NULL,
    PRIMARY KEY (zone_id, reader_zone_id)
);
CREATE TABLE IF NOT EXISTS tokens (
    token_hash TEXT PRIMARY KEY,
    zone_id TEXT NOT NULL REFERENCES zones(zone_id),
    member TEXT NOT NULL,
    is_admin INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS cases (
    case_id TEXT PRIMARY KEY,
    category TEXT NOT NULL,
    zone_id TEXT NOT NULL REFERENCES zones(zone_id),
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS annotations (
    case_id TEXT NOT NULL REFERENCES cases(case_id),
    address TEXT NOT NULL,
    role TEXT NOT NULL CHECK (role IN ('perpetrator', 'victim')),
    author TEXT NOT NULL,
    created_at INTEGER NOT NULL,
    PRIMARY KEY (case_id, address)
);
CREATE TABLE IF NOT EXISTS exchange_requests (
    request_id INTEGER PRIMARY KEY AUTOINCREMENT,
    address TEXT NOT NULL,
    exchange TEXT NOT NULL,
    zone_id TEXT NOT NULL REFERENCES zones(zone_id),
    requested_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_requests_address ON exchange_requests(address);
CREATE INDEX IF NOT EXISTS idx_cases_zone ON cases(zone_id);
"""


class StoreError(Exception):
    pass


class DuplicateError(StoreError):
    pass


class NotFoundError(StoreError):
    pass


@dataclass(frozen=True)
class TokenInfo:
    zone_id: str
    member: str
    is_admin: bool


def _hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


class CaseStore:
    def __init__(self, path: Path | str) -> None:
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA foreign_keys=ON")
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- zones ---------------------------------------------------------

    def create_zone(self, zone_id: str, name: str, readable_by: tuple[str, ...] = ()) -> None:
        if not zone_id:
            raise ValueError("zone_id must be non-empty")
        with self._lock:
            found = self._conn.execute(
                "SELECT 1 FROM zones WHERE zone_id = ?", (zone_id,)
            ).fetchone()
            if found:
                raise DuplicateError(f"zone {zone_id!r} already exists")
            self._conn.execute("INSERT INTO zones VALUES (?, ?)", (zone_id, name))
            for reader in readable_by:
                self._conn.execute(
                    "INSERT OR IGNORE INTO zone_grants VALUES (?, ?)", (zone_id, reader)
                )
            self._conn.commit()

    def get_zone(self, zone_id: str) -> dict | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT zone_id, name FROM zones WHERE zone_id = ?", (zone_id,)
            ).fetchone()
            if row is None:
                return None
            readers = self._conn.execute(
                "SELECT reader_zone_id FROM zone_grants WHERE zone_id = ? ORDER BY reader_zone_id",
                (zone_id,),
            ).fetchall()
        return {
            "zone_id": row["zone_id"],
            "name": row["name"],
            "readable_by": [r["reader_zone_id"] for r in readers],
        }

    def add_grant(self, zone_id: str, reader_zone_id: str) -> None:
        with self._lock:
            if not self._conn.execute(
                "SELECT 1 FROM zones WHERE zone_id = ?", (zone_id,)
            ).fetchone():
                raise NotFoundError(f"zone {zone_id!r} does not exist")
            self._conn.execute(
                "INSERT OR IGNORE INTO zone_grants VALUES (?, ?)", (zone_id, reader_zone_id)
            )
            self._conn.commit()

    def visible_zones(self, zone_id: str) -> frozenset[str]:
        """The caller's own zone plus every zone that granted it access."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT zone_id FROM zone_grants WHERE reader_zone_id = ?", (zone_id,)
            ).fetchall()
        return frozenset({zone_id} | {r["zone_id"] for r in rows})

    # -- tokens --------------------------------------------------------

    def issue_token(self, zone_id: str, member: str, admin: bool = False) -> str:
        with self._lock:
            if not self._conn.execute(
                "SELECT 1 FROM zones WHERE zone_id = ?", (zone_id,)
            ).fetchone():
                raise NotFoundError(f"zone {zone_id!r} does not exist")
            token = secrets.token_hex(16)
            self._conn.execute(
                "INSERT INTO tokens VALUES (?, ?, ?, ?)",
                (_hash_token(token), zone_id, member, int(admin)),
            )
            self._conn.commit()
        return token

    def resolve_token(self, token: str) -> TokenInfo | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT zone_id, member, is_admin FROM tokens WHERE token_hash = ?",
                (_hash_token(token),),
            ).fetchone()
        if row is None:
            return None
        return TokenInfo(row["zone_id"], row["member"], bool(row["is_admin"]))

    # -- cases and annotations ------------------------------------------

    def create_case(self, case_id: str, category: str, zone_id: str) -> dict:
        if category not in CASE_CATEGORIES:
            raise ValueError(f"unknown case category {category!r}")
        with self._lock:
            if self._conn.execute(
                "SELECT 1 FROM cases WHERE case_id = ?", (case_id,)
            ).fetchone():
                raise DuplicateError(f"case {case_id!r} already exists")
            created_at = int(time.time())
            self._conn.execute(
                "INSERT INTO cases VALUES (?, ?, ?, ?)", (case_id, category, zone_id, created_at)
            )
            self._conn.commit()
        return {"case_id": case_id, "category": category, "zone_id": zone_id, "created_at": created_at}

    def get_case(self, case_id: str) -> dict | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT case_id, category, zone_id, created_at FROM cases WHERE case_id = ?",
                (case_id,),
            ).fetchone()
        return dict(row) if row else None

    def list_cases(self, zone_ids: frozenset[str] | None = None) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT case_id, category, zone_id, created_at FROM cases ORDER BY case_id"
            ).fetchall()
        cases = [dict(r) for r in rows]
        if zone_ids is not None:
            cases = [c for c in cases if c["zone_id"] in zone_ids]
        return cases

    def add_annotation(self, case_id: str, address: str, role: str, author: str) -> dict:
        if role not in ANNOTATION_ROLES:
            raise ValueError(f"unknown role {role!r}")
        if not address:
            raise ValueError("address must be non-empty")
        with self._lock:
            if not self._conn.execute(
                "SELECT 1 FROM cases WHERE case_id = ?", (case_id,)
            ).fetchone():
                raise NotFoundError(f"case {case_id!r} does not exist")
            created_at = int(time.time())
            try:
                self._conn.execute(
                    "INSERT INTO annotations VALUES (?, ?, ?, ?, ?)",
                    (case_id, address, role, author, created_at),
                )
            except sqlite3.IntegrityError:
                raise DuplicateError(
                    f"case {case_id!r} already annotates address {address!r}"
                ) from None
            self._conn.commit()
        return {
            "case_id": case_id,
            "address": address,
            "role": role,
            "author": author,
            "created_at": created_at,
        }

    def annotations(self, case_id: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT case_id, address, role, author, created_at FROM annotations "
                "WHERE case_id = ? ORDER BY created_at, address",
                (case_id,),
            ).fetchall()
        return [dict(r) for r in rows]

    def case_records(self) -> list[CaseRecord]:
        """Every stored case as a linkable record (global, unfiltered)."""
        with self._lock:
            case_rows = self._conn.execute(
                "SELECT case_id, category, zone_id FROM cases ORDER BY case_id"
            ).fetchall()
            ann_rows = self._conn.execute(
                "SELECT case_id, address, role FROM annotations ORDER BY case_id, created_at, address"
            ).fetchall()
        seeds: dict[str, list[tuple[str, str]]] = {r["case_id"]: [] for r in case_rows}
        for row in ann_rows:
            seeds[row["case_id"]].append((row["address"], row["role"]))
        return [
            CaseRecord(r["case_id"], r["category"], r["zone_id"], tuple(seeds[r["case_id"]]))
            for r in case_rows
        ]

    # -- exchange requests ----------------------------------------------

    def log_exchange_request(self, address: str, exchange: str, zone_id: str) -> dict:
        if not exchange:
            raise ValueError("exchange must be non-empty")
        with self._lock:
            requested_at = int(time.time())
            cursor = self._conn.execute(
                "INSERT INTO exchange_requests (address, exchange, zone_id, requested_at) "
                "VALUES (?, ?, ?, ?)",
                (address, exchange, zone_id, requested_at),
            )
            self._conn.commit()
        return {
            "request_id": cursor.lastrowid,
            "address": address,
            "exchange": exchange,
            "zone_id": zone_id,
            "requested_at": requested_at,
        }

    def requests_for(self, address: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT request_id, address, exchange, zone_id, requested_at "
                "FROM exchange_requests WHERE address = ? ORDER BY requested_at, request_id",
                (address,),
            ).fetchall()
        return [dict(r) for r in rows]

    # -- introspection ---------------------------------------------------

    def table_columns(self) -> dict[str, list[str]]:
        """Table -> column names; the data-minimization audit surface."""
        with self._lock:
            tables = self._conn.execute(
                "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%'"
            ).fetchall()
            result = {}
            for table in tables:
                cols = self._conn.execute(f"PRAGMA table_info({table['name']})").fetchall()
                result[table["name"]] = [c["name"] for c in cols]
        return result
