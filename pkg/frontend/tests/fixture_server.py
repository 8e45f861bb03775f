#!/usr/bin/env python3
"""Throwaway case service for frontend tests.

Loads the repository's hand-checked ledger corpus, creates two zones with
one member token each plus an admin token, prints a single JSON line with
the URL and tokens, then serves until killed. The test runner owns the
process lifetime.
"""

import json
import socket
import sys
import tempfile
from pathlib import Path

import uvicorn

from caselink.pipeline import PipelineConfig, build_analysis
from caselink.service.api import create_app
from caselink.service.store import CaseStore

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="caseconnect_fixture_"))
    store = CaseStore(workdir / "cases.db")
    store.create_zone("ZA", "Zone Alpha")
    store.create_zone("ZB", "Zone Beta")
    analysis = build_analysis(
        PipelineConfig(
            transactions=DATA / "transactions.jsonl",
            cases=DATA / "cases.csv",
            tags=DATA / "tags.csv",
            rates=DATA / "rates.csv",
            out_dir=workdir,
        )
    )
    port = free_port()
    print(
        json.dumps(
            {
                "url": f"http://127.0.0.1:{port}",
                "tokens": {
                    "za": store.issue_token("ZA", "alice"),
                    "zb": store.issue_token("ZB", "berta"),
                    "admin": store.issue_token("ZA", "root", admin=True),
                },
            }
        ),
        flush=True,
    )
    uvicorn.run(create_app(store, analysis), host="127.0.0.1", port=port, log_level="error")


if __name__ == "__main__":
    sys.exit(main())
