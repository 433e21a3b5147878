#!/usr/bin/env python3
"""Record API responses from the fixture corpus for the UI tests.

Drives the real service app step by step, the same way the UI does
(seed search, then one operator request per step), plus the one-shot /chain
and the CLI chain output for cross-checking. Writes JSON files into
frontend/tests/fixtures/.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from bibsearch.engine import EngineManager, SourcePaths, ingest
from bibsearch.service import create_app

ROOT = Path(__file__).resolve().parents[2]
OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

SEED_TEXT = (
    "distance measurements of supernovae point to an accelerating universe "
    "with a cosmological constant"
)


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        ingest(SourcePaths.in_dir(ROOT / "fixtures"), data_dir)
        manager = EngineManager(data_dir)
        manager.load()
        client = TestClient(create_app(manager))

        def record(name: str, payload: dict) -> dict:
            (OUT / name).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
            print(f"wrote {name}")
            return payload

        seed = record(
            "search_seed.json",
            client.post("/search", json={"abstract": SEED_TEXT, "limit": 3}).json(),
        )
        seed_ids = [e["id"] for e in seed["entries"]]

        similar = record(
            "similar.json",
            client.post("/similar", json={"seed_ids": seed_ids, "limit": 500}).json(),
        )
        alsoread = record(
            "alsoread.json",
            client.post(
                "/op/alsoread",
                json={"ids": [e["id"] for e in similar["entries"]], "limit": 500},
            ).json(),
        )
        references = record(
            "references.json",
            client.post(
                "/op/references",
                json={"ids": [e["id"] for e in alsoread["entries"]], "limit": 500},
            ).json(),
        )
        record(
            "citations.json",
            client.post(
                "/op/citations",
                json={"ids": [e["id"] for e in references["entries"]], "limit": 500},
            ).json(),
        )
        record(
            "chain.json",
            client.post(
                "/chain",
                json={
                    "seed": {"abstract": SEED_TEXT, "limit": 3},
                    "steps": [
                        {"kind": "similar", "limit": 500},
                        {"kind": "alsoread", "limit": 500},
                        {"kind": "references", "limit": 500},
                        {"kind": "citations", "limit": 500},
                    ],
                },
            ).json(),
        )

        cli_output = subprocess.run(
            [
                sys.executable, "-m", "bibsearch.cli", "chain",
                "--data", str(data_dir),
                "--seed-text", SEED_TEXT,
                "--seed-limit", "3",
                "--steps", "similar:500,alsoread:500,references:500,citations:500",
                "--format", "json",
            ],
            capture_output=True,
            text=True,
            check=True,
            cwd=ROOT,
        )
        record("cli_chain.json", json.loads(cli_output.stdout))
    return 0


if __name__ == "__main__":
    sys.exit(main())
