#!/usr/bin/env python3
"""Record real API payloads as fixtures for the frontend contract tests.

Runs a scratch platform through a small live workflow (the status sequence is
captured while a short-sleeping stub actually executes) and writes JSON
fixtures plus a base64 code archive into frontend/tests/fixtures/.
"""

import base64
import hashlib
import json
import sys
import time
from pathlib import Path
from tempfile import TemporaryDirectory

from fastapi.testclient import TestClient

from rboard.api import create_app
from rboard.config import PlatformConfig
from rboard.platform import Platform
from rboard.stubs import build_archive, popularity_baseline_archive, random_scorer_archive
from rboard.synth import CTR_SCHEMA_DOC, make_ctr_dataset

TOKEN = "fixture-token"

SLOW_SCORER = """\
import argparse, csv, time

parser = argparse.ArgumentParser()
for flag in ("--task", "--train", "--valid", "--output"):
    parser.add_argument(flag)
parser.add_argument("--test-input", dest="test_input")
args = parser.parse_args()

time.sleep(2)
with open(args.test_input, newline="") as fh:
    rows = list(csv.reader(fh))
row_id = rows[0].index("row_id")
with open(args.output, "w", newline="") as fh:
    writer = csv.writer(fh, lineterminator="\\n")
    writer.writerow(["row_id", "score"])
    for row in rows[1:]:
        writer.writerow([row[row_id], "0.5"])
"""


def main():
    out_dir = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)

    with TemporaryDirectory(prefix="rboard-fixtures-") as tmp:
        platform = Platform(Path(tmp), PlatformConfig(wall_timeout_seconds=60, workers=2))
        app = create_app(platform, token=TOKEN)
        with TestClient(app) as client:
            for n in range(2):
                resp = client.post(
                    "/api/v1/datasets",
                    data={
                        "dataset_id": f"fix-ctr-{n}",
                        "task": "ctr",
                        "name": f"Fixture CTR {n}",
                        "schema": json.dumps(
                            dict(CTR_SCHEMA_DOC, split={"secret_seed": 4000 + n})
                        ),
                        "token": TOKEN,
                    },
                    files={"raw": ("raw.csv", make_ctr_dataset(801 + n, n_rows=400))},
                )
                resp.raise_for_status()

            def submit(archive, author):
                resp = client.post(
                    "/api/v1/submissions",
                    data={"task": "ctr", "author": author, "token": TOKEN},
                    files={"archive": (f"{author}.zip", archive)},
                )
                resp.raise_for_status()
                return resp.json()["submission_id"]

            # Status sequence recorded around a live slow-stub run.
            watched = submit(build_archive({"main.py": SLOW_SCORER}), "slow-scorer")
            sequence = [client.get(f"/api/v1/submissions/{watched}").json()]
            deadline = time.monotonic() + 60
            while time.monotonic() < deadline:
                snap = client.get(f"/api/v1/submissions/{watched}").json()
                if snap["runs"] and any(r["status"] == "running" for r in snap["runs"]):
                    if snap != sequence[-1]:
                        sequence.append(snap)
                if snap["status"] in ("completed", "failed"):
                    if snap != sequence[-1]:
                        sequence.append(snap)
                    break
                time.sleep(0.25)
            statuses = [s["status"] for s in sequence]
            assert statuses[-1] == "completed", statuses
            assert any(
                any(r["status"] == "running" for r in s["runs"]) for s in sequence
            ), "no running snapshot captured"

            for author, archive in (
                ("random-scorer", random_scorer_archive()),
                ("popularity-baseline", popularity_baseline_archive()),
            ):
                sid = submit(archive, author)
                while client.get(f"/api/v1/submissions/{sid}").json()["status"] not in (
                    "completed",
                    "failed",
                ):
                    time.sleep(0.25)

            leaderboard = client.get("/api/v1/leaderboard/ctr").json()
            datasets = client.get("/api/v1/datasets").json()
            detail = client.get(f"/api/v1/submissions/{watched}").json()
            (run_id,) = [r["run_id"] for r in detail["runs"][:1]]
            logs = client.get(f"/api/v1/runs/{run_id}/logs").text
            code = client.get(f"/api/v1/submissions/{watched}/code")

            _write(out_dir / "leaderboard_ctr.json", leaderboard)
            _write(out_dir / "datasets.json", datasets)
            _write(out_dir / "submission_sequence.json", sequence)
            _write(out_dir / "submission_completed.json", detail)
            _write(
                out_dir / "code_archive.json",
                {
                    "submission_id": watched,
                    "checksum_header": code.headers["X-Content-Sha256"],
                    "body_b64": base64.b64encode(code.content).decode(),
                    "sha256_of_body": hashlib.sha256(code.content).hexdigest(),
                },
            )
            _write(out_dir / "run_logs.json", {"run_id": run_id, "text": logs})

    print(f"fixtures written to {out_dir}")
    return 0


def _write(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
