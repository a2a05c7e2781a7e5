#!/usr/bin/env python3
"""Run the whole loop locally: boot a server on a scratch root, register
synthetic datasets for both tasks, submit the random and popularity baseline
stubs, wait for the runs, and print both leaderboards.

Usage: python scripts/demo_e2e.py [--root DIR] [--port N]
"""

import argparse
import json
import tempfile
import threading
import time
from pathlib import Path

import requests
import uvicorn

from rboard.api import create_app
from rboard.config import PlatformConfig
from rboard.platform import Platform
from rboard.stubs import popularity_baseline_archive, random_scorer_archive
from rboard.synth import CTR_SCHEMA_DOC, TOPN_SCHEMA_DOC, make_ctr_dataset, make_topn_dataset

TOKEN = "demo-token"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default=None)
    parser.add_argument("--port", type=int, default=8423)
    args = parser.parse_args()

    root = Path(args.root) if args.root else Path(tempfile.mkdtemp(prefix="rboard-demo-"))
    platform = Platform(root, PlatformConfig(wall_timeout_seconds=120, workers=2))
    app = create_app(platform, token=TOKEN)
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=args.port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.05)
    base = f"http://127.0.0.1:{args.port}/api/v1"
    print(f"server on {base}, data root {root}")

    try:
        for n in range(2):
            _register(base, f"demo-ctr-{n}", "ctr", make_ctr_dataset(601 + n),
                      dict(CTR_SCHEMA_DOC, split={"secret_seed": 8800 + n}))
            _register(base, f"demo-topn-{n}", "topn", make_topn_dataset(701 + n),
                      dict(TOPN_SCHEMA_DOC, split={"secret_seed": 9900 + n}))
        print("registered 4 datasets")

        submission_ids = []
        for task in ("ctr", "topn"):
            for author, archive in (
                ("random-scorer", random_scorer_archive()),
                ("popularity-baseline", popularity_baseline_archive()),
            ):
                resp = requests.post(
                    f"{base}/submissions",
                    data={"task": task, "author": author, "token": TOKEN},
                    files={"archive": (f"{author}.zip", archive)},
                    timeout=30,
                )
                resp.raise_for_status()
                sid = resp.json()["submission_id"]
                submission_ids.append(sid)
                print(f"submitted {author} for {task}: {sid}")

        for sid in submission_ids:
            while True:
                detail = requests.get(f"{base}/submissions/{sid}", timeout=30).json()
                if detail["status"] in ("completed", "failed"):
                    break
                time.sleep(0.5)
        print("all runs terminal\n")

        for task in ("ctr", "topn"):
            entries = requests.get(f"{base}/leaderboard/{task}", timeout=30).json()
            print(f"== {task} leaderboard ==")
            for pos, entry in enumerate(entries, start=1):
                per = ", ".join(
                    f"{d}: rank {v['rank']}" for d, v in sorted(entry["per_dataset"].items())
                )
                print(
                    f"  {pos}. {entry['author']:<22} mean_rank={entry['mean_rank']:.2f} "
                    f"runtime={entry['total_runtime_seconds']:.1f}s  ({per})"
                )
            print()
    finally:
        server.should_exit = True
        thread.join(timeout=10)


def _register(base, dataset_id, task, raw, schema_doc):
    resp = requests.post(
        f"{base}/datasets",
        data={
            "dataset_id": dataset_id,
            "task": task,
            "name": dataset_id,
            "schema": json.dumps(schema_doc),
            "token": TOKEN,
        },
        files={"raw": ("raw.csv", raw)},
        timeout=60,
    )
    resp.raise_for_status()


if __name__ == "__main__":
    main()
