"""Command-line client and server launcher.

Client commands talk to a running server (``RBOARD_URL``, ``RBOARD_TOKEN``);
``eval-local`` scores offline through the same evaluation code the server
uses. Exit codes: 0 success, 2 user or contract error, 3 transport error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import requests

EXIT_USER_ERROR = 2
EXIT_TRANSPORT_ERROR = 3
WATCH_INTERVAL_SECONDS = 2.0
TERMINAL_SUBMISSION = ("completed", "failed")


def _base_url() -> str:
    return os.environ.get("RBOARD_URL", "http://127.0.0.1:8000").rstrip("/")


def _token() -> str:
    return os.environ.get("RBOARD_TOKEN", "")


def _request(method: str, path: str, **kwargs) -> requests.Response:
    url = f"{_base_url()}/api/v1{path}"
    try:
        resp = requests.request(method, url, timeout=kwargs.pop("timeout", 120), **kwargs)
    except requests.RequestException as exc:
        click.echo(f"transport error: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT_ERROR)
    if resp.status_code >= 400:
        try:
            body = resp.json()
            detail = f"{body.get('code', 'error')}: {body.get('message', '')}"
        except ValueError:
            detail = resp.text[:500]
        click.echo(f"request failed ({resp.status_code}) {detail}", err=True)
        sys.exit(EXIT_USER_ERROR)
    return resp


@click.group()
def main():
    """Benchmark platform client."""


@main.group()
def dataset():
    """Dataset administration (token required)."""


@dataset.command("register")
@click.option("--task", type=click.Choice(["ctr", "topn"]), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--raw", "raw_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--id", "dataset_id", required=True)
@click.option("--name", default="")
def dataset_register(task, schema_path, raw_path, dataset_id, name):
    """Register a raw CSV with its schema document; prints the dataset id."""
    schema_doc = Path(schema_path).read_text(encoding="utf-8")
    try:
        parsed = json.loads(schema_doc)
    except json.JSONDecodeError as exc:
        click.echo(f"schema file is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)
    display_name = name or parsed.get("name", dataset_id)
    with open(raw_path, "rb") as fh:
        resp = _request(
            "POST",
            "/datasets",
            data={
                "dataset_id": dataset_id,
                "task": task,
                "name": display_name,
                "schema": schema_doc,
                "token": _token(),
            },
            files={"raw": (os.path.basename(raw_path), fh, "text/csv")},
        )
    click.echo(resp.json()["dataset_id"])


@main.command()
@click.option("--task", type=click.Choice(["ctr", "topn"]), required=True)
@click.option("--archive", "archive_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--author", required=True)
def submit(task, archive_path, author):
    """Upload a submission archive; prints the submission id."""
    with open(archive_path, "rb") as fh:
        resp = _request(
            "POST",
            "/submissions",
            data={"task": task, "author": author, "token": _token()},
            files={"archive": (os.path.basename(archive_path), fh, "application/zip")},
        )
    click.echo(resp.json()["submission_id"])


def _print_status(detail: dict) -> None:
    click.echo(f"submission {detail['submission_id']}  status={detail['status']}")
    header = f"{'dataset':<24} {'status':<16} {'seconds':>8}  metrics"
    click.echo(header)
    for run in detail["runs"]:
        wall = run["wall_clock_seconds"]
        wall_text = f"{wall:.2f}" if wall is not None else "-"
        metrics = run["metrics"]
        metric_text = (
            " ".join(f"{k}={v:.6f}" for k, v in sorted(metrics.items()))
            if metrics
            else "-"
        )
        click.echo(
            f"{run['dataset_id']:<24} {run['status']:<16} {wall_text:>8}  {metric_text}"
        )


@main.command()
@click.argument("submission_id")
@click.option("--watch", is_flag=True, help="poll until every run is terminal")
def status(submission_id, watch):
    """Show the per-dataset run table for a submission."""
    while True:
        detail = _request("GET", f"/submissions/{submission_id}").json()
        _print_status(detail)
        if not watch or detail["status"] in TERMINAL_SUBMISSION:
            return
        time.sleep(WATCH_INTERVAL_SECONDS)


@main.command()
@click.argument("task", type=click.Choice(["ctr", "topn"]))
@click.option("--json", "as_json", is_flag=True, help="emit the raw API payload")
def leaderboard(task, as_json):
    """Print the task leaderboard."""
    resp = _request("GET", f"/leaderboard/{task}")
    if as_json:
        # byte-identical to the API response body (no trailing newline)
        sys.stdout.buffer.write(resp.content)
        sys.stdout.buffer.flush()
        return
    entries = resp.json()
    if not entries:
        click.echo("no entries")
        return
    click.echo(f"{'#':<4} {'submission':<18} {'author':<14} {'mean_rank':>9} {'runtime_s':>10}  eligible")
    for position, entry in enumerate(entries, start=1):
        mean_rank = entry["mean_rank"]
        rank_text = f"{mean_rank:.3f}" if mean_rank is not None else "-"
        click.echo(
            f"{position:<4} {entry['submission_id']:<18} {entry['author']:<14} "
            f"{rank_text:>9} {entry['total_runtime_seconds']:>10.2f}  {entry['eligible']}"
        )


@main.command("eval-local")
@click.option("--task", type=click.Choice(["ctr", "topn"]), required=True)
@click.option("--predictions", "predictions_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--label-column", default="label", show_default=True, help="CTR truth label column")
@click.option("--user-column", default="user_id", show_default=True, help="top-N truth user column")
@click.option("--item-column", default="item_id", show_default=True, help="top-N truth item column")
def eval_local(task, predictions_path, truth_path, label_column, user_column, item_column):
    """Score a prediction file offline with the server's evaluation code.

    CTR truth: CSV containing the label column, rows in row_id order.
    Top-N truth: CSV of held-out user/item pairs, one per evaluated user.
    """
    import csv

    from .errors import RboardError
    from .evaluation import evaluate_ctr, evaluate_topn

    try:
        with open(truth_path, newline="", encoding="utf-8") as fh:
            truth_rows = list(csv.reader(fh))
        if not truth_rows:
            raise RboardError("truth file is empty")
        header = truth_rows[0]
        if task == "ctr":
            if label_column not in header:
                raise RboardError(f"truth file lacks label column {label_column!r}")
            idx = header.index(label_column)
            labels = []
            for row in truth_rows[1:]:
                if row[idx] not in ("0", "1"):
                    raise RboardError(f"truth label must be 0 or 1, found {row[idx]!r}")
                labels.append(int(row[idx]))
            result = evaluate_ctr(Path(predictions_path), labels)
        else:
            for column in (user_column, item_column):
                if column not in header:
                    raise RboardError(f"truth file lacks column {column!r}")
            u, i = header.index(user_column), header.index(item_column)
            held_out = {row[u]: row[i] for row in truth_rows[1:]}
            if not held_out:
                raise RboardError("truth file has no held-out pairs")
            result = evaluate_topn(Path(predictions_path), held_out)
    except RboardError as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_USER_ERROR)
    for metric_name in sorted(result.metrics):
        click.echo(f"{metric_name}={result.metrics[metric_name]!r}")


@main.command()
@click.option("--root", type=click.Path(file_okay=False), default=None, help="platform data root")
@click.option("--listen", default=None, help="host:port (default RBOARD_LISTEN or 127.0.0.1:8000)")
@click.option("--token", default=None, help="submission token (default RBOARD_TOKEN)")
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="serve a built web UI from this directory at /")
def serve(root, listen, token, ui_dir):
    """Run the HTTP service with background run workers."""
    import uvicorn

    from .api import create_app
    from .config import config_from_env
    from .platform import Platform

    token = token or _token()
    if not token:
        click.echo("a token is required: pass --token or set RBOARD_TOKEN", err=True)
        sys.exit(EXIT_USER_ERROR)
    config = config_from_env()
    root_dir = Path(root or os.environ.get("RBOARD_ROOT", "rboard_data"))
    platform = Platform(root_dir, config)
    app = create_app(platform, token=token, ui_dir=Path(ui_dir) if ui_dir else None)
    host, _, port = (listen or config.listen).rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
