"""HTTP interface: submit, monitor, browse leaderboards, download bundles
and code. All reads are public; submission and dataset registration require
the bearer token. No route ever serves the hidden test tree or the seed.
"""

from __future__ import annotations

import hmac
import json
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import (
    ArchiveTooLarge,
    DuplicateId,
    EmptyDataset,
    ImmutableRecord,
    InvalidStateTransition,
    MalformedArchive,
    MissingEntryFile,
    NoDatasetsForTask,
    NotFound,
    OutputInvalid,
    RboardError,
    SchemaViolation,
    Unauthorized,
)
from .platform import Platform
from .registry import TaskType, sha256_hex

API_PREFIX = "/api/v1"

_STATUS_BY_ERROR = {
    NotFound: 404,
    Unauthorized: 401,
    ArchiveTooLarge: 413,
    DuplicateId: 409,
    MissingEntryFile: 400,
    MalformedArchive: 400,
    SchemaViolation: 400,
    EmptyDataset: 400,
    NoDatasetsForTask: 409,
    InvalidStateTransition: 409,
    OutputInvalid: 400,
    ImmutableRecord: 409,
}


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    platform: Platform,
    *,
    token: str,
    manage_workers: bool = True,
    ui_dir: Path | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if manage_workers:
            platform.start_workers()
        try:
            yield
        finally:
            if manage_workers:
                platform.stop_workers()

    app = FastAPI(title="rboard", lifespan=lifespan)

    @app.exception_handler(RboardError)
    async def rboard_error_handler(request: Request, exc: RboardError):
        status = next(
            (s for klass, s in _STATUS_BY_ERROR.items() if isinstance(exc, klass)), 400
        )
        return _error_response(status, exc.code, exc.message)

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _error_response(exc.status_code, code, str(exc.detail))

    def require_token(provided: str | None) -> None:
        if not provided or not hmac.compare_digest(provided, token):
            raise Unauthorized("missing or invalid token")

    # -- datasets --

    @app.get(API_PREFIX + "/datasets")
    def list_datasets(task: str | None = None, offset: int = 0, limit: int = 100):
        task_enum = TaskType(task) if task in ("ctr", "topn") else None
        if task is not None and task_enum is None:
            raise NotFound(f"unknown task {task!r}")
        datasets = platform.list_datasets(task_enum)
        return JSONResponse(content=datasets[offset : offset + limit])

    @app.post(API_PREFIX + "/datasets", status_code=201)
    async def register_dataset(
        dataset_id: str = Form(...),
        task: str = Form(...),
        name: str = Form(""),
        schema_field: str = Form(..., alias="schema"),
        raw: UploadFile = File(...),
        token_field: str = Form("", alias="token"),
    ):
        require_token(token_field)
        try:
            schema_doc = json.loads(schema_field)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"schema field is not valid JSON: {exc}")
        raw_bytes = await raw.read()
        public = platform.register_dataset_payload(
            dataset_id=dataset_id,
            task=task,
            name=name or dataset_id,
            schema_doc=schema_doc,
            raw_bytes=raw_bytes,
        )
        return {"dataset_id": public["dataset_id"]}

    @app.get(API_PREFIX + "/datasets/{dataset_id}/bundle")
    def dataset_bundle(dataset_id: str):
        data = platform.public_bundle_zip(dataset_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{dataset_id}-bundle.zip"',
                "X-Content-Sha256": _sha256(data),
            },
        )

    @app.get(API_PREFIX + "/datasets/{dataset_id}/preprocessing")
    def dataset_preprocessing(dataset_id: str):
        data = platform.preprocessing_archive(dataset_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={"X-Content-Sha256": _sha256(data)},
        )

    # -- submissions --

    @app.post(API_PREFIX + "/submissions", status_code=201)
    async def create_submission(
        task: str = Form(...),
        author: str = Form(...),
        archive: UploadFile = File(...),
        token_field: str = Form("", alias="token"),
    ):
        require_token(token_field)
        data = await archive.read()
        submission_id = platform.submit(data, task, author)
        return {"submission_id": submission_id}

    @app.get(API_PREFIX + "/submissions/{submission_id}")
    def submission_detail(submission_id: str):
        return platform.submission_detail(submission_id)

    @app.get(API_PREFIX + "/submissions/{submission_id}/code")
    def submission_code(submission_id: str):
        data, checksum = platform.code_archive(submission_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{submission_id}.zip"',
                "X-Content-Sha256": checksum,
            },
        )

    # -- runs --

    @app.get(API_PREFIX + "/runs/{run_id}/logs")
    def run_logs(run_id: str):
        return PlainTextResponse(platform.run_logs(run_id))

    # -- leaderboard --

    @app.get(API_PREFIX + "/leaderboard/{task}")
    def leaderboard(task: str, offset: int = 0, limit: int = 100):
        entries = platform.leaderboard(task)
        return JSONResponse(content=entries[offset : offset + limit])

    # Optional same-origin web UI; mounted last so /api/v1 always wins.
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _sha256(data: bytes) -> str:
    return sha256_hex(data)
