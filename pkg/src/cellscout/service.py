"""Local HTTP/JSON service exposing labeling sessions to the browser UI.

Single process, sessions in memory; each session serializes its mutations
behind a lock while reads may interleave. The service is a thin shell over
the same Session state machine the CLI drives, so an oracle script working
through these endpoints produces the identical final report.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import (
    BudgetExhausted,
    CellscoutError,
    LabelMismatch,
    NotTrained,
    OutOfBounds,
)
from .learner import Session, SessionConfig, Strategy, build_report
from .snapshots import save_session
from .table import (
    CellRef,
    Label,
    LabelSource,
    LabelValue,
    attach_ground_truth,
    load_csv,
    parse_csv_text,
)


@dataclass
class ApiSession:
    session_id: str
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def _batch_payload(handle: ApiSession) -> dict:
    session = handle.session
    batch = session.pending
    payload = {
        "session_id": handle.session_id,
        "phase": session.phase,
        "iteration": session.iteration,
        "labels_used": session.labels_used,
        "budget_remaining": session.budget_remaining,
        "done": session.phase == "done",
        "column": None,
        "column_name": None,
        "cells": [],
    }
    if batch is None:
        return payload
    payload["column"] = batch.column
    payload["column_name"] = session.table.schema[batch.column]
    cells = []
    for i, cell in enumerate(batch.cells):
        rationale = batch.rationale[i] if batch.rationale else None
        cells.append(
            {
                "row": cell.row,
                "col": cell.col,
                "value": session.table.cell(cell.row, cell.col),
                "tuple": list(session.table.row(cell.row)),
                "disagreement": rationale["disagreement"] if rationale else None,
                "certainty": rationale["certainty"] if rationale else None,
            }
        )
    payload["cells"] = cells
    return payload


def _summary_payload(handle: ApiSession, summary) -> dict:
    return {
        "session_id": handle.session_id,
        "iteration": summary.iteration,
        "phase": summary.phase,
        "column": summary.column,
        "labels_used": summary.labels_used,
        "budget_remaining": summary.budget_remaining,
        "done": summary.done,
        "per_column": summary.per_column,
        "global": summary.global_metrics,
    }


def _status_payload(handle: ApiSession) -> dict:
    session = handle.session
    per_column = session.column_reports()
    for entry in per_column:
        entry["top_features"] = session.column_top_features(entry["column"])
    return {
        "session_id": handle.session_id,
        "phase": session.phase,
        "iteration": session.iteration,
        "labels_used": session.labels_used,
        "budget": session.config.budget,
        "budget_remaining": session.budget_remaining,
        "has_ground_truth": session.ground_truth is not None,
        "done": session.phase == "done",
        "convergence": [p.to_dict() for p in session.convergence],
        "per_column": per_column,
    }


def create_app(snapshot_dir: str | None = None, frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cellscout labeling service")
    sessions: dict[str, ApiSession] = {}

    if frontend_dir and os.path.isdir(frontend_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=frontend_dir, html=True), name="ui")

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc))

    def _get(session_id: str) -> ApiSession | None:
        return sessions.get(session_id)

    def _maybe_snapshot(handle: ApiSession) -> None:
        if snapshot_dir:
            os.makedirs(snapshot_dir, exist_ok=True)
            save_session(
                handle.session.snapshot(), os.path.join(snapshot_dir, f"{handle.session_id}.json")
            )

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(400, "bad_request", "body must be valid JSON")
        if not isinstance(body, dict):
            return _error(400, "bad_request", "body must be a JSON object")
        has_header = bool(body.get("has_header", True))
        try:
            if "csv_text" in body:
                table = parse_csv_text(body["csv_text"], has_header)
            elif "csv_path" in body:
                table = load_csv(body["csv_path"], has_header)
            else:
                return _error(400, "bad_request", "provide csv_text or csv_path")
            gt = None
            if "ground_truth_text" in body:
                gt = attach_ground_truth(table, parse_csv_text(body["ground_truth_text"], has_header))
            elif "ground_truth_path" in body:
                gt = attach_ground_truth(table, load_csv(body["ground_truth_path"], has_header))
            config_fields = body.get("config", {})
            if not isinstance(config_fields, dict):
                return _error(400, "bad_request", "config must be a JSON object")
            config = SessionConfig(**_parse_config_fields(config_fields))
            session = Session(table, config, ground_truth=gt)
        except (TypeError, ValueError) as exc:
            return _error(400, "bad_request", f"bad config: {exc}")
        except BudgetExhausted as exc:
            return _error(400, "bad_request", str(exc))
        except CellscoutError as exc:
            return _error(400, "bad_request", str(exc))
        handle = ApiSession(session_id=uuid.uuid4().hex, session=session)
        sessions[handle.session_id] = handle
        _maybe_snapshot(handle)
        return {
            "session_id": handle.session_id,
            "created_at": handle.created_at,
            "n_rows": table.n_rows,
            "n_cols": table.n_cols,
            "schema": list(table.schema),
            "phase": session.phase,
        }

    @app.get("/sessions/{session_id}/batch")
    def get_batch(session_id: str):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with handle.lock:
            return _batch_payload(handle)

    @app.post("/sessions/{session_id}/labels")
    async def post_labels(session_id: str, request: Request):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(400, "bad_request", "body must be valid JSON")
        try:
            labels = _parse_labels(body)
        except ValueError as exc:
            return _error(400, "bad_request", str(exc))
        with handle.lock:
            try:
                summary = handle.session.submit(labels)
            except LabelMismatch as exc:
                return _error(409, "label_mismatch", str(exc))
            except OutOfBounds as exc:
                return _error(400, "bad_request", str(exc))
            except BudgetExhausted as exc:
                return _error(409, "budget_exhausted", str(exc))
            _maybe_snapshot(handle)
            return _summary_payload(handle, summary)

    @app.get("/sessions/{session_id}/status")
    def get_status(session_id: str):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with handle.lock:
            return _status_payload(handle)

    @app.get("/sessions/{session_id}/explain")
    def get_explain(session_id: str, row: int | None = None, col: int | None = None):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        if row is None or col is None:
            return _error(400, "bad_request", "row and col query parameters are required")
        with handle.lock:
            try:
                explanation = handle.session.explain_cell(CellRef(row, col))
            except OutOfBounds as exc:
                return _error(400, "bad_request", str(exc))
            except NotTrained as exc:
                return _error(409, "not_trained", str(exc))
            return {
                "row": row,
                "col": col,
                "steps": [
                    {
                        "feature": s.feature,
                        "name": s.name,
                        "op": s.op,
                        "threshold": s.threshold,
                        "value": s.value,
                    }
                    for s in explanation.steps
                ],
                "leaf": {
                    "erroneous": explanation.erroneous,
                    "correct": explanation.correct,
                    "erroneous_fraction": explanation.erroneous_fraction,
                },
                "verdict": explanation.verdict,
                "text": explanation.render(),
            }

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with handle.lock:
            session = handle.session
            cells = sorted(session.final_predictions())
            items = []
            for cell in cells:
                state = session.columns[cell.col]
                label = session.store.get(cell)
                items.append(
                    {
                        "row": cell.row,
                        "col": cell.col,
                        "probability": float(state.probabilities[cell.row])
                        if state.probabilities is not None
                        else None,
                        "via": "label" if label is not None else "model",
                    }
                )

        def stream():
            yield "["
            for i, item in enumerate(items):
                yield ("," if i else "") + json.dumps(item, sort_keys=True)
            yield "]"

        return StreamingResponse(stream(), media_type="application/json")

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        handle = _get(session_id)
        if handle is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with handle.lock:
            return build_report(handle.session)

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        if session_id not in sessions:
            return _error(404, "unknown_session", f"no session {session_id}")
        del sessions[session_id]
        return {"deleted": True, "session_id": session_id}

    return app


def _parse_config_fields(fields: dict) -> dict:
    known = set(SessionConfig.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    out = dict(fields)
    if "strategy" in out:
        out["strategy"] = Strategy(out["strategy"])
    if "grid" in out:
        out["grid"] = tuple(tuple(g) for g in out["grid"])
    return out


def _parse_labels(body) -> list[Label]:
    if not isinstance(body, dict) or not isinstance(body.get("labels"), list):
        raise ValueError("body must be {\"labels\": [...]}")
    labels = []
    for item in body["labels"]:
        if not isinstance(item, dict):
            raise ValueError("each label must be an object")
        try:
            row = int(item["row"])
            col = int(item["col"])
            value = LabelValue(item["label"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"bad label entry {item!r}: {exc}") from exc
        source = LabelSource(item.get("source", "human"))
        labels.append(Label(cell=CellRef(row, col), value=value, source=source, iteration=0))
    return labels
