"""HTTP layer of the survey: anonymous quiz sessions over a JSON API.

Every participant gets their own session over the same 10 quiz images (the
quiz itself is built once from the configured pools and seed, so all judges
see identical stimuli). Open-session payloads never contain ground truth;
results are only served once all answers are in. The aggregate report is
admin-scoped via a shared token (RAINBENCH_ADMIN_TOKEN).
"""

from __future__ import annotations

import mimetypes
import os
import secrets
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import AlreadyAnswered, NoCompleteSessions, SessionComplete, UnknownItem
from .core import SurveySession, build_quiz, confusion_matrix, submit_answer, survey_metrics
from .store import SurveyStore, replay_log

ADMIN_TOKEN_ENV = "RAINBENCH_ADMIN_TOKEN"


class AnswerBody(BaseModel):
    item_id: str
    choice: Literal["real", "fake"]


def create_app(
    syn_pool: list[str],
    real_pool: list[str],
    seed: int,
    log_path: Path | str,
    fake_count: int = 6,
    real_count: int = 4,
    static_dir: Path | str | None = None,
    admin_token: str | None = None,
) -> FastAPI:
    template = build_quiz(syn_pool, real_pool, seed, fake_count=fake_count, real_count=real_count)
    images = {item.item_id: Path(item.image_ref) for item in template.items}
    store = SurveyStore(log_path)
    sessions = replay_log(log_path)
    lock = threading.Lock()
    token = admin_token if admin_token is not None else os.environ.get(ADMIN_TOKEN_ENV, "")

    app = FastAPI(title="rainbench survey")
    app.state.sessions = sessions
    app.state.quiz = template

    def get_session(session_id: str) -> SurveySession:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.post("/api/session")
    def start_session():
        with lock:
            session = template.fresh_copy(session_id=secrets.token_urlsafe(16))
            sessions[session.session_id] = session
            store.record_session(session)
        return {
            "session_id": session.session_id,
            "items": [
                {"item_id": it.item_id, "image_url": f"/api/image/{it.item_id}"}
                for it in session.items
            ],
        }

    @app.get("/api/image/{item_id}")
    def serve_image(item_id: str):
        path = images.get(item_id)
        if path is None or not path.is_file():
            raise HTTPException(status_code=404, detail="unknown item")
        media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return Response(content=path.read_bytes(), media_type=media_type)

    @app.post("/api/session/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody):
        with lock:
            session = get_session(session_id)
            try:
                submit_answer(session, body.item_id, body.choice)
            except UnknownItem:
                raise HTTPException(status_code=404, detail="unknown item")
            except (AlreadyAnswered, SessionComplete) as exc:
                raise HTTPException(status_code=409, detail=type(exc).code)
            store.record_answer(session_id, session.answers[body.item_id])
        return {
            "answered": len(session.answers),
            "remaining": len(session.items) - len(session.answers),
        }

    @app.get("/api/session/{session_id}/result")
    def result(session_id: str):
        session = get_session(session_id)
        if not session.is_complete:
            raise HTTPException(status_code=409, detail="session still open")
        return {
            "session_id": session.session_id,
            "accuracy": session.accuracy(),
            "items": [
                {
                    "item_id": it.item_id,
                    "image_url": f"/api/image/{it.item_id}",
                    "chosen": session.answers[it.item_id].choice,
                    "truth": it.ground_truth,
                    "correct": session.answers[it.item_id].choice == it.ground_truth,
                }
                for it in session.items
            ],
        }

    @app.get("/api/report")
    def report(request: Request):
        supplied = request.headers.get("x-admin-token", "")
        if not token or not secrets.compare_digest(supplied, token):
            raise HTTPException(status_code=401, detail="admin token required")
        all_sessions = list(sessions.values())
        complete = [s for s in all_sessions if s.is_complete]
        doc = {
            "sessions_complete": len(complete),
            "sessions_open": len(all_sessions) - len(complete),
            "matrix": None,
            "metrics": None,
        }
        try:
            matrix = confusion_matrix(all_sessions)
        except NoCompleteSessions:
            return doc
        metrics = survey_metrics(matrix)
        doc["matrix"] = {
            "positive_class": matrix.positive_class,
            "tp": matrix.tp,
            "fp": matrix.fp,
            "tn": matrix.tn,
            "fn": matrix.fn,
            "total": matrix.total,
        }
        doc["metrics"] = {
            "fpr": metrics.fpr,
            "tpr": metrics.tpr,
            "precision": metrics.precision,
            "accuracy": metrics.accuracy,
        }
        return doc

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
