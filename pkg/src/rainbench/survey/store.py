"""Append-only newline-delimited event log for survey sessions.

One JSON object per line, two event kinds: "session" (a participant started;
carries the full item list including ground truth, which is fine because the
log is server-private) and "answer". Replaying the log from the top rebuilds
every session, which doubles as crash recovery and as the input to the
offline report command.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .core import Answer, QuizItem, SurveySession


class SurveyStore:
    """Single-writer event log; appends are serialized and flushed."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def _append(self, event: dict) -> None:
        line = json.dumps(event, sort_keys=True, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def record_session(self, session: SurveySession) -> None:
        self._append(
            {
                "event": "session",
                "session_id": session.session_id,
                "seed": session.seed,
                "fake_count": session.fake_count,
                "real_count": session.real_count,
                "items": [
                    {
                        "item_id": it.item_id,
                        "image_ref": it.image_ref,
                        "ground_truth": it.ground_truth,
                    }
                    for it in session.items
                ],
            }
        )

    def record_answer(self, session_id: str, answer: Answer) -> None:
        self._append(
            {
                "event": "answer",
                "session_id": session_id,
                "item_id": answer.item_id,
                "choice": answer.choice,
                "answered_at": answer.answered_at,
            }
        )


def replay_log(path: Path | str) -> dict[str, SurveySession]:
    """Rebuild all sessions (with answers) from an event log."""
    path = Path(path)
    sessions: dict[str, SurveySession] = {}
    if not path.exists():
        return sessions
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            kind = event.get("event")
            if kind == "session":
                items = tuple(
                    QuizItem(
                        item_id=it["item_id"],
                        image_ref=it["image_ref"],
                        ground_truth=it["ground_truth"],
                    )
                    for it in event["items"]
                )
                sessions[event["session_id"]] = SurveySession(
                    session_id=event["session_id"],
                    seed=event["seed"],
                    items=items,
                    fake_count=event.get("fake_count", 6),
                    real_count=event.get("real_count", 4),
                )
            elif kind == "answer":
                session = sessions.get(event["session_id"])
                if session is None:
                    raise ValueError(
                        f"{path}:{lineno}: answer for unknown session {event['session_id']!r}"
                    )
                session.answers[event["item_id"]] = Answer(
                    item_id=event["item_id"],
                    choice=event["choice"],
                    answered_at=event["answered_at"],
                )
            else:
                raise ValueError(f"{path}:{lineno}: unknown event kind {kind!r}")
    return sessions
