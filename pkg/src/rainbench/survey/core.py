"""Real/fake perceptual quiz: session construction, answer collection, and
binary-classification tallies.

A quiz session shows 10 images, 6 drawn from the synthetic-rain pool (truth
"fake") and 4 from the real-rain pool (truth "real"), shuffled. Each answer
counts separately in the evaluation; there is no per-picture or per-person
grouping. The positive class for the confusion matrix defaults to "fake"
(synthetic detected) and is always stated next to the metrics, because the
two conventions transpose the matrix.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from ..errors import (
    AlreadyAnswered,
    EmptyMatrix,
    NoCompleteSessions,
    PoolTooSmall,
    SessionComplete,
    UnknownItem,
)
from ..rng import SplitMix64

FAKE = "fake"
REAL = "real"

DEFAULT_FAKE_COUNT = 6
DEFAULT_REAL_COUNT = 4


@dataclass(frozen=True)
class QuizItem:
    item_id: str
    image_ref: str
    ground_truth: str  # fake iff drawn from the synthetic pool


@dataclass(frozen=True)
class Answer:
    item_id: str
    choice: str
    answered_at: int  # UTC seconds


@dataclass
class SurveySession:
    session_id: str
    seed: int
    items: tuple[QuizItem, ...]
    answers: dict[str, Answer] = field(default_factory=dict)
    fake_count: int = DEFAULT_FAKE_COUNT
    real_count: int = DEFAULT_REAL_COUNT

    def __post_init__(self):
        fakes = sum(1 for i in self.items if i.ground_truth == FAKE)
        reals = sum(1 for i in self.items if i.ground_truth == REAL)
        if (fakes, reals) != (self.fake_count, self.real_count):
            raise ValueError(
                f"session must hold {self.fake_count} fake + {self.real_count} real items, "
                f"got {fakes}+{reals}"
            )
        refs = [i.image_ref for i in self.items]
        if len(set(refs)) != len(refs):
            raise ValueError("duplicate image_refs within a session")
        ids = [i.item_id for i in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item_ids within a session")

    @property
    def state(self) -> str:
        return "complete" if len(self.answers) == len(self.items) else "open"

    @property
    def is_complete(self) -> bool:
        return self.state == "complete"

    def item(self, item_id: str) -> QuizItem:
        for it in self.items:
            if it.item_id == item_id:
                return it
        raise UnknownItem(f"item {item_id!r} does not belong to this session")

    def accuracy(self) -> float:
        correct = sum(
            1 for it in self.items if it.item_id in self.answers
            and self.answers[it.item_id].choice == it.ground_truth
        )
        return correct / len(self.items)

    def fresh_copy(self, session_id: str) -> "SurveySession":
        """Same quiz, new identity, no answers (one participant per session)."""
        return replace(self, session_id=session_id, answers={})


def build_quiz(
    syn_pool: list[str],
    real_pool: list[str],
    seed: int,
    fake_count: int = DEFAULT_FAKE_COUNT,
    real_count: int = DEFAULT_REAL_COUNT,
    session_id: str | None = None,
) -> SurveySession:
    """Draw fake_count synthetic + real_count real images and shuffle them.

    All randomness comes from one SplitMix64 stream seeded with `seed`, so
    the same pools and seed always produce the identical session (ids
    included).
    """
    if len(syn_pool) < fake_count:
        raise PoolTooSmall("synthetic", fake_count, len(syn_pool))
    if len(real_pool) < real_count:
        raise PoolTooSmall("real", real_count, len(real_pool))
    gen = SplitMix64(seed)
    chosen = [(ref, FAKE) for ref in gen.sample(syn_pool, fake_count)]
    chosen += [(ref, REAL) for ref in gen.sample(real_pool, real_count)]
    gen.shuffle(chosen)
    items = tuple(
        QuizItem(item_id=f"q{idx:02d}", image_ref=ref, ground_truth=truth)
        for idx, (ref, truth) in enumerate(chosen)
    )
    return SurveySession(
        session_id=session_id or f"quiz-{seed:016x}",
        seed=seed,
        items=items,
        fake_count=fake_count,
        real_count=real_count,
    )


def submit_answer(
    session: SurveySession, item_id: str, choice: str, now: int | None = None
) -> SurveySession:
    """Record one answer; flips the session to complete on the last one.

    Recorded answers are immutable: a second submission for the same item is
    rejected, as is any submission after completion.
    """
    if choice not in (REAL, FAKE):
        raise ValueError(f"choice must be 'real' or 'fake', got {choice!r}")
    if session.is_complete:
        raise SessionComplete(f"session {session.session_id} already has all answers")
    session.item(item_id)  # raises UnknownItem
    if item_id in session.answers:
        raise AlreadyAnswered(f"item {item_id!r} already answered")
    stamp = int(time.time()) if now is None else int(now)
    session.answers[item_id] = Answer(item_id=item_id, choice=choice, answered_at=stamp)
    return session


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int
    positive_class: str = FAKE

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class SurveyMetrics:
    """Ratios in [0, 1]; a zero-denominator ratio is None, never 0."""

    fpr: float | None
    tpr: float | None
    precision: float | None
    accuracy: float | None


def confusion_matrix(
    sessions: list[SurveySession], positive_class: str = FAKE
) -> ConfusionMatrix:
    """Tally every answer of every complete session; open sessions are
    excluded (their count is surfaced by aggregate_report)."""
    complete = [s for s in sessions if s.is_complete]
    if not complete:
        raise NoCompleteSessions("no complete sessions to tally")
    negative = REAL if positive_class == FAKE else FAKE
    tp = fp = tn = fn = 0
    for session in complete:
        for item in session.items:
            choice = session.answers[item.item_id].choice
            truth = item.ground_truth
            if truth == positive_class:
                if choice == positive_class:
                    tp += 1
                else:
                    fn += 1
            else:
                if choice == negative:
                    tn += 1
                else:
                    fp += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn, positive_class=positive_class)


def survey_metrics(m: ConfusionMatrix) -> SurveyMetrics:
    if m.total == 0:
        raise EmptyMatrix("cannot compute metrics of an empty confusion matrix")

    def ratio(num: int, den: int) -> float | None:
        return None if den == 0 else num / den

    return SurveyMetrics(
        fpr=ratio(m.fp, m.fp + m.tn),
        tpr=ratio(m.tp, m.tp + m.fn),
        precision=ratio(m.tp, m.tp + m.fp),
        accuracy=ratio(m.tp + m.tn, m.total),
    )


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{value * 100:.1f}%"


def aggregate_report(sessions: list[SurveySession], positive_class: str = FAKE) -> bytes:
    """Human-readable survey report; parse_report() reads the matrix back."""
    complete = [s for s in sessions if s.is_complete]
    open_count = len(sessions) - len(complete)
    matrix = confusion_matrix(sessions, positive_class)  # raises NoCompleteSessions
    metrics = survey_metrics(matrix)
    lines = [
        f"Real/fake survey report (positive class: {matrix.positive_class})",
        f"sessions: {len(complete)} complete, {open_count} open (excluded)",
        f"answers tallied: {matrix.total}",
        f"confusion matrix: tp={matrix.tp} fp={matrix.fp} tn={matrix.tn} fn={matrix.fn}",
        f"FPR        {_pct(metrics.fpr)}",
        f"TPR        {_pct(metrics.tpr)}",
        f"Precision  {_pct(metrics.precision)}",
        f"Accuracy   {_pct(metrics.accuracy)}",
        "per-session accuracy: "
        + ", ".join(_pct(s.accuracy()) for s in complete),
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_report(data: bytes) -> ConfusionMatrix:
    """Recover the confusion matrix from an aggregate_report emission."""
    positive = FAKE
    for line in data.decode("utf-8").splitlines():
        if line.startswith("Real/fake survey report"):
            positive = line.split("positive class:")[1].strip(" )")
        if line.startswith("confusion matrix:"):
            cells = dict(part.split("=") for part in line.split(":")[1].split())
            return ConfusionMatrix(
                tp=int(cells["tp"]),
                fp=int(cells["fp"]),
                tn=int(cells["tn"]),
                fn=int(cells["fn"]),
                positive_class=positive,
            )
    raise ValueError("input is not an aggregate_report emission")


