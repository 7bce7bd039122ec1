from .core import (
    Answer,
    ConfusionMatrix,
    QuizItem,
    SurveyMetrics,
    SurveySession,
    aggregate_report,
    build_quiz,
    confusion_matrix,
    parse_report,
    submit_answer,
    survey_metrics,
)
from .store import SurveyStore, replay_log

__all__ = [
    "Answer",
    "ConfusionMatrix",
    "QuizItem",
    "SurveyMetrics",
    "SurveySession",
    "SurveyStore",
    "aggregate_report",
    "build_quiz",
    "confusion_matrix",
    "parse_report",
    "replay_log",
    "submit_answer",
    "survey_metrics",
]
