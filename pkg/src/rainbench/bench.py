"""Benchmark runner: scores de-rained model outputs over a manifest's test
split and emits per-model statistics, per-pair score exports, and annotated
comparison galleries.

Per test pair the baseline score is (clean vs rain); each model contributes
(clean vs model output). A model's gain is its mean score minus the baseline
mean. The sample standard deviation (n-1 denominator) is used throughout;
other tools sometimes report the population form, so comparisons across
tools should check this first.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import DatasetManifest
from .errors import DimensionMismatch, EmptyInput, MissingOutput
from .fsio import atomic_write_bytes
from .imaging import ImageBuffer, decode_image, encode_image, to_luma
from .metrics import QualityScore, mse, psnr, psnr_hvs_m, ssim

BASELINE_LABEL = "Rain image"

_OUTPUT_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class ModelOutputSet:
    """A directory of de-rained outputs, one file per test pair_id."""

    model_name: str
    output_dir: Path

    def resolve(self, pair_id: str) -> Path | None:
        for ext in _OUTPUT_EXTENSIONS:
            candidate = Path(self.output_dir) / f"{pair_id}{ext}"
            if candidate.is_file():
                return candidate
        return None


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float
    gain: float | None  # None on the baseline row


@dataclass(frozen=True)
class TableRow:
    row_label: str
    ssim: MetricStats
    psnr_hvs_m: MetricStats


@dataclass(frozen=True)
class BenchmarkTable:
    rows: tuple[TableRow, ...]  # baseline row last
    n: int
    baseline_label: str = BASELINE_LABEL


@dataclass(frozen=True)
class ScoreRecord:
    pair_id: str
    row_label: str
    ssim: float
    psnr_hvs_m: float
    gain_ssim: float
    gain_psnr_hvs_m: float


def score_pair(clean: ImageBuffer, candidate: ImageBuffer) -> QualityScore:
    """Full QualityScore of a candidate against the clean reference."""
    ref = to_luma(clean)
    cand = to_luma(candidate)
    hvs_m, hvs = psnr_hvs_m(ref, cand)
    return QualityScore(
        ssim=ssim(ref, cand),
        psnr_hvs_m=hvs_m,
        psnr_hvs=hvs,
        psnr=psnr(ref, cand),
        mse=mse(ref, cand),
    )


def aggregate(values) -> tuple[float, float]:
    """(mean, sample std). A single value yields std 0 with a warning."""
    vals = list(values)
    if not vals:
        raise EmptyInput("aggregate needs at least one value")
    mean = math.fsum(vals) / len(vals)
    if len(vals) == 1:
        warnings.warn("aggregate over a single value: std reported as 0", stacklevel=2)
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, math.sqrt(var)


def table_from_pair_scores(
    baseline: dict[str, tuple[float, float]],
    models: list[tuple[str, dict[str, tuple[float, float]]]],
) -> tuple[BenchmarkTable, list[ScoreRecord]]:
    """Aggregate per-pair (ssim, psnr_hvs_m) scores into table and records.

    `baseline` maps pair_id -> scores for the unprocessed rain image; each
    model entry must cover exactly the same pair ids. Records are ordered
    models-first then baseline, pair ids sorted, so output is reproducible.
    """
    if not baseline:
        raise EmptyInput("no scored pairs")
    pair_ids = sorted(baseline)
    for name, scores in models:
        if sorted(scores) != pair_ids:
            raise MissingOutput(name, sorted(set(pair_ids) - set(scores)))

    base_ssim_mean, base_ssim_std = aggregate([baseline[p][0] for p in pair_ids])
    base_hvsm_mean, base_hvsm_std = aggregate([baseline[p][1] for p in pair_ids])

    rows = []
    records = []
    for name, scores in models:
        ssim_mean, ssim_std = aggregate([scores[p][0] for p in pair_ids])
        hvsm_mean, hvsm_std = aggregate([scores[p][1] for p in pair_ids])
        rows.append(
            TableRow(
                row_label=name,
                ssim=MetricStats(ssim_mean, ssim_std, ssim_mean - base_ssim_mean),
                psnr_hvs_m=MetricStats(hvsm_mean, hvsm_std, hvsm_mean - base_hvsm_mean),
            )
        )
        for p in pair_ids:
            records.append(
                ScoreRecord(
                    pair_id=p,
                    row_label=name,
                    ssim=scores[p][0],
                    psnr_hvs_m=scores[p][1],
                    gain_ssim=scores[p][0] - baseline[p][0],
                    gain_psnr_hvs_m=scores[p][1] - baseline[p][1],
                )
            )
    rows.append(
        TableRow(
            row_label=BASELINE_LABEL,
            ssim=MetricStats(base_ssim_mean, base_ssim_std, None),
            psnr_hvs_m=MetricStats(base_hvsm_mean, base_hvsm_std, None),
        )
    )
    for p in pair_ids:
        records.append(
            ScoreRecord(
                pair_id=p,
                row_label=BASELINE_LABEL,
                ssim=baseline[p][0],
                psnr_hvs_m=baseline[p][1],
                gain_ssim=0.0,
                gain_psnr_hvs_m=0.0,
            )
        )
    table = BenchmarkTable(rows=tuple(rows), n=len(pair_ids))
    return table, records


def _load_image(path: Path) -> ImageBuffer:
    return decode_image(path.read_bytes())


def default_workers() -> int:
    env = os.environ.get("RAINBENCH_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_benchmark(
    manifest: DatasetManifest,
    models: list[ModelOutputSet],
    root: Path | str = ".",
    workers: int | None = None,
) -> tuple[BenchmarkTable, list[ScoreRecord]]:
    """Score every test pair of the manifest for the baseline and each model.

    Relative manifest paths resolve against `root`. A model missing any test
    pair aborts the run up front (silently skipping pairs would corrupt the
    sample-count comparison).
    """
    root = Path(root)
    test_pairs = sorted(manifest.test_pairs(), key=lambda p: p.pair_id)
    if not test_pairs:
        raise EmptyInput("manifest has no test pairs")
    for model in models:
        missing = [p.pair_id for p in test_pairs if model.resolve(p.pair_id) is None]
        if missing:
            raise MissingOutput(model.model_name, missing)

    def score_one(pair):
        clean = _load_image(root / pair.clean_path)
        rain = _load_image(root / pair.rain_path)
        try:
            out = {BASELINE_LABEL: _pair_scores(clean, rain)}
            for model in models:
                candidate = _load_image(model.resolve(pair.pair_id))
                out[model.model_name] = _pair_scores(clean, candidate)
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"pair {pair.pair_id!r}: {exc}") from exc
        return pair.pair_id, out

    n_workers = workers or default_workers()
    if n_workers == 1:
        scored = [score_one(p) for p in test_pairs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            scored = list(pool.map(score_one, test_pairs))

    scored.sort(key=lambda item: item[0])
    baseline = {pid: by_label[BASELINE_LABEL] for pid, by_label in scored}
    per_model = [
        (m.model_name, {pid: by_label[m.model_name] for pid, by_label in scored}) for m in models
    ]
    return table_from_pair_scores(baseline, per_model)


def _pair_scores(clean: ImageBuffer, candidate: ImageBuffer) -> tuple[float, float]:
    q = score_pair(clean, candidate)
    return q.ssim, q.psnr_hvs_m


# --- emission ---------------------------------------------------------------


def _fmt_gain(value: float | None, db: bool) -> str:
    if value is None:
        return "-"
    return f"{value:+.2f}dB" if db else f"{value:+.2f}"


def emit_table(table: BenchmarkTable, style: str = "text") -> bytes:
    """Render the table: 2-decimal display precision, signed gains, baseline
    row last with '-' gains. csv/structured carry full-precision values."""
    if style == "text":
        return _emit_table_text(table)
    if style == "csv":
        return _emit_table_csv(table)
    if style == "structured":
        return _emit_table_json(table)
    raise ValueError(f"unknown table style {style!r}")


def _emit_table_text(table: BenchmarkTable) -> bytes:
    label_w = max(12, max(len(r.row_label) for r in table.rows) + 2)
    lines = [f"Quality results for {table.n} samples"]
    lines.append(f"{'':<{label_w}}{'SSIM':<26}PSNR-HVS-M")
    lines.append(f"{'':<{label_w}}{'Mean':<7}{'σ':<7}{'Gain':<12}{'Mean':<10}{'σ':<10}Gain")
    for row in table.rows:
        s, p = row.ssim, row.psnr_hvs_m
        lines.append(
            f"{row.row_label:<{label_w}}"
            f"{f'{s.mean:.2f}':<7}{f'{s.std:.2f}':<7}{_fmt_gain(s.gain, db=False):<12}"
            f"{f'{p.mean:.2f}dB':<10}{f'{p.std:.2f}dB':<10}{_fmt_gain(p.gain, db=True)}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def _emit_table_csv(table: BenchmarkTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["row_label", "n", "ssim_mean", "ssim_std", "ssim_gain",
         "psnr_hvs_m_mean", "psnr_hvs_m_std", "psnr_hvs_m_gain"]
    )
    for row in table.rows:
        writer.writerow(
            [
                row.row_label,
                table.n,
                repr(row.ssim.mean),
                repr(row.ssim.std),
                "" if row.ssim.gain is None else repr(row.ssim.gain),
                repr(row.psnr_hvs_m.mean),
                repr(row.psnr_hvs_m.std),
                "" if row.psnr_hvs_m.gain is None else repr(row.psnr_hvs_m.gain),
            ]
        )
    return buf.getvalue().encode("utf-8")


def _emit_table_json(table: BenchmarkTable) -> bytes:
    doc = {
        "n": table.n,
        "baseline_label": table.baseline_label,
        "rows": [
            {
                "row_label": row.row_label,
                "ssim": {"mean": row.ssim.mean, "std": row.ssim.std, "gain": row.ssim.gain},
                "psnr_hvs_m": {
                    "mean": row.psnr_hvs_m.mean,
                    "std": row.psnr_hvs_m.std,
                    "gain": row.psnr_hvs_m.gain,
                },
            }
            for row in table.rows
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def parse_table_csv(data: bytes) -> BenchmarkTable:
    rows = []
    n = 0
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    for rec in reader:
        n = int(rec["n"])
        rows.append(
            TableRow(
                row_label=rec["row_label"],
                ssim=MetricStats(
                    float(rec["ssim_mean"]),
                    float(rec["ssim_std"]),
                    float(rec["ssim_gain"]) if rec["ssim_gain"] else None,
                ),
                psnr_hvs_m=MetricStats(
                    float(rec["psnr_hvs_m_mean"]),
                    float(rec["psnr_hvs_m_std"]),
                    float(rec["psnr_hvs_m_gain"]) if rec["psnr_hvs_m_gain"] else None,
                ),
            )
        )
    return BenchmarkTable(rows=tuple(rows), n=n)


def parse_table_json(data: bytes) -> BenchmarkTable:
    doc = json.loads(data.decode("utf-8"))
    rows = tuple(
        TableRow(
            row_label=r["row_label"],
            ssim=MetricStats(r["ssim"]["mean"], r["ssim"]["std"], r["ssim"]["gain"]),
            psnr_hvs_m=MetricStats(
                r["psnr_hvs_m"]["mean"], r["psnr_hvs_m"]["std"], r["psnr_hvs_m"]["gain"]
            ),
        )
        for r in doc["rows"]
    )
    return BenchmarkTable(rows=rows, n=doc["n"], baseline_label=doc["baseline_label"])


# --- per-pair score export ---------------------------------------------------

SCORES_HEADER = "pair_id,row_label,ssim,psnr_hvs_m,gain_ssim,gain_psnr_hvs_m"


def quantile(values, q: float) -> float:
    """Linear interpolation between order statistics: at h = (n-1)q the
    result is x[floor(h)] + (h - floor(h)) * (x[ceil(h)] - x[floor(h)])."""
    return float(np.quantile(np.asarray(values, dtype=np.float64), q, method="linear"))


def five_number_summary(values) -> tuple[float, float, float, float, float]:
    return tuple(quantile(values, q) for q in (0.0, 0.25, 0.5, 0.75, 1.0))


def emit_scores(records: list[ScoreRecord]) -> bytes:
    """Raw per-pair scores plus '# summary' trailer lines per row label.

    Data rows follow SCORES_HEADER; each trailer line carries the
    min/q1/median/q3/max of both metrics for one row label, '#'-prefixed so
    plain CSV readers skip it. Enough for any tool to draw the violin plot.
    """
    if not records:
        raise EmptyInput("no score records to emit")
    lines = [SCORES_HEADER]
    labels = []
    for rec in records:
        if rec.row_label not in labels:
            labels.append(rec.row_label)
        lines.append(
            f"{rec.pair_id},{rec.row_label},{rec.ssim!r},{rec.psnr_hvs_m!r},"
            f"{rec.gain_ssim!r},{rec.gain_psnr_hvs_m!r}"
        )
    lines.append("# summary,row_label,metric,min,q1,median,q3,max")
    for label in labels:
        subset = [r for r in records if r.row_label == label]
        for metric, key in (("ssim", lambda r: r.ssim), ("psnr_hvs_m", lambda r: r.psnr_hvs_m)):
            summary = five_number_summary([key(r) for r in subset])
            lines.append(f"# summary,{label},{metric}," + ",".join(repr(v) for v in summary))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_scores(data: bytes) -> tuple[list[ScoreRecord], dict[tuple[str, str], tuple]]:
    """Inverse of emit_scores: (records, {(row_label, metric): five numbers})."""
    records = []
    summaries = {}
    for line in data.decode("utf-8").splitlines()[1:]:
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].strip().split(",")
            if parts[0] != "summary" or parts[1] == "row_label":
                continue
            summaries[(parts[1], parts[2])] = tuple(float(v) for v in parts[3:])
            continue
        pid, label, s, p, gs, gp = line.split(",")
        records.append(ScoreRecord(pid, label, float(s), float(p), float(gs), float(gp)))
    return records, summaries


# --- gallery -----------------------------------------------------------------


def annotate_gallery(
    manifest: DatasetManifest,
    models: list[ModelOutputSet],
    records: list[ScoreRecord],
    out_dir: Path | str,
    root: Path | str = ".",
) -> list[Path]:
    """Write one [norain | rain | model...] strip PNG plus a JSON sidecar per
    test pair. Ratings live in the sidecar, never rasterized into pixels, so
    gallery output stays byte-reproducible."""
    root = Path(root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_key = {(r.row_label, r.pair_id): r for r in records}
    written = []
    for pair in sorted(manifest.test_pairs(), key=lambda p: p.pair_id):
        clean = _load_image(root / pair.clean_path)
        rain = _load_image(root / pair.rain_path)
        panels = [("norain", clean), ("rain", rain)]
        for model in models:
            panels.append((model.model_name, _load_image(model.resolve(pair.pair_id))))
        arrays = []
        for _, img in panels:
            if (img.width, img.height, img.channels) != (clean.width, clean.height, clean.channels):
                raise DimensionMismatch(f"pair {pair.pair_id!r}: gallery panels differ in shape")
            arrays.append(img.to_array())
        strip = ImageBuffer.from_array(np.hstack(arrays))

        sidecar = {"pair_id": pair.pair_id, "panels": []}
        for label, _ in panels:
            if label == "norain":
                sidecar["panels"].append({"label": "norain"})
                continue
            rec = by_key[(BASELINE_LABEL if label == "rain" else label, pair.pair_id)]
            panel = {"label": label, "ssim": rec.ssim, "psnr_hvs_m": rec.psnr_hvs_m}
            if label != "rain":
                panel["gain_ssim"] = rec.gain_ssim
                panel["gain_psnr_hvs_m"] = rec.gain_psnr_hvs_m
            sidecar["panels"].append(panel)

        strip_path = out_dir / f"{pair.pair_id}.png"
        atomic_write_bytes(strip_path, encode_image(strip))
        sidecar_path = out_dir / f"{pair.pair_id}.json"
        atomic_write_bytes(
            sidecar_path, (json.dumps(sidecar, indent=2, sort_keys=True) + "\n").encode("utf-8")
        )
        written.extend([strip_path, sidecar_path])
    return written
