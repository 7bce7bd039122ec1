import math
import warnings

import numpy as np
import pytest

from conftest import det_image, noisy_variant
from oracles import mean_std_two_pass, quantile_sorted
from rainbench.bench import (
    BASELINE_LABEL,
    BenchmarkTable,
    MetricStats,
    ModelOutputSet,
    ScoreRecord,
    TableRow,
    aggregate,
    annotate_gallery,
    emit_scores,
    emit_table,
    five_number_summary,
    parse_scores,
    parse_table_csv,
    parse_table_json,
    run_benchmark,
    score_pair,
    table_from_pair_scores,
)
from rainbench.dataset import DatasetManifest, PairEntry, persist_manifest
from rainbench.errors import DimensionMismatch, EmptyInput, MissingOutput
from rainbench.imaging import decode_image, encode_image
from rainbench.metrics import DB_CAP
from rainbench.rng import SplitMix64

# --- aggregate ----------------------------------------------------------------


def test_aggregate_hand_computed():
    mean, std = aggregate([0.5, 0.7, 0.9])
    assert mean == pytest.approx(0.7, abs=1e-12)
    assert std == pytest.approx(0.2, abs=1e-12)


def test_aggregate_constant_values():
    mean, std = aggregate([3.25] * 10)
    assert (mean, std) == (3.25, 0.0)


def test_aggregate_single_value_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert aggregate([1.5]) == (1.5, 0.0)
    assert len(caught) == 1


def test_aggregate_empty():
    with pytest.raises(EmptyInput):
        aggregate([])


def test_aggregate_matches_two_pass_oracle():
    gen = SplitMix64(42)
    values = [gen.below(10**6) / 10**4 for _ in range(94)]
    mean, std = aggregate(values)
    want_mean, want_std = mean_std_two_pass(values)
    assert mean == pytest.approx(want_mean, abs=1e-12)
    assert std == pytest.approx(want_std, abs=1e-12)


# --- table construction ---------------------------------------------------------


def synthetic_scores(mean_ssim, std_ssim, mean_db, std_db, n=94):
    # Half the values at mean+c, half at mean-c: mean is exact and the sample
    # std comes out to the requested value (c = std * sqrt((n-1)/n)).
    assert n % 2 == 0
    c_ssim = std_ssim * math.sqrt((n - 1) / n)
    c_db = std_db * math.sqrt((n - 1) / n)
    out = {}
    for i in range(n):
        sign = 1.0 if i % 2 == 0 else -1.0
        out[f"p{i:03d}"] = (mean_ssim + sign * c_ssim, mean_db + sign * c_db)
    return out


def paper_style_inputs():
    baseline = synthetic_scores(0.63, 0.16, 16.19, 3.60)
    models = [
        ("Restormer", synthetic_scores(0.79, 0.11, 20.68, 5.50)),
        ("RESCAN", synthetic_scores(0.74, 0.19, 18.44, 1.71)),
    ]
    return baseline, models


def test_gain_identity_and_layout():
    baseline, models = paper_style_inputs()
    table, records = table_from_pair_scores(baseline, models)
    assert table.n == 94
    assert [r.row_label for r in table.rows] == ["Restormer", "RESCAN", BASELINE_LABEL]
    for row in table.rows[:-1]:
        assert row.ssim.gain == pytest.approx(row.ssim.mean - table.rows[-1].ssim.mean, abs=1e-12)
        assert row.psnr_hvs_m.gain == pytest.approx(
            row.psnr_hvs_m.mean - table.rows[-1].psnr_hvs_m.mean, abs=1e-12
        )
    assert table.rows[-1].ssim.gain is None and table.rows[-1].psnr_hvs_m.gain is None


def test_mean_of_per_pair_gains_equals_table_gain():
    baseline, models = paper_style_inputs()
    table, records = table_from_pair_scores(baseline, models)
    for row in table.rows[:-1]:
        gains = [r.gain_ssim for r in records if r.row_label == row.row_label]
        assert math.fsum(gains) / len(gains) == pytest.approx(row.ssim.gain, abs=1e-12)
        gains_db = [r.gain_psnr_hvs_m for r in records if r.row_label == row.row_label]
        assert math.fsum(gains_db) / len(gains_db) == pytest.approx(row.psnr_hvs_m.gain, abs=1e-12)


def test_model_missing_pair_rejected():
    baseline, models = paper_style_inputs()
    broken = dict(models[0][1])
    broken.pop("p000")
    with pytest.raises(MissingOutput):
        table_from_pair_scores(baseline, [("Restormer", broken)])


# --- emissions ------------------------------------------------------------------


def test_text_table_matches_display_precision():
    baseline, models = paper_style_inputs()
    table, _ = table_from_pair_scores(baseline, models)
    text = emit_table(table, "text").decode()
    lines = text.splitlines()
    assert lines[0] == "Quality results for 94 samples"
    restormer = next(l for l in lines if l.startswith("Restormer"))
    assert restormer.split() == ["Restormer", "0.79", "0.11", "+0.16", "20.68dB", "5.50dB", "+4.49dB"]
    rescan = next(l for l in lines if l.startswith("RESCAN"))
    assert rescan.split() == ["RESCAN", "0.74", "0.19", "+0.11", "18.44dB", "1.71dB", "+2.25dB"]
    rain = next(l for l in lines if l.startswith(BASELINE_LABEL))
    assert rain.split() == ["Rain", "image", "0.63", "0.16", "-", "16.19dB", "3.60dB", "-"]


def test_baseline_only_table():
    baseline, _ = paper_style_inputs()
    table, _ = table_from_pair_scores(baseline, [])
    assert len(table.rows) == 1
    text = emit_table(table, "text").decode()
    assert BASELINE_LABEL in text


def test_csv_and_json_roundtrip():
    baseline, models = paper_style_inputs()
    table, _ = table_from_pair_scores(baseline, models)
    assert parse_table_csv(emit_table(table, "csv")) == table
    assert parse_table_json(emit_table(table, "structured")) == table


def test_emit_table_unknown_style():
    table = BenchmarkTable(
        rows=(TableRow(BASELINE_LABEL, MetricStats(0.5, 0.1, None), MetricStats(10, 1, None)),),
        n=1,
    )
    with pytest.raises(ValueError):
        emit_table(table, "xml")


def test_negative_gain_is_signed():
    baseline = {"p0": (0.8, 20.0), "p1": (0.8, 20.0)}
    worse = {"p0": (0.7, 18.0), "p1": (0.7, 18.0)}
    table, _ = table_from_pair_scores(baseline, [("Degrader", worse)])
    text = emit_table(table, "text").decode()
    row = next(l for l in text.splitlines() if l.startswith("Degrader"))
    assert "-0.10" in row and "-2.00dB" in row


# --- score export ----------------------------------------------------------------


def test_emit_scores_rows_and_summary():
    baseline, models = paper_style_inputs()
    _, records = table_from_pair_scores(baseline, models)
    data = emit_scores(records).decode()
    lines = data.splitlines()
    assert lines[0] == "pair_id,row_label,ssim,psnr_hvs_m,gain_ssim,gain_psnr_hvs_m"
    data_rows = [l for l in lines if l and not l.startswith("#") and l != lines[0]]
    assert len(data_rows) == 94 * 3
    summary_rows = [l for l in lines if l.startswith("# summary,") and "row_label" not in l]
    assert len(summary_rows) == 3 * 2  # one per (row_label, metric)


def test_scores_roundtrip_and_quartile_oracle():
    baseline, models = paper_style_inputs()
    _, records = table_from_pair_scores(baseline, models)
    parsed, summaries = parse_scores(emit_scores(records))
    assert parsed == records
    for label in ("Restormer", "RESCAN", BASELINE_LABEL):
        values = [r.ssim for r in records if r.row_label == label]
        got = summaries[(label, "ssim")]
        want = tuple(quantile_sorted(values, q) for q in (0, 0.25, 0.5, 0.75, 1.0))
        assert got == pytest.approx(want, abs=1e-12)


def test_single_record_quartiles_collapse():
    summary = five_number_summary([0.42])
    assert summary == (0.42,) * 5


def test_emit_scores_empty():
    with pytest.raises(EmptyInput):
        emit_scores([])


# --- scoring + full run -----------------------------------------------------------


def test_score_pair_identity(warm_kernels):
    img = det_image(1, 32, 24, channels=3)
    q = score_pair(img, img)
    assert q.ssim == pytest.approx(1.0, abs=1e-9)
    assert q.psnr_hvs_m == DB_CAP and q.psnr == DB_CAP and q.mse == 0.0


def make_dataset(tmp_path, n_pairs=3, w=32, h=24):
    clean_dir = tmp_path / "imgs"
    rain_dir = tmp_path / "rain"
    clean_dir.mkdir()
    rain_dir.mkdir()
    pairs = []
    for i in range(n_pairs):
        clean = det_image(1000 + i, w, h, channels=3)
        rain = noisy_variant(clean, 2000 + i, amplitude=35)
        (clean_dir / f"pair{i}.png").write_bytes(encode_image(clean))
        (rain_dir / f"pair{i}.png").write_bytes(encode_image(rain))
        pairs.append(
            PairEntry(
                pair_id=f"pair{i}",
                clean_path=f"imgs/pair{i}.png",
                rain_path=f"rain/pair{i}.png",
                split_role="test",
            )
        )
    manifest = DatasetManifest(
        seed=1,
        clean_entries=tuple(p.clean_path for p in pairs),
        rain_entries=(),
        pairs=tuple(pairs),
    )
    return manifest


def make_model_dir(tmp_path, name, source_dir, pair_ids):
    model_dir = tmp_path / name
    model_dir.mkdir()
    for pid in pair_ids:
        model_dir.joinpath(f"{pid}.png").write_bytes((source_dir / f"{pid}.png").read_bytes())
    return model_dir


def test_run_benchmark_identity_and_perfect_models(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path)
    ids = [p.pair_id for p in manifest.pairs]
    copycat = make_model_dir(tmp_path, "copycat", tmp_path / "rain", ids)
    perfect = make_model_dir(tmp_path, "perfect", tmp_path / "imgs", ids)
    models = [
        ModelOutputSet("Copycat", copycat),
        ModelOutputSet("Perfect", perfect),
    ]
    table, records = run_benchmark(manifest, models, root=tmp_path)
    assert table.n == 3
    by_label = {r.row_label: r for r in table.rows}
    # byte-copies of the rain images: gain exactly zero, per-pair gains all zero
    assert by_label["Copycat"].ssim.gain == 0.0
    assert by_label["Copycat"].psnr_hvs_m.gain == 0.0
    assert all(
        r.gain_ssim == 0.0 and r.gain_psnr_hvs_m == 0.0
        for r in records
        if r.row_label == "Copycat"
    )
    # byte-copies of the clean references: perfect scores
    assert by_label["Perfect"].ssim.mean == pytest.approx(1.0, abs=1e-9)
    assert by_label["Perfect"].psnr_hvs_m.mean == DB_CAP
    assert by_label["Perfect"].ssim.gain > 0
    # records carry manifest ids
    assert {r.pair_id for r in records} == set(ids)


def test_run_benchmark_reports_reproducible(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path)
    ids = [p.pair_id for p in manifest.pairs]
    model = ModelOutputSet("Copycat", make_model_dir(tmp_path, "copycat", tmp_path / "rain", ids))
    t1, r1 = run_benchmark(manifest, [model], root=tmp_path, workers=4)
    t2, r2 = run_benchmark(manifest, [model], root=tmp_path, workers=1)
    assert emit_table(t1, "csv") == emit_table(t2, "csv")
    assert emit_scores(r1) == emit_scores(r2)


def test_run_benchmark_missing_output(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path)
    ids = [p.pair_id for p in manifest.pairs][:-1]  # drop one output
    model = ModelOutputSet("Partial", make_model_dir(tmp_path, "partial", tmp_path / "rain", ids))
    with pytest.raises(MissingOutput) as exc:
        run_benchmark(manifest, [model], root=tmp_path)
    assert "pair2" in str(exc.value)


def test_run_benchmark_dimension_mismatch_names_pair(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path)
    model_dir = tmp_path / "weird"
    model_dir.mkdir()
    for pid in [p.pair_id for p in manifest.pairs]:
        bad = det_image(5, 16, 16, channels=3)
        model_dir.joinpath(f"{pid}.png").write_bytes(encode_image(bad))
    with pytest.raises(DimensionMismatch) as exc:
        run_benchmark(manifest, [ModelOutputSet("Weird", model_dir)], root=tmp_path)
    assert "pair" in str(exc.value)


def test_run_benchmark_empty_test_split(tmp_path):
    manifest = DatasetManifest(seed=1, pairs=(PairEntry("a", "c.png", "r.png", "train"),))
    with pytest.raises(EmptyInput):
        run_benchmark(manifest, [], root=tmp_path)


# --- gallery ----------------------------------------------------------------------


def test_gallery_strips_and_sidecars(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path)
    ids = [p.pair_id for p in manifest.pairs]
    models = [
        ModelOutputSet("Copycat", make_model_dir(tmp_path, "copycat", tmp_path / "rain", ids)),
        ModelOutputSet("Perfect", make_model_dir(tmp_path, "perfect", tmp_path / "imgs", ids)),
    ]
    table, records = run_benchmark(manifest, models, root=tmp_path)
    out = tmp_path / "gallery"
    written = annotate_gallery(manifest, models, records, out, root=tmp_path)
    strips = sorted(out.glob("*.png"))
    sidecars = sorted(out.glob("*.json"))
    assert len(strips) == 3 and len(sidecars) == 3
    strip = decode_image(strips[0].read_bytes())
    assert strip.width == 4 * 32  # norain | rain | model1 | model2
    import json

    doc = json.loads(sidecars[0].read_text())
    labels = [p["label"] for p in doc["panels"]]
    assert labels == ["norain", "rain", "Copycat", "Perfect"]
    assert "ssim" not in doc["panels"][0]  # reference panel carries no rating
    rec = {(r.row_label, r.pair_id): r for r in records}
    for panel in doc["panels"][2:]:
        source = rec[(panel["label"], doc["pair_id"])]
        assert panel["gain_ssim"] == source.gain_ssim
        assert panel["gain_psnr_hvs_m"] == source.gain_psnr_hvs_m


def test_gallery_zero_models(tmp_path, warm_kernels):
    manifest = make_dataset(tmp_path, n_pairs=1)
    _, records = run_benchmark(manifest, [], root=tmp_path)
    out = tmp_path / "gallery0"
    annotate_gallery(manifest, [], records, out, root=tmp_path)
    strip = decode_image(next(out.glob("*.png")).read_bytes())
    assert strip.width == 2 * 32
