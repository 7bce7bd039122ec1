"""Command-line entry point.

Verbs: ingest (annotations -> manifest), pair (materialize pair layouts),
bench (score model outputs), score (debug: metrics for two files),
survey-serve (HTTP quiz), survey-report (offline tally of an event log).

Exit codes: 0 success, 1 domain error (one machine-parsable line on stderr),
2 usage error. File outputs are written atomically (temp + rename), so a
failed run never leaves partial files behind.

Environment: RAINBENCH_ADMIN_TOKEN (survey report scope), RAINBENCH_THREADS
(worker cap), RAINBENCH_KERNELS (metric kernel backend).
"""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path

from . import dataset
from .bench import ModelOutputSet, annotate_gallery, emit_scores, emit_table, run_benchmark
from .errors import BindFailed, RainbenchError
from .fsio import atomic_write_bytes
from .imaging import decode_image, encode_image
from .survey.core import aggregate_report
from .survey.store import replay_log

# Unseeded runs still have to be reproducible, so the default is a fixed
# documented constant rather than wall-clock entropy.
DEFAULT_SEED = 100000

_IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def _seed_arg(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _model_arg(value: str) -> tuple[str, str]:
    if "=" not in value:
        raise argparse.ArgumentTypeError("expected NAME=OUTPUT_DIR")
    name, _, directory = value.partition("=")
    if not name or not directory:
        raise argparse.ArgumentTypeError("expected NAME=OUTPUT_DIR")
    return name, directory


def _list_pool(directory: Path) -> list[str]:
    files = sorted(
        str(p) for p in Path(directory).iterdir()
        if p.suffix.lower() in _IMAGE_EXTENSIONS and p.is_file()
    )
    return files


def parse_cli(argv: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="rainbench",
        description="Paired rain dataset tooling, SSIM / PSNR-HVS-M benchmarking, "
        "and the real-vs-fake perception survey.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="build a dataset manifest from weather annotations")
    p.add_argument("--annotations", required=True, type=Path)
    p.add_argument("--images", required=True, help="directory prefix recorded for image paths")
    p.add_argument("--per-class", required=True, type=int)
    p.add_argument("--seed", type=_seed_arg, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--rain-dir", default="rain", help="where rained counterparts live (or will)")
    p.add_argument("--rain-ext", default=".png")
    p.add_argument("--split-train", type=int, default=None)
    p.add_argument("--split-test", type=int, default=None)
    p.add_argument("--split-val", type=int, default=None)
    p.add_argument("--source-split", default="unknown", choices=["train", "val", "test", "unknown"])

    p = sub.add_parser("pair", help="materialize pair-directory or merged 2WxH layouts")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--layout", choices=["merged", "dirs"], default="merged")
    p.add_argument("--root", type=Path, default=Path("."), help="base for relative manifest paths")
    p.add_argument("--only-split", choices=["train", "test", "val"], default=None)

    p = sub.add_parser("bench", help="score model outputs over the manifest's test split")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--model", action="append", type=_model_arg, default=[],
                   metavar="NAME=DIR", help="repeatable")
    p.add_argument("--report", required=True, type=Path)
    p.add_argument("--root", type=Path, default=Path("."))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-gallery", action="store_true")

    p = sub.add_parser("score", help="print quality metrics for two image files")
    p.add_argument("reference", type=Path)
    p.add_argument("candidate", type=Path)

    p = sub.add_parser("survey-serve", help="serve the real/fake quiz over HTTP")
    p.add_argument("--syn-pool", required=True, type=Path)
    p.add_argument("--real-pool", required=True, type=Path)
    p.add_argument("--seed", type=_seed_arg, default=DEFAULT_SEED)
    p.add_argument("--log", required=True, type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--fake-count", type=int, default=6)
    p.add_argument("--real-count", type=int, default=4)
    p.add_argument("--static", type=Path, default=None, help="directory of UI assets to serve at /")

    p = sub.add_parser("survey-report", help="tally a survey event log")
    p.add_argument("--log", required=True, type=Path)

    return parser.parse_args(argv)


def _cmd_ingest(ns: argparse.Namespace) -> int:
    records = dataset.parse_annotations(ns.annotations.read_bytes(), source_split=ns.source_split)
    counts = {
        label: len(dataset.partition_by_weather(records, label))
        for label in ("rainy", "clear", "other")
    }
    split_counts = None
    if any(v is not None for v in (ns.split_train, ns.split_test, ns.split_val)):
        split_counts = {
            "train": ns.split_train or 0,
            "test": ns.split_test or 0,
            "val": ns.split_val or 0,
        }
    manifest = dataset.build_manifest(
        records,
        per_class=ns.per_class,
        seed=ns.seed,
        image_root=ns.images,
        rain_root=ns.rain_dir,
        rain_ext=ns.rain_ext,
        split_counts=split_counts,
    )
    atomic_write_bytes(ns.out, dataset.persist_manifest(manifest))
    print(
        f"ingested {len(records)} annotations "
        f"(rainy {counts['rainy']}, clear {counts['clear']}, other {counts['other']}); "
        f"sampled {ns.per_class} per class with seed {ns.seed}; wrote {ns.out}"
    )
    return 0


def _cmd_pair(ns: argparse.Namespace) -> int:
    manifest = dataset.load_manifest(ns.manifest.read_bytes())
    pairs = [p for p in manifest.pairs if ns.only_split in (None, p.split_role)]
    for pair in pairs:
        clean = decode_image((ns.root / pair.clean_path).read_bytes())
        rain = decode_image((ns.root / pair.rain_path).read_bytes())
        if ns.layout == "merged":
            merged = dataset.merge_pair(rain, clean)
            atomic_write_bytes(ns.out / "merged" / f"{pair.pair_id}.png", encode_image(merged))
        else:
            atomic_write_bytes(ns.out / "rain" / f"{pair.pair_id}.png", encode_image(rain))
            atomic_write_bytes(ns.out / "norain" / f"{pair.pair_id}.png", encode_image(clean))
    print(f"wrote {len(pairs)} {ns.layout} pair(s) under {ns.out}")
    return 0


def _cmd_bench(ns: argparse.Namespace) -> int:
    manifest = dataset.load_manifest(ns.manifest.read_bytes())
    models = [ModelOutputSet(model_name=name, output_dir=Path(d)) for name, d in ns.model]
    table, records = run_benchmark(manifest, models, root=ns.root, workers=ns.workers)
    atomic_write_bytes(ns.report / "table.txt", emit_table(table, "text"))
    atomic_write_bytes(ns.report / "table.csv", emit_table(table, "csv"))
    atomic_write_bytes(ns.report / "table.json", emit_table(table, "structured"))
    atomic_write_bytes(ns.report / "scores.csv", emit_scores(records))
    if not ns.no_gallery:
        annotate_gallery(manifest, models, records, ns.report / "gallery", root=ns.root)
    sys.stdout.write(emit_table(table, "text").decode("utf-8"))
    print(f"scored {table.n} test pair(s) x {len(models)} model(s); reports under {ns.report}")
    return 0


def _cmd_score(ns: argparse.Namespace) -> int:
    from .bench import score_pair

    ref = decode_image(ns.reference.read_bytes())
    cand = decode_image(ns.candidate.read_bytes())
    q = score_pair(ref, cand)
    print(f"ssim        {q.ssim:.6f}")
    print(f"psnr_hvs_m  {q.psnr_hvs_m:.4f} dB")
    print(f"psnr_hvs    {q.psnr_hvs:.4f} dB")
    print(f"psnr        {q.psnr:.4f} dB")
    print(f"mse         {q.mse:.6f}")
    return 0


def _cmd_survey_serve(ns: argparse.Namespace) -> int:
    import uvicorn

    from .survey.app import create_app

    # Fail with a domain error before uvicorn takes over the process if the
    # port is already occupied.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((ns.host, ns.port))
    except OSError as exc:
        raise BindFailed(f"cannot bind {ns.host}:{ns.port}: {exc}") from exc
    finally:
        probe.close()

    app = create_app(
        syn_pool=_list_pool(ns.syn_pool),
        real_pool=_list_pool(ns.real_pool),
        seed=ns.seed,
        log_path=ns.log,
        fake_count=ns.fake_count,
        real_count=ns.real_count,
        static_dir=ns.static,
    )
    print(f"survey quiz on http://{ns.host}:{ns.port} (seed {ns.seed}, log {ns.log})")
    uvicorn.run(app, host=ns.host, port=ns.port, log_level="warning")
    return 0


def _cmd_survey_report(ns: argparse.Namespace) -> int:
    sessions = list(replay_log(ns.log).values())
    sys.stdout.write(aggregate_report(sessions).decode("utf-8"))
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "pair": _cmd_pair,
    "bench": _cmd_bench,
    "score": _cmd_score,
    "survey-serve": _cmd_survey_serve,
    "survey-report": _cmd_survey_report,
}


def run(ns: argparse.Namespace) -> int:
    return _HANDLERS[ns.verb](ns)


def main(argv: list[str] | None = None) -> int:
    ns = parse_cli(sys.argv[1:] if argv is None else argv)
    try:
        return run(ns)
    except RainbenchError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
