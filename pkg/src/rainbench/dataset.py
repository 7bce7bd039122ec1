"""Paired clean/rain dataset construction from weather-annotated imagery.

Flow: parse BDD100K-style annotation JSON -> partition by weather label ->
seeded per-class sampling -> one pair per sampled clean image (its rained
counterpart shares the file stem) -> seeded train/test/val assignment.
The result is a :class:`DatasetManifest` whose serialization is canonical:
the same seed and inputs always produce the same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import PurePosixPath

import numpy as np

from .errors import (
    ChannelMismatch,
    CountMismatch,
    DimensionMismatch,
    InputSyntaxError,
    OddWidth,
    SampleTooLarge,
    SchemaError,
    VersionError,
)
from .imaging import ImageBuffer
from .rng import SplitMix64, derive_seeds

MANIFEST_VERSION = 1

WEATHER_RAINY = "rainy"
WEATHER_CLEAR = "clear"
WEATHER_OTHER = "other"

_SPLITS = ("train", "test", "val")


@dataclass(frozen=True)
class AnnotationRecord:
    image_name: str
    weather_label: str  # rainy | clear | other
    source_split: str = "unknown"  # train | val | test | unknown


@dataclass(frozen=True)
class PairEntry:
    pair_id: str
    clean_path: str
    rain_path: str
    split_role: str = "train"


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    clean_entries: tuple[str, ...] = ()
    rain_entries: tuple[str, ...] = ()
    pairs: tuple[PairEntry, ...] = ()
    format_version: int = MANIFEST_VERSION

    def __post_init__(self):
        for name, entries in (("clean", self.clean_entries), ("rain", self.rain_entries)):
            if len(set(entries)) != len(entries):
                raise ValueError(f"duplicate paths in {name} entry list")
        ids = [p.pair_id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate pair_id in manifest")

    def test_pairs(self) -> list[PairEntry]:
        return [p for p in self.pairs if p.split_role == "test"]


def parse_annotations(data: bytes | str, source_split: str = "unknown") -> list[AnnotationRecord]:
    """Read a BDD100K-style annotation document.

    The document is a JSON array of objects carrying a `name` field and an
    `attributes.weather` string. Weather strings other than "rainy"/"clear"
    (including a missing attribute) map to "other" so a stray record cannot
    abort a large ingest.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputSyntaxError(f"malformed annotation JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, list):
        raise InputSyntaxError(
            f"annotation document must be a JSON array, got {type(doc).__name__}", offset=0
        )
    records = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise InputSyntaxError(f"annotation entry {i} is not an object", offset=None)
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError(f"annotation entry {i} is missing a usable 'name' field")
        attributes = entry.get("attributes")
        weather = attributes.get("weather") if isinstance(attributes, dict) else None
        if weather == WEATHER_RAINY:
            label = WEATHER_RAINY
        elif weather == WEATHER_CLEAR:
            label = WEATHER_CLEAR
        else:
            label = WEATHER_OTHER
        records.append(AnnotationRecord(image_name=name, weather_label=label, source_split=source_split))
    return records


def partition_by_weather(records: list[AnnotationRecord], label: str) -> list[AnnotationRecord]:
    """Stable-order subset with exactly the requested weather label."""
    return [r for r in records if r.weather_label == label]


def sample_subset(records: list, n: int, seed: int) -> list:
    """n distinct records, uniform without replacement, deterministic per seed.

    Partial Fisher-Yates over a SplitMix64 stream (see rainbench.rng); the
    draw is stable across platforms and releases.
    """
    if n > len(records):
        raise SampleTooLarge(f"cannot sample {n} from {len(records)} records")
    return SplitMix64(seed).sample(records, n)


def assign_splits(pairs: list[PairEntry], counts: dict[str, int], seed: int) -> list[PairEntry]:
    """Assign every pair exactly one of train/test/val, deterministically.

    `counts` must cover the population exactly; sizes are explicit inputs,
    never inferred ratios. Output preserves the input pair order.
    """
    for k in counts:
        if k not in _SPLITS:
            raise CountMismatch(f"unknown split role {k!r}")
        if counts[k] < 0:
            raise CountMismatch(f"negative count for {k!r}")
    total = sum(counts.get(k, 0) for k in _SPLITS)
    if total != len(pairs):
        raise CountMismatch(f"split counts sum to {total}, but there are {len(pairs)} pairs")
    order = list(range(len(pairs)))
    SplitMix64(seed).shuffle(order)
    roles = [""] * len(pairs)
    cursor = 0
    for split in _SPLITS:
        for _ in range(counts.get(split, 0)):
            roles[order[cursor]] = split
            cursor += 1
    return [replace(p, split_role=roles[i]) for i, p in enumerate(pairs)]


def merge_pair(rain: ImageBuffer, clean: ImageBuffer) -> ImageBuffer:
    """Concatenate a pair into one 2W x H image: rain left, clean right."""
    if (rain.width, rain.height) != (clean.width, clean.height):
        raise DimensionMismatch(
            f"pair differs in size: rain {rain.width}x{rain.height}, clean {clean.width}x{clean.height}"
        )
    if rain.channels != clean.channels:
        raise ChannelMismatch(f"pair differs in channels: {rain.channels} vs {clean.channels}")
    left = rain.to_array()
    right = clean.to_array()
    return ImageBuffer.from_array(np.hstack([left, right]))


def split_merged(merged: ImageBuffer) -> tuple[ImageBuffer, ImageBuffer]:
    """Inverse of merge_pair: (rain, clean) halves of a 2W x H image."""
    if merged.width % 2 != 0:
        raise OddWidth(f"merged image width {merged.width} is odd; cannot split into halves")
    arr = merged.to_array()
    w = merged.width // 2
    return ImageBuffer.from_array(arr[:, :w].copy()), ImageBuffer.from_array(arr[:, w:].copy())


def build_manifest(
    records: list[AnnotationRecord],
    per_class: int,
    seed: int,
    image_root: str = "",
    rain_root: str = "rain",
    rain_ext: str = ".png",
    split_counts: dict[str, int] | None = None,
) -> DatasetManifest:
    """Sample per-class subsets and pair each clean image with its rained twin.

    One master seed drives three derived stages (clean draw, rain draw, split
    assignment). The rained counterpart of `<image_root>/<stem>.<ext>` is
    expected at `<rain_root>/<stem><rain_ext>`; it does not have to exist yet
    because rain synthesis is an external step.
    """
    clear = partition_by_weather(records, WEATHER_CLEAR)
    rainy = partition_by_weather(records, WEATHER_RAINY)
    if per_class > len(clear):
        raise SampleTooLarge(f"need {per_class} clear images, annotations provide {len(clear)}")
    if per_class > len(rainy):
        raise SampleTooLarge(f"need {per_class} rainy images, annotations provide {len(rainy)}")
    seed_clean, seed_rain, seed_split = derive_seeds(seed, 3)
    clean_sample = sample_subset(clear, per_class, seed_clean)
    rain_sample = sample_subset(rainy, per_class, seed_rain)

    def img_path(name: str) -> str:
        return str(PurePosixPath(image_root) / name) if image_root else name

    pairs = []
    for rec in clean_sample:
        stem = PurePosixPath(rec.image_name).stem
        pairs.append(
            PairEntry(
                pair_id=stem,
                clean_path=img_path(rec.image_name),
                rain_path=str(PurePosixPath(rain_root) / f"{stem}{rain_ext}"),
            )
        )
    if split_counts is None:
        split_counts = {"train": len(pairs), "test": 0, "val": 0}
    pairs = assign_splits(pairs, split_counts, seed_split)
    return DatasetManifest(
        seed=seed,
        clean_entries=tuple(img_path(r.image_name) for r in clean_sample),
        rain_entries=tuple(img_path(r.image_name) for r in rain_sample),
        pairs=tuple(pairs),
    )


def persist_manifest(manifest: DatasetManifest) -> bytes:
    """Canonical JSON bytes: equal manifests serialize identically."""
    doc = {
        "format_version": manifest.format_version,
        "seed": manifest.seed,
        "clean_entries": list(manifest.clean_entries),
        "rain_entries": list(manifest.rain_entries),
        "pairs": [
            {
                "pair_id": p.pair_id,
                "clean_path": p.clean_path,
                "rain_path": p.rain_path,
                "split_role": p.split_role,
            }
            for p in manifest.pairs
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def load_manifest(data: bytes | str) -> DatasetManifest:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputSyntaxError(f"malformed manifest JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict):
        raise InputSyntaxError("manifest must be a JSON object", offset=0)
    version = doc.get("format_version")
    if version != MANIFEST_VERSION:
        raise VersionError(f"unknown manifest format_version {version!r}; this build reads {MANIFEST_VERSION}")
    try:
        pairs = tuple(
            PairEntry(
                pair_id=p["pair_id"],
                clean_path=p["clean_path"],
                rain_path=p["rain_path"],
                split_role=p["split_role"],
            )
            for p in doc["pairs"]
        )
        return DatasetManifest(
            seed=doc["seed"],
            clean_entries=tuple(doc["clean_entries"]),
            rain_entries=tuple(doc["rain_entries"]),
            pairs=pairs,
            format_version=version,
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"manifest is missing required fields: {exc}") from exc
