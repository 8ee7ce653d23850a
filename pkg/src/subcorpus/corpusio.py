"""Program bundles, dev split and corpus manifests."""
import os
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .metrics import GENRES, canonical_genre
from .textnorm import NormalizationConfig, Token, normalize_tokens, tokens_from_text, tokens_to_text

SAMPLE_RATE_HZ = 16000
DEV_PER_GENRE = 1000

SEGMENTS_HEADER = "segment_id\tprogram_id\tstart_ms\tend_ms"
TEXT_HEADER = "segment_id\ttranscript"


class BundleError(ValueError):
    """Missing or malformed bundle file."""


class AudioFormatError(BundleError):
    pass


class IntegrityError(ValueError):
    pass


class UnsortedCuesWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AudioRef:
    path: str
    duration_ms: int
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        if self.sample_rate_hz != SAMPLE_RATE_HZ:
            raise AudioFormatError(f"audio must be {SAMPLE_RATE_HZ} Hz, got {self.sample_rate_hz}")
        if self.duration_ms <= 0:
            raise BundleError("duration_ms must be > 0")


@dataclass(frozen=True)
class SubtitleCue:
    start_ms: int
    end_ms: int
    tokens: Tuple[Token, ...]

    def __post_init__(self):
        if self.end_ms <= self.start_ms:
            raise ValueError(f"cue end {self.end_ms} not after start {self.start_ms}")
        if not self.tokens:
            raise ValueError("cue has no tokens")


@dataclass(frozen=True)
class ProgramRecording:
    program_id: str
    title: str
    genre_tags: Tuple[str, ...]
    audio: AudioRef
    cues: Tuple[SubtitleCue, ...]
    bundle_dir: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.program_id or any(c.isspace() for c in self.program_id):
            raise ValueError(f"invalid program_id {self.program_id!r}")
        if not self.genre_tags:
            raise ValueError("genre_tags must be non-empty")
        if any(a.start_ms > b.start_ms for a, b in zip(self.cues, self.cues[1:])):
            raise ValueError("cues must be sorted by start_ms")

    @property
    def genre(self):
        return canonical_genre(self.genre_tags[0])

    def subtitle_tokens(self) -> List[Token]:
        return [t for c in self.cues for t in c.tokens]

    def audio_path(self) -> Path:
        p = Path(self.audio.path)
        if not p.is_absolute() and self.bundle_dir is not None:
            p = Path(self.bundle_dir) / p
        return p


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple
    dev: tuple
    shuffle_seed: int


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read().split("\n")
    except FileNotFoundError:
        raise BundleError(f"{path}: missing") from None
    except UnicodeDecodeError as e:
        raise BundleError(f"{path}: not UTF-8 ({e})") from None


def _parse_meta(path):
    meta = {}
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition("\t")
        if not sep:
            raise BundleError(f"{path}:{lineno}: expected key<TAB>value")
        meta[key] = value
    for key in ("title", "genres", "duration_ms", "sample_rate"):
        if key not in meta:
            raise BundleError(f"{path}: missing key {key!r}")
    try:
        duration = int(meta["duration_ms"])
        rate = int(meta["sample_rate"])
    except ValueError as e:
        raise BundleError(f"{path}: {e}") from None
    genres = tuple(g.strip() for g in meta["genres"].split(",") if g.strip())
    if not genres:
        raise BundleError(f"{path}: empty genres")
    return meta["title"], genres, duration, rate


def _parse_cues(path, cfg):
    cues = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise BundleError(f"{path}:{lineno}: expected start_ms<TAB>end_ms<TAB>tokens")
        try:
            start, end = int(parts[0]), int(parts[1])
            raw = tokens_from_text(parts[2])
        except ValueError as e:
            raise BundleError(f"{path}:{lineno}: {e}") from None
        if end <= start:
            raise BundleError(f"{path}:{lineno}: end_ms must exceed start_ms")
        toks = tuple(normalize_tokens(raw, cfg))
        if not toks:
            warnings.warn(f"{path}:{lineno}: cue empty after normalization, dropped")
            continue
        cues.append(SubtitleCue(start, end, toks))
    if any(a.start_ms > b.start_ms for a, b in zip(cues, cues[1:])):
        warnings.warn(f"{path}: cues not sorted by start time, re-sorted", UnsortedCuesWarning)
        cues.sort(key=lambda c: c.start_ms)
    return tuple(cues)


def parse_program_bundle(path, cfg: NormalizationConfig = NormalizationConfig()) -> ProgramRecording:
    """Read ``<program_id>/{meta.tsv,cues.tsv,audio.ref}``."""
    d = Path(path)
    title, genres, duration, rate = _parse_meta(d / "meta.tsv")
    cues = _parse_cues(d / "cues.tsv", cfg)
    ref_lines = [ln for ln in _read_lines(d / "audio.ref") if ln.strip()]
    if len(ref_lines) != 1:
        raise BundleError(f"{d / 'audio.ref'}: expected exactly one path line")
    audio = AudioRef(ref_lines[0].strip(), duration, rate)
    if not cues:
        raise BundleError(f"{d / 'cues.tsv'}: no cues")
    return ProgramRecording(d.name, title, genres, audio, cues, str(d))


def _write_text(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def write_program_bundle(program: ProgramRecording, root) -> Path:
    d = Path(root) / program.program_id
    d.mkdir(parents=True, exist_ok=True)
    _write_text(d / "meta.tsv", [
        f"title\t{program.title}",
        f"genres\t{','.join(program.genre_tags)}",
        f"duration_ms\t{program.audio.duration_ms}",
        f"sample_rate\t{program.audio.sample_rate_hz}",
    ])
    _write_text(d / "cues.tsv", [f"{c.start_ms}\t{c.end_ms}\t{tokens_to_text(c.tokens)}" for c in program.cues])
    _write_text(d / "audio.ref", [program.audio.path])
    return d


def find_bundles(root) -> List[Path]:
    root = Path(root)
    if (root / "meta.tsv").is_file():
        return [root]
    return sorted(p for p in root.iterdir() if (p / "meta.tsv").is_file())


def _genre_rng(seed, genre):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, GENRES.index(genre)])))


def make_dev_split(segments: Sequence, seed: int, genre_of: Dict[str, str],
                   per_genre: int = DEV_PER_GENRE) -> CorpusSplit:
    """Seeded per-genre sample of ``min(per_genre, available)`` dev segments.

    ``genre_of`` maps program_id to the program's first genre tag.
    """
    by_genre: Dict[str, list] = {}
    for s in sorted(segments, key=lambda s: s.segment_id):
        try:
            g = canonical_genre(genre_of[s.program_id])
        except KeyError:
            raise IntegrityError(f"no genre for program {s.program_id!r}") from None
        by_genre.setdefault(g, []).append(s)
    dev, dev_ids = [], set()
    for g in GENRES:
        pool = by_genre.get(g, [])
        if not pool:
            continue
        k = min(per_genre, len(pool))
        idx = _genre_rng(seed, g).choice(len(pool), size=k, replace=False)
        for i in idx:
            dev.append(pool[i])
            dev_ids.add(pool[i].segment_id)
    train = [s for g in GENRES for s in by_genre.get(g, []) if s.segment_id not in dev_ids]
    return CorpusSplit(tuple(train), tuple(dev), seed)


def _shuffled(segs, seed, salt):
    segs = sorted(segs, key=lambda s: s.segment_id)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, salt])))
    return [segs[i] for i in rng.permutation(len(segs))]


def write_corpus(segments: Sequence, split: CorpusSplit, out_dir) -> Dict[str, Path]:
    """Write shuffled ``{train,dev}/{segments,text}.tsv``; returns the manifest paths."""
    ids = [s.segment_id for s in segments]
    dup = sorted(i for i, n in Counter(ids).items() if n > 1)[:5]
    if dup:
        raise IntegrityError(f"duplicate segment ids: {dup}")
    train_ids = [s.segment_id for s in split.train]
    dev_ids = [s.segment_id for s in split.dev]
    if set(train_ids) & set(dev_ids):
        raise IntegrityError("train and dev overlap")
    if sorted(train_ids + dev_ids) != sorted(ids):
        raise IntegrityError("split does not partition the segment list")
    out = Path(out_dir)
    paths = {}
    for salt, (name, part) in enumerate((("train", split.train), ("dev", split.dev))):
        d = out / name
        os.makedirs(d, exist_ok=True)
        order = _shuffled(part, split.shuffle_seed, salt)
        seg_path, text_path = d / "segments.tsv", d / "text.tsv"
        _write_text(seg_path, [SEGMENTS_HEADER] + [
            f"{s.segment_id}\t{s.program_id}\t{s.start_ms}\t{s.end_ms}" for s in order])
        _write_text(text_path, [TEXT_HEADER] + [
            f"{s.segment_id}\t{tokens_to_text(s.tokens)}" for s in order])
        paths[f"{name}_segments"] = seg_path
        paths[f"{name}_text"] = text_path
    return paths
