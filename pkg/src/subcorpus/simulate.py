"""Synthetic programs: ground-truth word tracks plus matching subtitle cues."""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .corpusio import AudioRef, ProgramRecording, SubtitleCue, write_program_bundle
from .decoder import GroundTruthTrack, TrackWord, write_track
from .metrics import GENRES
from .textnorm import POS_TAGS, Token

_POS = tuple(sorted(POS_TAGS - {"number", "symbol"}))
TRACK_FILE = "track.tsv"


@dataclass(frozen=True)
class SimConfig:
    n_programs: int = 20
    duration_ms: int = 600_000
    vocab_size: int = 2000
    zipf_s: float = 1.05
    unsubtitled_frac: float = 0.0
    commercial_ms: Tuple[int, int] = (15_000, 45_000)
    sentence_words: Tuple[int, int] = (6, 16)
    word_ms: Tuple[int, int] = (180, 480)
    pause_ms: Tuple[int, int] = (250, 900)
    cue_lag_ms: Tuple[int, int] = (0, 3000)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.unsubtitled_frac < 1.0:
            raise ValueError("unsubtitled_frac must lie in [0, 1)")
        if self.n_programs < 0 or self.duration_ms <= 0 or self.vocab_size < 2:
            raise ValueError("bad corpus size")


class _Lexicon:
    def __init__(self, prefix, size, s, rng):
        self.words = [f"{prefix}{i:04d}" for i in range(size)]
        self.pos = [_POS[i] for i in rng.integers(0, len(_POS), size)]
        p = 1.0 / np.arange(1, size + 1) ** s
        self.cdf = np.cumsum(p / p.sum())

    def draw(self, rng, n):
        idx = np.minimum(np.searchsorted(self.cdf, rng.random(n)), len(self.words) - 1)
        return [(self.words[i], self.pos[i]) for i in idx]


def _commercial_starts(cfg, rng):
    total = int(cfg.duration_ms * cfg.unsubtitled_frac)
    blocks = []
    while total > 0:
        n = int(min(rng.integers(cfg.commercial_ms[0], cfg.commercial_ms[1] + 1), total))
        blocks.append(n)
        total -= n
    if not blocks:
        return []
    # program content split evenly around the blocks
    content = cfg.duration_ms - sum(blocks)
    gap = content // (len(blocks) + 1)
    out, t = [], 0
    for n in blocks:
        t += gap
        out.append((t, t + n))
        t += n
    return out


def simulate_program(program_id: str, genre: str, cfg: SimConfig, index: int = 0
                     ) -> Tuple[ProgramRecording, GroundTruthTrack]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, index])))
    lex_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 1 << 32])))
    speech = _Lexicon("w", cfg.vocab_size, cfg.zipf_s, lex_rng)
    ads = _Lexicon("c", max(cfg.vocab_size // 4, 2), cfg.zipf_s, lex_rng)
    breaks = _commercial_starts(cfg, rng)
    words: List[TrackWord] = []
    cues: List[SubtitleCue] = []
    t = int(rng.integers(*cfg.pause_ms))
    bi = 0
    while True:
        in_break = bi < len(breaks) and t >= breaks[bi][0]
        if in_break:
            t = max(t, breaks[bi][0])
            stop = breaks[bi][1]
            bi += 1
        else:
            stop = breaks[bi][0] if bi < len(breaks) else cfg.duration_ms
        # one sentence per iteration until the block is used up
        while True:
            n = int(rng.integers(cfg.sentence_words[0], cfg.sentence_words[1] + 1))
            lens = rng.integers(cfg.word_ms[0], cfg.word_ms[1] + 1, n)
            gaps = rng.integers(0, 80, n)
            if t + int(lens.sum() + gaps.sum()) >= stop - cfg.pause_ms[0]:
                break
            drawn = (ads if in_break else speech).draw(rng, n)
            s0 = t
            sent = []
            for (w, pos), d, g in zip(drawn, lens, gaps):
                words.append(TrackWord(w, t, t + int(d), not in_break))
                sent.append(Token(w, None, pos))
                t += int(d) + int(g)
            if not in_break:
                lag = int(rng.integers(cfg.cue_lag_ms[0], cfg.cue_lag_ms[1] + 1))
                cues.append(SubtitleCue(s0 + lag, t + lag, tuple(sent)))
            t += int(rng.integers(*cfg.pause_ms))
        t = stop
        if bi >= len(breaks) and stop >= cfg.duration_ms:
            break
    cues.sort(key=lambda c: c.start_ms)
    audio = AudioRef(TRACK_FILE, cfg.duration_ms)
    program = ProgramRecording(program_id, f"synthetic {genre} {index}", (genre,), audio, tuple(cues))
    return program, GroundTruthTrack(tuple(words))


def unsubtitled_spans(track: GroundTruthTrack) -> List[Tuple[int, int]]:
    """Maximal time ranges covered by consecutive unsubtitled words."""
    out, cur = [], None
    for w in track.words:
        if not w.subtitled:
            cur = (w.start_ms, w.end_ms) if cur is None else (cur[0], w.end_ms)
        elif cur is not None:
            out.append(cur)
            cur = None
    if cur is not None:
        out.append(cur)
    return out


def simulate_corpus(cfg: SimConfig = SimConfig()):
    """``(programs, tracks)`` with genres cycling through the genre table."""
    programs, tracks = [], {}
    for i in range(cfg.n_programs):
        pid = f"prog{i:04d}"
        p, tr = simulate_program(pid, GENRES[i % len(GENRES)], cfg, i)
        programs.append(p)
        tracks[pid] = tr
    return programs, tracks


def write_simulated_corpus(cfg: SimConfig, out_dir) -> List[Path]:
    programs, tracks = simulate_corpus(cfg)
    dirs = []
    for p in programs:
        d = write_program_bundle(p, out_dir)
        write_track(tracks[p.program_id], d / TRACK_FILE)
        dirs.append(d)
    return dirs
