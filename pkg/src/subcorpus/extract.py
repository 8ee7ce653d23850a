"""Iterative extraction of aligned speech segments from long recordings.

Data flow per program::

    Step 1  decode whole recording with a program LM, Smith-Waterman islands
    Step 2  re-decode each island with a segment LM, keep validated runs
    repeat max_repetitions times:
        Step 3  align decoded text to the full subtitle stream
        Step 4  re-decode unaligned residue with a residue LM
        Step 5  merge Step 3 and Step 4 output
    Step 3 once more on the merged data, then drop short segments

Every segment carries one (start_ms, end_ms) timing per transcript token so
that any stage's output can re-enter Step 3.
"""
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .align import SWParams, bidirectional_valid_pairs, local_align, transfer_timestamps
from .decoder import ErrorConfig
from .ngram_lm import build_biased_lm
from .textnorm import Token


class _Timed(NamedTuple):
    surface: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class Segment:
    segment_id: str
    program_id: str
    start_ms: int
    end_ms: int
    tokens: Tuple[Token, ...]
    provenance: Tuple[int, int]
    timings: Tuple[Tuple[int, int], ...] = field(default=(), compare=False, repr=False)
    # subtitle tokens this segment should be matched against in Steps 2/4
    ref_tokens: Optional[Tuple[Token, ...]] = field(default=None, compare=False, repr=False)
    # (first, last] token times without padding; used for overlap decisions
    core: Optional[Tuple[int, int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.end_ms <= self.start_ms:
            raise ValueError(f"segment {self.segment_id}: end_ms must exceed start_ms")
        if self.timings and len(self.timings) != len(self.tokens):
            raise ValueError("timings must parallel tokens")

    @property
    def duration_ms(self):
        return self.end_ms - self.start_ms

    @property
    def core_span(self):
        if self.core is not None:
            return self.core
        if self.timings:
            return self.timings[0][0], self.timings[-1][1]
        return self.start_ms, self.end_ms


def segment_id(program_id: str, start_ms: int) -> str:
    return f"{program_id}-{start_ms:010d}"


def _seg(program_id, start, end, tokens, step, iteration, timings=(), ref_tokens=None, core=None):
    return Segment(segment_id(program_id, start), program_id, start, end, tuple(tokens),
                   (step, iteration), tuple(timings), ref_tokens, core)


@dataclass(frozen=True)
class PipelineConfig:
    min_words_step2: int = 10
    min_final_ms: int = 1000
    max_repetitions: int = 2
    sw_params: SWParams = SWParams()
    pad_ms: int = 200
    decoder_error_cfg: Optional[ErrorConfig] = None
    lm_order: int = 3
    window_ms: int = 30000
    window_overlap_ms: int = 5000
    min_island_matches: int = 5
    # an island is cut where this many consecutive non-match ops occur
    island_split_run: int = 10
    # islands are trimmed until each edge is this many consecutive matches
    island_edge_run: int = 3
    clean_max_gap: int = 0
    align_max_gap: int = 1
    max_pause_ms: int = 2000
    # a skipped subtitle stretch between two aligned spans is re-decoded when
    # the audio between them is at most this long per missing token, plus slack
    hole_ms_per_token: int = 1000
    hole_slack_ms: int = 3000
    # final segments longer than this are cut at their widest pauses
    max_segment_ms: int = 15000

    def __post_init__(self):
        if self.max_repetitions < 0:
            raise ValueError("max_repetitions must be >= 0")
        if self.min_words_step2 < 1:
            raise ValueError("min_words_step2 must be >= 1")
        if self.min_final_ms < 0 or self.pad_ms < 0:
            raise ValueError("min_final_ms and pad_ms must be >= 0")
        if not 0 <= self.window_overlap_ms < self.window_ms:
            raise ValueError("need 0 <= window_overlap_ms < window_ms")
        if min(self.min_island_matches, self.island_split_run, self.island_edge_run) < 1:
            raise ValueError("island parameters must be >= 1")
        if self.max_segment_ms <= 0:
            raise ValueError("max_segment_ms must be > 0")
        if self.clean_max_gap < 0 or self.align_max_gap < 0 or self.max_pause_ms < 0:
            raise ValueError("gap parameters must be >= 0")


@dataclass
class ProgramStats:
    program_id: str
    genre: str
    raw_words: int
    raw_ms: int
    extracted_words: int = 0
    extracted_ms: int = 0
    step_counts: dict = field(default_factory=dict)
    error: Optional[str] = None


class PipelineError(RuntimeError):
    pass


def _lm(token_lists, cfg):
    texts = [[t.surface for t in toks] for toks in token_lists if toks]
    return build_biased_lm(texts, cfg.lm_order)


# ---------------------------------------------------------------- Step 1

def decode_windows(dec, program_id, duration_ms, lm, window_ms=30000, overlap_ms=5000) -> List:
    """Decode a long recording in overlapping windows and stitch the results.

    Each window owns the tokens whose midpoint falls between the centres of
    its overlaps with the neighbouring windows.
    """
    hop = window_ms - overlap_ms
    starts = list(range(0, max(duration_ms - overlap_ms, 1), hop)) or [0]
    out = []
    for k, s in enumerate(starts):
        e = min(s + window_ms, duration_ms)
        lo = 0 if k == 0 else s + overlap_ms // 2
        hi = duration_ms + 1 if k == len(starts) - 1 else starts[k + 1] + overlap_ms // 2
        for t in dec.decode(program_id, s, e, lm):
            mid = (t.start_ms + t.end_ms) // 2
            if lo <= mid < hi and (not out or t.start_ms >= out[-1].end_ms):
                out.append(t)
    return out


def _split_island(ops, split_run):
    """Cut an op list at long stretches of non-matches; trim to matches."""
    pieces, cur, miss = [], [], []
    for op in ops:
        if op.kind == "match":
            if len(miss) >= split_run:
                pieces.append(cur)
                cur = []
            elif cur:
                cur.extend(miss)
            miss = []
            cur.append(op)
        else:
            miss.append(op)
    if cur:
        pieces.append(cur)
    return pieces


def _trim_edges(ops, edge):
    def start(seq):
        run = 0
        for k, op in enumerate(seq):
            run = run + 1 if op.kind == "match" else 0
            if run >= edge:
                return k - edge + 1
        return None

    lo = start(ops)
    if lo is None:
        return []
    hi = len(ops) - start(ops[::-1])
    return ops[lo:hi]


def find_islands(hyp, ref, cfg: PipelineConfig) -> List[List]:
    """Repeated Smith-Waterman: align, keep the island, re-align what is left.

    The remainder left and right of an island is aligned separately so that
    islands come out monotone in both sequences.
    """
    islands = []
    stack = [(0, len(hyp), 0, len(ref))]
    while stack:
        h0, h1, r0, r1 = stack.pop()
        if h1 - h0 < cfg.min_island_matches or r1 - r0 < cfg.min_island_matches:
            continue
        res = local_align(hyp[h0:h1], ref[r0:r1], cfg.sw_params)
        if res.score <= 0:
            continue
        ops = [type(op)(op.kind,
                        None if op.hyp_index is None else op.hyp_index + h0,
                        None if op.ref_index is None else op.ref_index + r0) for op in res.ops]
        if sum(op.kind == "match" for op in ops) < cfg.min_island_matches:
            continue
        pieces = [_trim_edges(p, cfg.island_edge_run) for p in _split_island(ops, cfg.island_split_run)]
        pieces = [p for p in pieces
                  if sum(op.kind == "match" for op in p) >= cfg.min_island_matches]
        islands.extend(pieces)
        first = next(op for op in ops if op.kind == "match")
        last = next(op for op in reversed(ops) if op.kind == "match")
        stack.append((last.hyp_index + 1, h1, last.ref_index + 1, r1))
        stack.append((h0, first.hyp_index, r0, first.ref_index))
    islands.sort(key=lambda p: p[0].hyp_index)
    return islands


def segment_long_recording(program, dec, cfg: PipelineConfig = PipelineConfig()) -> List[Segment]:
    """Step 1: program-level biased LM decode and Smith-Waterman islands."""
    if not program.cues:
        raise ValueError(f"program {program.program_id} has no cues")
    ref = program.subtitle_tokens()
    lm = _lm([c.tokens for c in program.cues], cfg)
    duration = program.audio.duration_ms
    hyp = decode_windows(dec, program.program_id, duration, lm, cfg.window_ms, cfg.window_overlap_ms)
    islands = find_islands([t.surface for t in hyp], [t.surface for t in ref], cfg)
    bounds = [(hyp[p[0].hyp_index].start_ms, hyp[p[-1].hyp_index].end_ms) for p in islands]
    segs = []
    for k, ops in enumerate(islands):
        s, e = bounds[k]
        lo = 0 if k == 0 else (bounds[k - 1][1] + s) // 2
        hi = duration if k == len(islands) - 1 else (e + bounds[k + 1][0]) // 2
        start, end = max(s - cfg.pad_ms, lo, 0), max(min(e + cfg.pad_ms, hi), e)
        r0, r1 = ops[0].ref_index, ops[-1].ref_index + 1
        segs.append(_seg(program.program_id, start, end, ref[r0:r1], 1, 0, core=(s, e)))
    return segs


# ---------------------------------------------------------- Steps 2 and 4

def clean_segment(seg: Segment, dec, cfg: PipelineConfig = PipelineConfig(),
                  step: int = 2, iteration: int = 0) -> List[Segment]:
    """Steps 2 and 4: re-decode with a segment LM and keep validated runs.

    The LM and the matching target are the segment's subtitle tokens
    (``ref_tokens`` for Step-3 residue, ``tokens`` otherwise).  Output
    transcripts are the decoded words of each run.  Only Step 2 applies the
    ``min_words_step2`` filter.
    """
    ref = seg.ref_tokens if seg.ref_tokens is not None else seg.tokens
    if not ref:
        return []
    lm = _lm([ref], cfg)
    hyp = dec.decode(seg.program_id, seg.start_ms, seg.end_ms, lm)
    if not hyp:
        return []
    pairs = bidirectional_valid_pairs([t.surface for t in hyp], [t.surface for t in ref])
    spans = transfer_timestamps(pairs, hyp, ref, cfg.pad_ms, cfg.clean_max_gap, cfg.max_pause_ms)
    out = []
    for sp in spans:
        words = hyp[sp.hyp_start:sp.hyp_end]
        if step == 2 and len(words) < cfg.min_words_step2:
            continue
        start = max(sp.start_ms, seg.start_ms)
        end = min(sp.end_ms, seg.end_ms)
        if end <= start:
            continue
        out.append(_seg(seg.program_id, start, end, [Token(w.surface) for w in words], step, iteration,
                        [(w.start_ms, w.end_ms) for w in words],
                        core=(words[0].start_ms, words[-1].end_ms)))
    return out


# ---------------------------------------------------------------- Step 3

def _timed_stream(segments):
    hyp, owner = [], []
    prev = 0
    for k, seg in enumerate(segments):
        times = seg.timings
        if not times and seg.tokens:
            c0, c1 = seg.core_span
            n = len(seg.tokens)
            times = [(c0 + (c1 - c0) * i // n, c0 + (c1 - c0) * (i + 1) // n) for i in range(n)]
        for tok, (s, e) in zip(seg.tokens, times):
            s = max(s, prev)
            e = max(e, s)
            hyp.append(_Timed(tok.surface, s, e))
            owner.append(k)
            prev = e
    return hyp, owner


def _ref_timings(pairs_in_run, hyp, r0, r1):
    """Per-ref-token times; unmatched ref tokens share the gap between matches."""
    at = {j: (hyp[i].start_ms, hyp[i].end_ms) for i, j in pairs_in_run}
    out = [None] * (r1 - r0)
    j = r0
    while j < r1:
        if j in at:
            out[j - r0] = at[j]
            j += 1
            continue
        k = j
        while k not in at:
            k += 1
        s, e = out[j - r0 - 1][1], at[k][0]
        n = k - j
        for q in range(n):
            out[j - r0 + q] = (s + (e - s) * q // n, s + (e - s) * (q + 1) // n)
        j = k
    return out


def realign_unmatched(decoded_segments: Sequence[Segment], program, cfg: PipelineConfig = PipelineConfig(),
                      iteration: int = 0, coverage: Optional[Sequence[Tuple[int, int]]] = None
                      ) -> Tuple[List[Segment], List[Segment]]:
    """Step 3: align decoded text with the program's whole subtitle stream.

    Aligned output carries subtitle tokens.  Unaligned output is the decoded
    residue (runs taking part in no aligned span) plus the audio between two
    aligned spans whose subtitle tokens were skipped, when that audio is
    short enough to plausibly hold them.  Residue knows the subtitle tokens
    between its neighbouring aligned spans as ``ref_tokens``.

    ``coverage`` (the Step-1 segment spans) confines such holes to audio
    already known to belong to subtitled speech, so they never reach into
    commercials that the island search excluded.
    """
    pid = program.program_id
    duration = program.audio.duration_ms
    segs = sorted(decoded_segments, key=lambda s: s.start_ms)
    hyp, owner = _timed_stream(segs)
    ref = program.subtitle_tokens()
    pairs = sorted(bidirectional_valid_pairs([t.surface for t in hyp], [t.surface for t in ref]))
    spans = transfer_timestamps(pairs, hyp, ref, cfg.pad_ms, cfg.align_max_gap, cfg.max_pause_ms, duration)

    aligned = []
    pi = 0
    for sp in spans:
        run = []
        while pi < len(pairs) and pairs[pi][0] < sp.hyp_end:
            if pairs[pi][0] >= sp.hyp_start:
                run.append(pairs[pi])
            pi += 1
        times = _ref_timings(run, hyp, sp.ref_start, sp.ref_end)
        core = (hyp[sp.hyp_start].start_ms, hyp[sp.hyp_end - 1].end_ms)
        if sp.end_ms > sp.start_ms:
            aligned.append(_seg(pid, sp.start_ms, sp.end_ms, sp.tokens, 3, iteration, times, core=core))

    def neighbours(h0, h1):
        prev = next_ = None
        for sp in spans:
            if sp.hyp_end <= h0:
                prev = sp
            elif sp.hyp_start >= h1:
                next_ = sp
                break
        return prev, next_

    def residue(prev, next_, start, end, tokens=(), timings=()):
        lo = prev.end_ms if prev else 0
        hi = next_.start_ms if next_ else duration
        start, end = max(start, lo), min(end, hi)
        if end <= start:
            return None
        ctx = tuple(ref[prev.ref_end if prev else 0:next_.ref_start if next_ else len(ref)])
        return _seg(pid, start, end, tokens, 3, iteration, timings, ref_tokens=ctx)

    covered = [False] * len(hyp)
    for sp in spans:
        for i in range(sp.hyp_start, sp.hyp_end):
            covered[i] = True
    unaligned = []
    i = 0
    while i < len(hyp):
        if covered[i]:
            i += 1
            continue
        j = i + 1
        while (j < len(hyp) and not covered[j] and owner[j] == owner[i]
               and hyp[j].start_ms - hyp[j - 1].end_ms <= cfg.max_pause_ms):
            j += 1
        prev, next_ = neighbours(i, j)
        r = residue(prev, next_, hyp[i].start_ms - cfg.pad_ms, hyp[j - 1].end_ms + cfg.pad_ms,
                    [Token(t.surface) for t in hyp[i:j]], [(t.start_ms, t.end_ms) for t in hyp[i:j]])
        if r is not None:
            unaligned.append(r)
        i = j

    # skipped subtitle stretches with no decoded residue in between
    bounds = [None] + list(spans) + [None]
    for prev, next_ in zip(bounds, bounds[1:]):
        r0 = prev.ref_end if prev else 0
        r1 = next_.ref_start if next_ else len(ref)
        if r1 <= r0 or (prev is None and next_ is None):
            continue
        h0 = prev.hyp_end if prev else 0
        h1 = next_.hyp_start if next_ else len(hyp)
        if not all(covered[h0:h1]):
            continue
        lo = prev.end_ms if prev else 0
        hi = next_.start_ms if next_ else duration
        if hi - lo > (r1 - r0) * cfg.hole_ms_per_token + cfg.hole_slack_ms:
            continue
        pieces = [(lo, hi)] if coverage is None else [
            (max(lo, c0), min(hi, c1)) for c0, c1 in coverage if c0 < hi and lo < c1]
        for a, b in pieces:
            r = residue(prev, next_, a, b)
            if r is not None:
                unaligned.append(r)
    unaligned.sort(key=lambda s: s.start_ms)
    return aligned, unaligned


# ---------------------------------------------------------------- Step 5

def _with_bounds(seg, start, end):
    if start == seg.start_ms and end == seg.end_ms:
        return seg
    return replace(seg, segment_id=segment_id(seg.program_id, start), start_ms=start, end_ms=end)


def merge_segments(a: Sequence[Segment], b: Sequence[Segment]) -> List[Segment]:
    """Step 5: sorted union without overlaps.

    When two segments share speech (their token-time cores overlap) the
    longer one survives, ties going to ``a``.  When only padding overlaps,
    both are trimmed at the midpoint between the cores.
    """
    items = sorted([(s.start_ms, 0, k, s) for k, s in enumerate(a)]
                   + [(s.start_ms, 1, k, s) for k, s in enumerate(b)], key=lambda x: x[:3])
    kept = []   # (src, seg)
    for _, src, _, seg in items:
        while kept and kept[-1][1].end_ms > seg.start_ms:
            psrc, prev = kept[-1]
            p0, p1 = prev.core_span
            s0, s1 = seg.core_span
            if p1 <= s0:
                mid = (p1 + s0) // 2
                kept[-1] = (psrc, _with_bounds(prev, prev.start_ms, max(min(prev.end_ms, mid), p1)))
                seg = _with_bounds(seg, max(seg.start_ms, kept[-1][1].end_ms), seg.end_ms)
                if seg.end_ms <= seg.start_ms:
                    seg = None
                break
            if (seg.duration_ms, -src) > (prev.duration_ms, -psrc):
                kept.pop()
                continue
            seg = None
            break
        if seg is not None:
            kept.append((src, seg))
    return [s for _, s in kept]


# ---------------------------------------------------------------- driver

def split_long(seg: Segment, max_ms: int) -> List[Segment]:
    """Cut at the widest inter-token pause until every piece fits ``max_ms``."""
    if seg.duration_ms <= max_ms or len(seg.tokens) < 2 or not seg.timings:
        return [seg]
    t = seg.timings
    k = max(range(1, len(t)), key=lambda i: (t[i][0] - t[i - 1][1], -abs(2 * i - len(t))))
    cut = (t[k - 1][1] + t[k][0]) // 2
    cut = min(max(cut, seg.start_ms + 1), seg.end_ms - 1)
    if not seg.start_ms < cut < seg.end_ms:
        return [seg]
    step, it = seg.provenance
    left = _seg(seg.program_id, seg.start_ms, cut, seg.tokens[:k], step, it, t[:k],
                core=(t[0][0], t[k - 1][1]))
    right = _seg(seg.program_id, cut, seg.end_ms, seg.tokens[k:], step, it, t[k:],
                 core=(t[k][0], t[-1][1]))
    return split_long(left, max_ms) + split_long(right, max_ms)


def run_pipeline(program, dec, cfg: PipelineConfig = PipelineConfig()) -> Tuple[List[Segment], ProgramStats]:
    """Full workflow for one program; returns final segments and stats."""
    counts = {}
    s1 = segment_long_recording(program, dec, cfg)
    counts["step1"] = len(s1)
    coverage = [(s.start_ms, s.end_ms) for s in s1]
    merged = sorted((x for seg in s1 for x in clean_segment(seg, dec, cfg, 2, 0)), key=lambda s: s.start_ms)
    counts["step2"] = len(merged)
    for it in range(1, cfg.max_repetitions + 1):
        aligned, residue = realign_unmatched(merged, program, cfg, it, coverage)
        s4 = [x for seg in residue for x in clean_segment(seg, dec, cfg, 4, it)]
        merged = merge_segments(aligned, s4)
        counts[f"iter{it}"] = (len(aligned), len(residue), len(s4))
    final, _ = realign_unmatched(merged, program, cfg, cfg.max_repetitions + 1)
    final = [p for s in final for p in split_long(s, cfg.max_segment_ms)]
    final = [s for s in final if s.duration_ms >= cfg.min_final_ms]
    counts["final"] = len(final)
    stats = ProgramStats(program.program_id, program.genre,
                         raw_words=sum(len(c.tokens) for c in program.cues),
                         raw_ms=program.audio.duration_ms,
                         extracted_words=sum(len(s.tokens) for s in final),
                         extracted_ms=sum(s.duration_ms for s in final),
                         step_counts=counts)
    return final, stats
