"""Token-sequence alignment: Smith-Waterman, matching blocks, timestamp transfer."""
import difflib
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

from . import kernels


def _surfaces(seq):
    return [getattr(t, "surface", t) for t in seq]


@dataclass(frozen=True)
class AlignmentOp:
    kind: str
    hyp_index: Optional[int] = None
    ref_index: Optional[int] = None

    def __post_init__(self):
        both = self.hyp_index is not None and self.ref_index is not None
        if self.kind in ("match", "substitute"):
            ok = both
        elif self.kind == "insert":
            ok = self.hyp_index is not None and self.ref_index is None
        elif self.kind == "delete":
            ok = self.ref_index is not None and self.hyp_index is None
        else:
            raise ValueError(f"unknown op kind {self.kind!r}")
        if not ok:
            raise ValueError(f"indices inconsistent with {self.kind}")


@dataclass(frozen=True)
class SWParams:
    match_score: float = 2.0
    mismatch_penalty: float = -1.0
    gap_penalty: float = -1.0

    def __post_init__(self):
        if not self.match_score > 0:
            raise ValueError("match_score must be > 0")
        if self.mismatch_penalty > 0 or self.gap_penalty > 0:
            raise ValueError("penalties must be <= 0")


@dataclass(frozen=True)
class MatchingBlock:
    a_start: int
    b_start: int
    length: int


@dataclass(frozen=True)
class LocalAlignment:
    score: float
    ops: Tuple[AlignmentOp, ...]


def local_align(hyp, ref, params: SWParams = SWParams(),
                trace_budget: int = kernels.DEFAULT_TRACE_BUDGET) -> LocalAlignment:
    """Best-scoring local alignment and its score.

    Among equal-score end cells the one with the earlier ref end, then the
    earlier hyp end, wins.  Along the path, equal-score predecessors are
    ranked by shorter path, then diagonal, then hyp-only (insert), then
    ref-only (delete).  The DP runs with the shorter sequence on the column
    axis, so memory is linear in ``min(len(hyp), len(ref))``.
    """
    h = _surfaces(hyp)
    r = _surfaces(ref)
    if not h or not r:
        return LocalAlignment(0.0, ())
    a, b = kernels.encode_pair(h, r)
    transpose = len(r) > len(h)
    if transpose:
        rows, cols, left_first, col_tie_first = b, a, True, False
    else:
        rows, cols, left_first, col_tie_first = a, b, False, True
    ms, mm, gp = float(params.match_score), float(params.mismatch_penalty), float(params.gap_penalty)
    best, bi, bj, si, sj = kernels.sw_forward(rows, cols, ms, mm, gp, left_first, col_tie_first)
    if best <= 0:
        return LocalAlignment(0.0, ())
    kinds, ra, rb = kernels.sw_trace(rows, cols, ms, mm, gp, left_first, si, sj, bi, bj, int(trace_budget))
    ops = []
    for k, x, y in zip(kinds.tolist(), ra.tolist(), rb.tolist()):
        if transpose:
            x, y = y, x
        if k == kernels.OP_DIAG:
            ops.append(AlignmentOp("match" if h[x] == r[y] else "substitute", x, y))
        elif (k == kernels.OP_ROW_ONLY) != transpose:
            ops.append(AlignmentOp("insert", x, None))
        else:
            ops.append(AlignmentOp("delete", None, y))
    return LocalAlignment(float(best), tuple(ops))


def smith_waterman(hyp, ref, params: SWParams = SWParams()) -> List[AlignmentOp]:
    """Optimal local alignment of ``hyp`` against ``ref`` (empty if no positive score)."""
    return list(local_align(hyp, ref, params).ops)


def matching_blocks(a, b) -> List[MatchingBlock]:
    """Recursive longest-common-block decomposition with every token significant."""
    sm = difflib.SequenceMatcher(None, _surfaces(a), _surfaces(b), autojunk=False)
    return [MatchingBlock(i, j, n) for i, j, n in sm.get_matching_blocks() if n]


def _block_pairs(blocks):
    return {(blk.a_start + k, blk.b_start + k) for blk in blocks for k in range(blk.length)}


def bidirectional_valid_pairs(hyp, ref) -> Set[Tuple[int, int]]:
    """Pairs chosen identically by the forward and the reversed matcher."""
    h = _surfaces(hyp)
    r = _surfaces(ref)
    fwd = _block_pairs(matching_blocks(h, r))
    n, m = len(h), len(r)
    bwd = {(n - 1 - i, m - 1 - j) for i, j in _block_pairs(matching_blocks(h[::-1], r[::-1]))}
    return fwd & bwd


@dataclass(frozen=True)
class TimedSpan:
    start_ms: int
    end_ms: int
    hyp_start: int
    hyp_end: int      # exclusive
    ref_start: int
    ref_end: int      # exclusive
    tokens: tuple

    @property
    def pairs_range(self):
        return (self.hyp_start, self.hyp_end), (self.ref_start, self.ref_end)


def _runs(pairs, max_gap, hyp, max_pause_ms):
    runs = []
    cur = []
    for p in pairs:
        if cur:
            h0, r0 = cur[-1]
            split = p[0] - h0 - 1 > max_gap or p[1] - r0 - 1 > max_gap
            if not split and max_pause_ms is not None:
                split = hyp[p[0]].start_ms - hyp[h0].end_ms > max_pause_ms
            if split:
                runs.append(cur)
                cur = []
        cur.append(p)
    if cur:
        runs.append(cur)
    return runs


def transfer_timestamps(pairs, hyp: Sequence, ref_tokens: Sequence, pad_ms: int = 200,
                        max_gap: int = 0, max_pause_ms: Optional[int] = None,
                        duration_ms: Optional[int] = None) -> List[TimedSpan]:
    """Turn runs of valid pairs into timed spans of ref tokens.

    Consecutive pairs stay in one run while both the hyp and the ref index
    advance by at most ``max_gap + 1`` (0 means strictly consecutive) and,
    if ``max_pause_ms`` is set, the silence between the two hyp tokens does
    not exceed it.  A span's transcript is every ref token from the run's
    first to its last pair, skipped ones included.  Padding never crosses
    the midpoint of the silence to the neighbouring run, nor 0 or
    ``duration_ms``.
    """
    ps = sorted(pairs)
    n, m = len(hyp), len(ref_tokens)
    for k, (i, j) in enumerate(ps):
        if not (0 <= i < n and 0 <= j < m):
            raise ValueError(f"pair {(i, j)} out of range for {n}x{m}")
        if k and (i == ps[k - 1][0] or j <= ps[k - 1][1]):
            raise ValueError("pairs must be strictly increasing in both coordinates")
    if pad_ms < 0 or max_gap < 0:
        raise ValueError("pad_ms and max_gap must be >= 0")
    runs = _runs(ps, max_gap, hyp, max_pause_ms)
    bounds = [(hyp[run[0][0]].start_ms, hyp[run[-1][0]].end_ms) for run in runs]
    spans = []
    for k, run in enumerate(runs):
        s, e = bounds[k]
        lo = 0 if k == 0 else max((bounds[k - 1][1] + s) // 2, bounds[k - 1][1])
        hi = duration_ms if k == len(runs) - 1 else (e + bounds[k + 1][0]) // 2
        start = max(s - pad_ms, lo, 0)
        end = e + pad_ms
        if hi is not None:
            end = max(min(end, hi), e)
        (h0, r0), (h1, r1) = run[0], run[-1]
        spans.append(TimedSpan(start, end, h0, h1 + 1, r0, r1 + 1, tuple(ref_tokens[r0:r1 + 1])))
    return spans
