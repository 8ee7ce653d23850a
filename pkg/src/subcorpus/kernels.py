"""Dynamic-programming kernels on integer-coded token sequences.

Two hot row updates live here, each in two flavours:

* a scalar loop compiled with numba (``*_loop``), and
* a vectorised numpy version (``*_numpy``) that resolves the in-row
  left-to-right dependency with prefix scans.

``sw_row`` / ``lev_row`` point at the active flavour (see ``_accel``).  The
drivers below are written once and compiled by numba when it is available.

Smith-Waterman cell rule (rows ``a``, columns ``b``)::

    H = max(0, H[i-1, j-1] + s(a_i, b_j), H[i-1, j] + gap, H[i, j-1] + gap)

Among candidates with equal score the one with the smaller path length ``L``
wins; full ties go diag, then the preferred gap direction.  A cell whose best
score is <= 0 is a zero (start) cell with ``L = 0``.  The numpy flavour is
bit-identical to the loop whenever scores are exactly representable sums
(integers, dyadic fractions).
"""
import numpy as np

from ._accel import NUMBA_ENABLED, jit

DIR_ZERO = 0
DIR_DIAG = 1
DIR_UP = 2
DIR_LEFT = 3

OP_DIAG = 0
OP_ROW_ONLY = 1
OP_COL_ONLY = 2

DEFAULT_TRACE_BUDGET = 1 << 22

_SENTINEL = np.int64(1) << 40
_GROUP = np.int64(1) << 41


def _sw_row_loop(a_tok, b, ncols, Hp, Lp, Tp, Hc, Lc, Tc, Dc, match, mismatch, gap, left_first, zero_base):
    Hc[0] = 0.0
    Lc[0] = 0
    Dc[0] = DIR_ZERO
    Tc[0] = zero_base if zero_base >= 0 else -1
    for j in range(1, ncols + 1):
        s = match if b[j - 1] == a_tok else mismatch
        h = Hp[j - 1] + s
        l = Lp[j - 1] + 1
        d = DIR_DIAG
        t = Tp[j - 1]
        hu = Hp[j] + gap
        lu = Lp[j] + 1
        hl = Hc[j - 1] + gap
        ll = Lc[j - 1] + 1
        if left_first:
            if hl > h or (hl == h and ll < l):
                h, l, d, t = hl, ll, DIR_LEFT, Tc[j - 1]
            if hu > h or (hu == h and lu < l):
                h, l, d, t = hu, lu, DIR_UP, Tp[j]
        else:
            if hu > h or (hu == h and lu < l):
                h, l, d, t = hu, lu, DIR_UP, Tp[j]
            if hl > h or (hl == h and ll < l):
                h, l, d, t = hl, ll, DIR_LEFT, Tc[j - 1]
        if h <= 0.0:
            h = 0.0
            l = 0
            d = DIR_ZERO
            t = zero_base + j if zero_base >= 0 else -1
        Hc[j] = h
        Lc[j] = l
        Dc[j] = d
        Tc[j] = t


def _sw_row_numpy(a_tok, b, ncols, Hp, Lp, Tp, Hc, Lc, Tc, Dc, match, mismatch, gap, left_first, zero_base):
    n = ncols
    Hc[0] = 0.0
    Lc[0] = 0
    Dc[0] = DIR_ZERO
    Tc[0] = zero_base if zero_base >= 0 else -1
    if n == 0:
        return
    cols = np.arange(n + 1, dtype=np.int64)
    s = np.where(b[:n] == a_tok, match, mismatch)
    hd = Hp[:n] + s
    ld = Lp[:n] + 1
    hu = Hp[1:n + 1] + gap
    lu = Lp[1:n + 1] + 1
    take_up = (hu > hd) | ((hu == hd) & (lu < ld))

    # own candidate per column (diag/up/zero), column 0 is always a zero cell
    OH = np.zeros(n + 1)
    OL = np.zeros(n + 1, dtype=np.int64)
    OD = np.zeros(n + 1, dtype=np.uint8)
    OT = np.empty(n + 1, dtype=np.int64)
    OH[1:] = np.where(take_up, hu, hd)
    OL[1:] = np.where(take_up, lu, ld)
    OD[1:] = np.where(take_up, DIR_UP, DIR_DIAG)
    OT[1:] = np.where(take_up, Tp[1:n + 1], Tp[:n])
    zero = OH <= 0.0
    zero[0] = True
    OH[zero] = 0.0
    OL[zero] = 0
    OD[zero] = DIR_ZERO
    if zero_base >= 0:
        OT[zero] = zero_base + cols[zero]
    else:
        OT[zero] = -1

    # a horizontal chain from k reaches j with (OH[k] + gap*(j-k), OL[k] + j-k):
    # rank columns by the j-independent key (A desc, B asc)
    A = OH - gap * cols
    B = OL - cols
    CA = np.maximum.accumulate(A)
    group = np.zeros(n + 1, dtype=np.int64)
    group[1:] = np.cumsum(CA[1:] > CA[:-1])
    C = np.where(A == CA, B, _SENTINEL) - group * _GROUP
    RB = np.minimum.accumulate(C) + group * _GROUP

    pA, pB = CA[:-1], RB[:-1]
    oA, oB = A[1:], B[1:]
    tie = (pA == oA) & (pB == oB)
    left = (pA > oA) | ((pA == oA) & (pB < oB))
    if left_first:
        left |= tie & (OD[1:] == DIR_UP)

    keep = np.ones(n + 1, dtype=np.bool_)
    keep[1:] = ~left
    src = np.maximum.accumulate(np.where(keep, cols, 0))
    span = cols - src
    Hc[:n + 1] = OH[src] + gap * span
    Lc[:n + 1] = OL[src] + span
    Tc[:n + 1] = OT[src]
    Dc[:n + 1] = np.where(keep, OD, DIR_LEFT)


def _lev_row_loop(a_tok, b, ncols, Dp, Dc, i):
    Dc[0] = i
    for j in range(1, ncols + 1):
        cost = 0 if b[j - 1] == a_tok else 1
        v = Dp[j - 1] + cost
        u = Dp[j] + 1
        if u < v:
            v = u
        w = Dc[j - 1] + 1
        if w < v:
            v = w
        Dc[j] = v


def _lev_row_numpy(a_tok, b, ncols, Dp, Dc, i):
    n = ncols
    cols = np.arange(n + 1, dtype=np.int64)
    X = np.empty(n + 1, dtype=np.int64)
    X[0] = i
    X[1:] = np.minimum(Dp[:n] + (b[:n] != a_tok), Dp[1:n + 1] + 1)
    Dc[:n + 1] = np.minimum.accumulate(X - cols) + cols


if NUMBA_ENABLED:
    sw_row = jit(_sw_row_loop)
    lev_row = jit(_lev_row_loop)
else:
    sw_row = _sw_row_numpy
    lev_row = _lev_row_numpy


def _sw_forward(a, b, match, mismatch, gap, left_first, col_tie_first):
    """Score pass in O(len(b)) memory.

    Returns ``(best, end_row, end_col, start_row, start_col)`` where the start
    is the zero cell the optimal path grows out of.
    """
    n = a.shape[0]
    m = b.shape[0]
    H = np.zeros((2, m + 1))
    L = np.zeros((2, m + 1), dtype=np.int64)
    T = np.zeros((2, m + 1), dtype=np.int64)
    D = np.zeros(m + 1, dtype=np.uint8)
    for j in range(m + 1):
        T[0, j] = j
    best = 0.0
    bi = 0
    bj = 0
    btag = 0
    for i in range(1, n + 1):
        p = (i - 1) & 1
        c = i & 1
        sw_row(a[i - 1], b, m, H[p], L[p], T[p], H[c], L[c], T[c], D,
               match, mismatch, gap, left_first, i * (m + 1))
        j = np.argmax(H[c])
        h = H[c, j]
        if h > best or (h == best and h > 0.0 and col_tie_first and j < bj):
            best = h
            bi = i
            bj = j
            btag = T[c, j]
    return best, bi, bj, btag // (m + 1), btag % (m + 1)


def _sw_trace(a, b, match, mismatch, gap, left_first, si, sj, bi, bj, budget):
    """Recover the path from (si, sj) to (bi, bj).

    Rows are halved recursively (explicit stack).  At each split the rows
    above the midpoint carry the column where their chosen path crossed the
    midpoint row; the upper half is solved first and its exit column becomes
    the end cell of the lower half.  Memory: O(len(b) * log(rows)) plus a
    direction block of at most ``budget`` cells.
    """
    width = bj + 1
    maxops = (bi - si) + (bj - sj) + 1
    kinds = np.empty(maxops, dtype=np.int8)
    ra = np.empty(maxops, dtype=np.int64)
    rb = np.empty(maxops, dtype=np.int64)
    nops = 0

    depth = 2
    x = bi - si
    while x > 1:
        x = (x + 1) // 2
        depth += 1
    BH = np.zeros((depth, width))
    BL = np.zeros((depth, width), dtype=np.int64)
    H = np.zeros((2, width))
    L = np.zeros((2, width), dtype=np.int64)
    T = np.zeros((2, width), dtype=np.int64)
    Dscr = np.zeros(width, dtype=np.uint8)
    st_lo = np.zeros(depth, dtype=np.int64)
    st_d = np.zeros(depth, dtype=np.int64)
    sp = 0

    # boundary row si, restricted to columns 0..bj
    for i in range(1, si + 1):
        p = (i - 1) & 1
        c = i & 1
        sw_row(a[i - 1], b, bj, H[p], L[p], T[p], H[c], L[c], T[c], Dscr,
               match, mismatch, gap, left_first, -1)
    if si > 0:
        BH[0, :] = H[si & 1, :]
        BL[0, :] = L[si & 1, :]

    lo = si
    hi = bi
    end = bj
    d = 0
    while True:
        rows = hi - lo
        if rows <= 1 or rows * (end + 1) <= budget:
            Dblk = np.empty((rows, end + 1), dtype=np.uint8)
            H[0, :end + 1] = BH[d, :end + 1]
            L[0, :end + 1] = BL[d, :end + 1]
            for r in range(rows):
                p = r & 1
                c = (r + 1) & 1
                sw_row(a[lo + r], b, end, H[p], L[p], T[p], H[c], L[c], T[c], Dblk[r],
                       match, mismatch, gap, left_first, -1)
            i = hi
            j = end
            x = -1
            while True:
                if i == lo:
                    x = j
                    break
                dd = Dblk[i - lo - 1, j]
                if dd == DIR_ZERO:
                    break
                if dd == DIR_DIAG:
                    kinds[nops] = OP_DIAG
                    ra[nops] = i - 1
                    rb[nops] = j - 1
                    i -= 1
                    j -= 1
                elif dd == DIR_UP:
                    kinds[nops] = OP_ROW_ONLY
                    ra[nops] = i - 1
                    rb[nops] = -1
                    i -= 1
                else:
                    kinds[nops] = OP_COL_ONLY
                    ra[nops] = -1
                    rb[nops] = j - 1
                    j -= 1
                nops += 1
            if x < 0 or sp == 0:
                break
            sp -= 1
            hi = lo
            lo = st_lo[sp]
            d = st_d[sp]
            end = x
        else:
            mid = (lo + hi) // 2
            H[0, :end + 1] = BH[d, :end + 1]
            L[0, :end + 1] = BL[d, :end + 1]
            for r in range(mid - lo):
                p = r & 1
                c = (r + 1) & 1
                sw_row(a[lo + r], b, end, H[p], L[p], T[p], H[c], L[c], T[c], Dscr,
                       match, mismatch, gap, left_first, -1)
            c = (mid - lo) & 1
            BH[d + 1, :end + 1] = H[c, :end + 1]
            BL[d + 1, :end + 1] = L[c, :end + 1]
            for j in range(end + 1):
                T[c, j] = j
            for r in range(mid - lo, rows):
                p = r & 1
                c = (r + 1) & 1
                sw_row(a[lo + r], b, end, H[p], L[p], T[p], H[c], L[c], T[c], Dscr,
                       match, mismatch, gap, left_first, -1)
            x = T[rows & 1, end]
            if x >= 0:
                st_lo[sp] = lo
                st_d[sp] = d
                sp += 1
            lo = mid
            d += 1
    return kinds[:nops][::-1].copy(), ra[:nops][::-1].copy(), rb[:nops][::-1].copy()


def _levenshtein(a, b):
    n = a.shape[0]
    m = b.shape[0]
    D = np.zeros((2, m + 1), dtype=np.int64)
    for j in range(m + 1):
        D[0, j] = j
    for i in range(1, n + 1):
        lev_row(a[i - 1], b, m, D[(i - 1) & 1], D[i & 1], i)
    return D[n & 1, m]


sw_forward = jit(_sw_forward)
sw_trace = jit(_sw_trace)
levenshtein_ids = jit(_levenshtein)


def encode_pair(x, y):
    """Map two token sequences onto a shared dense int64 alphabet."""
    table = {}
    xa = np.fromiter((table.setdefault(t, len(table)) for t in x), dtype=np.int64, count=len(x))
    ya = np.fromiter((table.setdefault(t, len(table)) for t in y), dtype=np.int64, count=len(y))
    return xa, ya
