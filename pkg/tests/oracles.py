"""Independent reference implementations used only by the test-suite.

They favour obviousness over speed: full DP matrices, explicit recursion,
counting straight from raw sentences.
"""
import math
from collections import Counter, defaultdict


def sw_oracle(hyp, ref, match=2.0, mismatch=-1.0, gap=-1.0):
    """Full-matrix Smith-Waterman; returns (score, [(kind, hyp_i, ref_j)])."""
    n, m = len(hyp), len(ref)
    H = [[0.0] * (m + 1) for _ in range(n + 1)]
    L = [[0] * (m + 1) for _ in range(n + 1)]
    P = [[None] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            s = match if hyp[i - 1] == ref[j - 1] else mismatch
            cands = [
                (H[i - 1][j - 1] + s, L[i - 1][j - 1] + 1, 0, "diag"),
                (H[i - 1][j] + gap, L[i - 1][j] + 1, 1, "ins"),
                (H[i][j - 1] + gap, L[i][j - 1] + 1, 2, "del"),
            ]
            h, l, _, ptr = min(cands, key=lambda c: (-c[0], c[1], c[2]))
            if h <= 0:
                h, l, ptr = 0.0, 0, None
            H[i][j], L[i][j], P[i][j] = h, l, ptr
    cells = [(H[i][j], j, i) for i in range(n + 1) for j in range(m + 1)]
    best, bj, bi = min(cells, key=lambda c: (-c[0], c[1], c[2]))
    if best <= 0:
        return 0.0, []
    ops = []
    i, j = bi, bj
    while P[i][j] is not None:
        ptr = P[i][j]
        if ptr == "diag":
            kind = "match" if hyp[i - 1] == ref[j - 1] else "substitute"
            ops.append((kind, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif ptr == "ins":
            ops.append(("insert", i - 1, None))
            i -= 1
        else:
            ops.append(("delete", None, j - 1))
            j -= 1
    ops.reverse()
    return best, ops


def edit_distance_oracle(a, b):
    """Textbook quadratic Levenshtein with a full table."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[n][m]


def common_block_oracle(a, b):
    """Recursive longest-common-block decomposition by brute enumeration."""
    def rec(alo, ahi, blo, bhi):
        best = (0, 0, 0)
        for i in range(alo, ahi):
            for j in range(blo, bhi):
                k = 0
                while i + k < ahi and j + k < bhi and a[i + k] == b[j + k]:
                    k += 1
                if k > best[2]:
                    best = (i, j, k)
        i, j, k = best
        if k == 0:
            return []
        return rec(alo, i, blo, j) + [(i, j, k)] + rec(i + k, ahi, j + k, bhi)
    return rec(0, len(a), 0, len(b))


def kanji_reference(n):
    """Spell an integer in Kanji by digit groups (independent of the package)."""
    digits = "〇一二三四五六七八九"
    if n == 0:
        return digits[0]
    out = []
    for big, name in ((10 ** 12, "兆"), (10 ** 8, "億"), (10 ** 4, "万"), (1, "")):
        g, n = divmod(n, big)
        if not g:
            continue
        part = ""
        for u, uname in ((1000, "千"), (100, "百"), (10, "十"), (1, "")):
            q, g = divmod(g, u)
            if q:
                part += ("" if (q == 1 and uname) else digits[q]) + uname
        out.append(part + name)
    return "".join(out)


class MKNOracle:
    """Interpolated modified Kneser-Ney computed directly from sentences.

    Mirrors the textbook recursion; no backoff weights, no ARPA.
    """

    def __init__(self, sentences, order):
        self.order = order
        raw = Counter()
        for s in sentences:
            toks = ["<s>"] + list(s) + ["</s>"]
            for k in range(1, order + 1):
                for i in range(len(toks) - k + 1):
                    raw[tuple(toks[i:i + k])] += 1
        self.raw = raw
        left = defaultdict(set)
        for g in raw:
            if len(g) >= 2:
                left[g[1:]].add(g[0])
        adj = {}
        for g, c in raw.items():
            if len(g) == order or g[0] == "<s>":
                adj[g] = c
            else:
                adj[g] = len(left[g])
        self.adj = adj
        self.vocab = sorted({g[0] for g in raw if len(g) == 1 and g[0] != "<s>"} | {"<unk>"})
        self.disc = {}
        for k in range(1, order + 1):
            coc = Counter(c for g, c in adj.items() if len(g) == k and not (k == 1 and g[0] == "<s>"))
            n1, n2, n3, n4 = (coc[i] for i in (1, 2, 3, 4))
            ok = n1 > 0 and n2 > 0 and n3 > 0
            if ok:
                y = n1 / (n1 + 2 * n2)
                d = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
                ok = 0 < d[0] < 1 and 0 < d[1] < 2 and 0 < d[2] < 3
            self.disc[k] = d if ok else (0.5, 0.5, 0.5)

    def _d(self, k, c):
        return self.disc[k][min(c, 3) - 1]

    def prob(self, word, context):
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        return self._p(word, context)

    def _p(self, word, context):
        k = len(context) + 1
        conts = {g[-1]: c for g, c in self.adj.items() if len(g) == k and g[:-1] == context and c > 0}
        if k == 1:
            conts.pop("<s>", None)
            total = sum(conts.values())
            gamma = sum(self._d(1, c) for c in conts.values()) / total
            p = max(conts.get(word, 0) - self._d(1, conts[word]), 0) / total if word in conts else 0.0
            return p + (gamma if word == "<unk>" else 0.0)
        if not conts:
            return self._p(word, context[1:])
        total = sum(conts.values())
        gamma = sum(self._d(k, c) for c in conts.values()) / total
        own = (conts[word] - self._d(k, conts[word])) / total if word in conts else 0.0
        return own + gamma * self._p(word, context[1:])

    def contexts(self):
        out = set()
        for g, c in self.adj.items():
            if len(g) >= 2 and c > 0:
                out.add(g[:-1])
        out.add(())
        return out


def log_sum(xs):
    return math.fsum(xs)
