"""Backoff n-gram language models with modified Kneser-Ney smoothing.

Probabilities are stored as log10 values, ARPA style.  Models are built as
interpolated modified Kneser-Ney and then expressed in backoff form, so the
stored probability of a seen n-gram is the interpolated one and the backoff
weight of a context is its interpolation weight.

The reserved symbols are ``<s>`` (never predicted, stored with log10 prob
-99), ``</s>`` and ``<unk>``.  ``<unk>`` receives the unigram mass left over by
discounting.
"""
import io
import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
LOG10_ZERO = -99.0


class DiscountFallbackWarning(UserWarning):
    """Count-of-counts too sparse for modified KN at some order."""


def _surface(t):
    return t if isinstance(t, str) else t.surface


def _sentences(corpus):
    for sent in corpus:
        yield [_surface(t) for t in sent]


@dataclass(frozen=True)
class NGramModel:
    order: int
    entries: Dict[Tuple[str, ...], Tuple[float, Optional[float]]]
    discounts: Dict[int, Tuple[float, float, float]] = field(default_factory=dict)

    @property
    def vocab(self):
        return frozenset(g[0] for g in self.entries if len(g) == 1)

    def counts_by_order(self):
        c = Counter(len(g) for g in self.entries)
        return [c[k] for k in range(1, self.order + 1)]

    def log10prob(self, word: str, context: Sequence[str] = ()) -> float:
        """Backoff-resolved log10 P(word | context); OOV words score as <unk>."""
        entries = self.entries
        if (word,) not in entries:
            word = UNK
            if (word,) not in entries:
                return -math.inf
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        backoff = 0.0
        while True:
            hit = entries.get(ctx + (word,))
            if hit is not None:
                return backoff + hit[0]
            e = entries.get(ctx)
            if e is not None and e[1] is not None:
                backoff += e[1]
            ctx = ctx[1:]

    def prob(self, word, context=()):
        return 10.0 ** self.log10prob(word, context)

    def map_oov(self, words):
        vocab = self.vocab
        return [w if w in vocab else UNK for w in words]

    def predicted_vocab(self):
        return sorted(w for w in self.vocab if w != BOS)

    def contexts(self):
        """Every context with at least one continuation entry."""
        out = {()}
        for g in self.entries:
            if len(g) >= 2:
                out.add(g[:-1])
        return out


def count_ngrams(corpus: Iterable[Sequence], order: int) -> Counter:
    """Raw counts of all n-grams up to ``order`` over ``<s> w1 .. wn </s>``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    counts = Counter()
    empty = True
    for words in _sentences(corpus):
        empty = False
        toks = [BOS] + words + [EOS]
        for k in range(1, order + 1):
            for i in range(len(toks) - k + 1):
                counts[tuple(toks[i:i + k])] += 1
    if empty:
        raise ValueError("empty corpus")
    return counts


def _adjusted_counts(counts, order):
    left = defaultdict(int)
    for g in counts:
        if len(g) >= 2:
            left[g[1:]] += 1
    adj = {}
    for g, c in counts.items():
        if len(g) == order or g[0] == BOS:
            adj[g] = c
        else:
            adj[g] = left[g]
    return adj


def _discounts(adj, order):
    out = {}
    for k in range(1, order + 1):
        coc = Counter(c for g, c in adj.items() if len(g) == k and c > 0 and g != (BOS,))
        n1, n2, n3, n4 = coc[1], coc[2], coc[3], coc[4]
        d = None
        if n1 and n2 and n3:
            y = n1 / (n1 + 2 * n2)
            d = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
            if not (0 < d[0] < 1 and 0 < d[1] < 2 and 0 < d[2] < 3):
                d = None
        if d is None:
            warnings.warn(f"order {k}: count-of-counts n1..n4={n1},{n2},{n3},{n4} unusable, "
                          "falling back to absolute discount 0.5", DiscountFallbackWarning, stacklevel=3)
            d = (0.5, 0.5, 0.5)
        out[k] = d
    return out


def estimate_mkn(counts: Counter, order: int) -> NGramModel:
    """Interpolated modified Kneser-Ney (Chen & Goodman) in backoff form."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if any(len(g) > order for g in counts):
        raise ValueError("count table has n-grams longer than order")
    if len({g[0] for g in counts if len(g) == 1 and g[0] != BOS}) < 2:
        raise ValueError("need at least 2 distinct predicted tokens")
    adj = _adjusted_counts(counts, order)
    disc = _discounts(adj, order)

    def dsc(k, c):
        return disc[k][min(c, 3) - 1]

    # continuation tables: context -> {word: adjusted count}
    table = [None] + [defaultdict(dict) for _ in range(order)]
    for g, c in adj.items():
        if c > 0 and g != (BOS,):
            table[len(g)][g[:-1]][g[-1]] = c

    gamma = {}
    for k in range(1, order + 1):
        for ctx, conts in table[k].items():
            total = sum(conts.values())
            gamma[ctx] = (sum(dsc(k, c) for c in conts.values()) / total, total)

    memo = {}

    def interp(word, ctx):
        key = (word, ctx)
        if key in memo:
            return memo[key]
        k = len(ctx) + 1
        conts = table[k].get(ctx)
        if conts is None:
            p = interp(word, ctx[1:])
        else:
            g, total = gamma[ctx]
            c = conts.get(word, 0)
            own = (c - dsc(k, c)) / total if c else 0.0
            if k == 1:
                p = own + (g if word == UNK else 0.0)
            else:
                p = own + g * interp(word, ctx[1:])
        memo[key] = p
        return p

    entries = {}
    unigrams = set(table[1][()]) | {UNK}
    for w in unigrams:
        entries[(w,)] = [math.log10(interp(w, ())), None]
    entries[(BOS,)] = [LOG10_ZERO, None]
    for k in range(2, order + 1):
        for ctx, conts in table[k].items():
            for w in conts:
                entries[ctx + (w,)] = [math.log10(interp(w, ctx)), None]
    for g, e in entries.items():
        if len(g) < order:
            e[1] = math.log10(gamma[g][0]) if g in gamma else 0.0
    return NGramModel(order, {g: tuple(e) for g, e in entries.items()}, disc)


def prune(model: NGramModel, threshold: float) -> NGramModel:
    """Drop 2+-gram entries with conditional probability below ``threshold``.

    Entries that are the context of a surviving longer entry are kept.
    Surviving probabilities are untouched; every backoff weight is re-derived
    from the surviving entries so distributions stay normalised.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    cut = math.log10(threshold)
    entries = dict(model.entries)
    removed = False
    for k in range(model.order, 1, -1):
        needed = {g[:-1] for g in entries if len(g) == k + 1}
        for g in [g for g in entries if len(g) == k]:
            if entries[g][0] < cut and g not in needed:
                del entries[g]
                removed = True
    if not removed:
        return model
    return NGramModel(model.order, recompute_backoffs(entries, model.order), dict(model.discounts))


def recompute_backoffs(entries, order):
    """Backoff weights that renormalise every context over the predicted vocab."""
    entries = {g: list(e) for g, e in entries.items()}
    conts = defaultdict(list)
    for g in entries:
        if len(g) >= 2:
            conts[g[:-1]].append(g[-1])
    tmp = NGramModel(order, entries)
    for k in range(1, order):
        for g, e in entries.items():
            if len(g) != k:
                continue
            ws = conts.get(g)
            if not ws:
                e[1] = 0.0
                continue
            num = 1.0 - math.fsum(10.0 ** entries[g + (w,)][0] for w in ws)
            den = 1.0 - math.fsum(10.0 ** tmp.log10prob(w, g[1:]) for w in ws)
            e[1] = math.log10(num / den) if num > 0 and den > 0 else LOG10_ZERO
    return {g: tuple(e) for g, e in entries.items()}


def sequence_log10prob(model: NGramModel, tokens: Sequence) -> float:
    """log10 P(tokens, </s> | <s>)."""
    words = [_surface(t) for t in tokens] + [EOS]
    hist = [BOS]
    total = 0.0
    for w in words:
        total += model.log10prob(w, hist)
        hist.append(w)
    return total


def perplexity(model: NGramModel, sentences: Iterable[Sequence]) -> float:
    total = 0.0
    n = 0
    for s in sentences:
        total += sequence_log10prob(model, s)
        n += len(s) + 1
    if n == 0:
        raise ValueError("no text to score")
    return 10.0 ** (-total / n)


@dataclass
class InterpolationResult:
    weight: float
    heldout_ll_trace: list

    @property
    def lam(self):
        return self.weight


def _event_probs(model, heldout):
    out = []
    for s in heldout:
        hist = [BOS]
        for w in [_surface(t) for t in s] + [EOS]:
            out.append(10.0 ** model.log10prob(w, hist))
            hist.append(w)
    return np.array(out)


def interpolate_em(m1: NGramModel, m2: NGramModel, heldout: Sequence[Sequence],
                   tol: float = 1e-6, max_iter: int = 100, init: float = 0.5) -> InterpolationResult:
    """EM estimate of the weight of ``m1`` in ``w*P1 + (1-w)*P2``.

    The trace holds the held-out natural-log likelihood at the initial weight
    and after every update.
    """
    heldout = list(heldout)
    if not heldout:
        raise ValueError("held-out set is empty")
    if not 0.0 <= init <= 1.0:
        raise ValueError("init must lie in [0, 1]")
    p1 = _event_probs(m1, heldout)
    p2 = _event_probs(m2, heldout)

    def ll(lam):
        return math.fsum(np.log(lam * p1 + (1.0 - lam) * p2))

    lam = init
    trace = [ll(lam)]
    for _ in range(max_iter):
        mix = lam * p1 + (1.0 - lam) * p2
        new = float(np.mean(lam * p1 / mix))
        new = min(1.0, max(0.0, new))
        step = abs(new - lam)
        lam = new
        trace.append(ll(lam))
        if step < tol:
            break
    return InterpolationResult(lam, trace)


def build_biased_lm(texts: Sequence[Sequence], order: int = 3) -> NGramModel:
    """LM trained on exactly ``texts`` (one program's or one segment's subtitles)."""
    texts = [t for t in texts]
    if not texts:
        raise ValueError("no texts for biased LM")
    with warnings.catch_warnings():
        # tiny per-segment texts routinely hit the discount fallback
        warnings.simplefilter("ignore", DiscountFallbackWarning)
        return estimate_mkn(count_ngrams(texts, order), order)


def _fmt(x):
    # 10 decimals keep perplexities of a reloaded model equal well past 1e-6
    return f"{x:.10f}"


def write_arpa(model: NGramModel, fp=None):
    """Serialise to ARPA text.  Returns the text when ``fp`` is None."""
    buf = io.StringIO() if fp is None else fp
    by_order = defaultdict(list)
    for g, e in model.entries.items():
        by_order[len(g)].append((g, e))
    buf.write("\n\\data\\\n")
    for k in range(1, model.order + 1):
        buf.write(f"ngram {k}={len(by_order[k])}\n")
    for k in range(1, model.order + 1):
        buf.write(f"\n\\{k}-grams:\n")
        for g, (lp, bo) in sorted(by_order[k]):
            line = _fmt(lp) + "\t" + " ".join(g)
            if k < model.order and bo is not None:
                line += "\t" + _fmt(bo)
            buf.write(line + "\n")
    buf.write("\n\\end\\\n")
    if fp is None:
        return buf.getvalue()


class ArpaFormatError(ValueError):
    pass


def read_arpa(source) -> NGramModel:
    """Parse ARPA text (a string or an iterable of lines)."""
    lines = source.splitlines() if isinstance(source, str) else list(source)
    declared = {}
    entries = {}
    section = None
    seen_data = False
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        s = line.strip()
        if not s:
            continue
        if s == "\\data\\":
            seen_data = True
            section = "data"
            continue
        if s == "\\end\\":
            break
        if s.startswith("\\") and s.endswith("-grams:"):
            try:
                section = int(s[1:-len("-grams:")])
            except ValueError:
                raise ArpaFormatError(f"line {lineno}: bad section header {s!r}")
            continue
        if section == "data":
            if not s.startswith("ngram "):
                raise ArpaFormatError(f"line {lineno}: expected 'ngram k=n'")
            k, n = s[6:].split("=")
            declared[int(k)] = int(n)
            continue
        if not isinstance(section, int):
            raise ArpaFormatError(f"line {lineno}: content outside a section")
        parts = line.split("\t") if "\t" in line else s.split()
        if "\t" in line:
            words = tuple(parts[1].split())
            bo = float(parts[2]) if len(parts) > 2 and parts[2].strip() else None
        else:
            words = tuple(parts[1:1 + section])
            bo = float(parts[1 + section]) if len(parts) > 1 + section else None
        if len(words) != section:
            raise ArpaFormatError(f"line {lineno}: expected {section} words")
        entries[words] = (float(parts[0]), bo)
    if not seen_data:
        raise ArpaFormatError("missing \\data\\ header")
    order = max(declared) if declared else 0
    got = Counter(len(g) for g in entries)
    for k, n in declared.items():
        if got[k] != n:
            raise ArpaFormatError(f"{k}-grams: header says {n}, found {got[k]}")
    return NGramModel(order, entries)
