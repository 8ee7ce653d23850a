"""Command-line front end.

Exit status: 0 on success, 1 on processing errors, 2 on usage errors.
"""
import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import ngram_lm
from .corpusio import (SEGMENTS_HEADER, TEXT_HEADER, BundleError, find_bundles, make_dev_split,
                       parse_program_bundle, write_corpus)
from .decoder import ErrorConfig, SimulatedDecoder, read_track
from .extract import PipelineConfig, Segment, run_pipeline
from .metrics import edit_distance, genre_stats
from .simulate import SimConfig, write_simulated_corpus
from .textnorm import tokens_from_text, tokens_to_text


class UsageError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _pipeline_config(args, cfg):
    fields = {f.name for f in dataclasses.fields(PipelineConfig)} - {"sw_params", "decoder_error_cfg"}
    kw = {k: v for k, v in cfg.get("pipeline", {}).items() if k in fields}
    unknown = set(cfg.get("pipeline", {})) - fields
    if unknown:
        raise UsageError(f"unknown pipeline keys: {sorted(unknown)}")
    if args.max_repetitions is not None:
        kw["max_repetitions"] = args.max_repetitions
    if args.min_words is not None:
        kw["min_words_step2"] = args.min_words
    if args.min_seconds is not None:
        kw["min_final_ms"] = int(round(args.min_seconds * 1000))
    dec = cfg.get("decoder", {})
    err = ErrorConfig(**{**dec, "seed": args.seed if args.seed is not None else dec.get("seed", 0)})
    try:
        return PipelineConfig(decoder_error_cfg=err, **kw)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None


def _load_programs(root):
    return [parse_program_bundle(d) for d in find_bundles(root)]


def _run_one(job):
    program, cfg = job
    track = read_track(program.audio_path())
    dec = SimulatedDecoder({program.program_id: track}, cfg.decoder_error_cfg,
                           {program.program_id: program.audio.duration_ms})
    try:
        segs, stats = run_pipeline(program, dec, cfg)
    except Exception as e:  # an error record, never a partial corpus entry
        return program.program_id, [], f"{type(e).__name__}: {e}"
    return program.program_id, segs, None


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def _read_segments(d):
    d = Path(d)
    text = {}
    with open(d / "text.tsv", encoding="utf-8") as f:
        next(f, None)
        for line in f:
            sid, _, t = line.rstrip("\n").partition("\t")
            text[sid] = tuple(tokens_from_text(t))
    segs = []
    with open(d / "segments.tsv", encoding="utf-8") as f:
        next(f, None)
        for line in f:
            sid, pid, s, e = line.rstrip("\n").split("\t")
            segs.append(Segment(sid, pid, int(s), int(e), text.get(sid, ()), (3, 0)))
    return segs


def cmd_extract(args, cfg):
    programs = _load_programs(args.bundles)
    pcfg = _pipeline_config(args, cfg)
    jobs = [(p, pcfg) for p in programs]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    segs, errors = [], []
    for pid, s, err in results:
        if err is not None:
            errors.append(f"{pid}\t{err}")
        segs.extend(s)
    _write_lines(out / "segments.tsv", [SEGMENTS_HEADER] + [
        f"{s.segment_id}\t{s.program_id}\t{s.start_ms}\t{s.end_ms}" for s in segs])
    _write_lines(out / "text.tsv", [TEXT_HEADER] + [f"{s.segment_id}\t{tokens_to_text(s.tokens)}" for s in segs])
    ok = {p.program_id for p in programs} - {e.split("\t")[0] for e in errors}
    stats = genre_stats([p for p in programs if p.program_id in ok], segs)
    (out / "stats.tsv").write_text(stats.to_tsv(), encoding="utf-8")
    if errors:
        _write_lines(out / "errors.tsv", errors)
        for e in errors:
            print(f"error\t{e}", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args, cfg):
    kw = dict(cfg.get("simulate", {}))
    for k in ("n_programs", "duration_ms", "unsubtitled_frac"):
        v = getattr(args, k)
        if v is not None:
            kw[k] = v
    if args.seed is not None:
        kw["seed"] = args.seed
    for k in ("commercial_ms", "sentence_words", "word_ms", "pause_ms", "cue_lag_ms"):
        if k in kw:
            kw[k] = tuple(kw[k])
    try:
        sc = SimConfig(**kw)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    for d in write_simulated_corpus(sc, args.out):
        print(d)
    return 0


def cmd_stats(args, cfg):
    st = genre_stats(_load_programs(args.bundles), _read_segments(args.extracted))
    sys.stdout.write(st.to_tsv())
    return 0


def cmd_package(args, cfg):
    programs = _load_programs(args.bundles)
    segs = _read_segments(args.extracted)
    seed = args.seed if args.seed is not None else 0
    split = make_dev_split(segs, seed, {p.program_id: p.genre_tags[0] for p in programs}, args.dev_per_genre)
    for name, path in sorted(write_corpus(segs, split, args.out).items()):
        print(f"{name}\t{path}")
    (Path(args.out) / "stats.tsv").write_text(genre_stats(programs, segs).to_tsv(), encoding="utf-8")
    return 0


def _read_sentences(path):
    with open(path, encoding="utf-8") as f:
        return [line.split() for line in f if line.strip()]


def _load_arpa(path):
    with open(path, encoding="utf-8") as f:
        return ngram_lm.read_arpa(f.read())


def _save_arpa(model, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        ngram_lm.write_arpa(model, f)


def cmd_lm(args, cfg):
    if args.lm_cmd == "train":
        model = ngram_lm.estimate_mkn(ngram_lm.count_ngrams(_read_sentences(args.text), args.order), args.order)
        _save_arpa(model, args.out)
    elif args.lm_cmd == "prune":
        _save_arpa(ngram_lm.prune(_load_arpa(args.arpa), args.threshold), args.out)
    elif args.lm_cmd == "interp":
        res = ngram_lm.interpolate_em(_load_arpa(args.arpa1), _load_arpa(args.arpa2),
                                      _read_sentences(args.heldout), tol=args.tol, max_iter=args.max_iter)
        print(f"lambda\t{res.weight:.6f}")
        print("trace\t" + " ".join(f"{x:.6f}" for x in res.heldout_ll_trace))
    else:
        print(f"{ngram_lm.perplexity(_load_arpa(args.arpa), _read_sentences(args.text)):.6f}")
    return 0


def _read_utts(path):
    out = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                uid, _, text = line.rstrip("\n").partition("\t")
                out[uid] = text
    return out


def cmd_score(args, cfg):
    ref, hyp = _read_utts(args.ref), _read_utts(args.hyp)
    missing = sorted(set(ref) - set(hyp))
    if missing:
        raise ValueError(f"hypothesis lacks {len(missing)} utterances, e.g. {missing[0]}")
    errs = sum(edit_distance(ref[u], hyp[u]) for u in ref)
    chars = sum(len("".join(ref[u].split())) for u in ref)
    if chars == 0:
        raise ValueError("references contain no characters")
    print(f"CER\t{100.0 * errs / chars:.2f}\t{errs}/{chars}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="subcorpus", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON config with 'pipeline', 'decoder', 'simulate' sections")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--max-repetitions", type=int)
    ap.add_argument("--min-words", type=int)
    ap.add_argument("--min-seconds", type=float)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("extract", help="run the pipeline over program bundles (simulated decoder)")
    p.add_argument("bundles")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("simulate", help="write synthetic program bundles with ground-truth tracks")
    p.add_argument("out")
    p.add_argument("--programs", dest="n_programs", type=int)
    p.add_argument("--duration-ms", type=int)
    p.add_argument("--unsubtitled-frac", type=float)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("stats", help="per-genre extraction statistics as TSV")
    p.add_argument("bundles")
    p.add_argument("extracted")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("package", help="dev split and shuffled manifests")
    p.add_argument("bundles")
    p.add_argument("extracted")
    p.add_argument("--out", required=True)
    p.add_argument("--dev-per-genre", type=int, default=1000)
    p.set_defaults(fn=cmd_package)

    p = sub.add_parser("lm", help="n-gram LM tools (ARPA in/out)")
    lm = p.add_subparsers(dest="lm_cmd", required=True)
    q = lm.add_parser("train")
    q.add_argument("text")
    q.add_argument("--order", type=int, default=3)
    q.add_argument("--out", required=True)
    q = lm.add_parser("prune")
    q.add_argument("arpa")
    q.add_argument("--threshold", type=float, default=1e-8)
    q.add_argument("--out", required=True)
    q = lm.add_parser("interp")
    q.add_argument("arpa1")
    q.add_argument("arpa2")
    q.add_argument("--heldout", required=True)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--max-iter", type=int, default=100)
    q = lm.add_parser("ppl")
    q.add_argument("arpa")
    q.add_argument("text")
    p.set_defaults(fn=cmd_lm)

    p = sub.add_parser("score", help="error rates")
    sc = p.add_subparsers(dest="score_cmd", required=True)
    q = sc.add_parser("cer")
    q.add_argument("ref", help="utt_id<TAB>text per line")
    q.add_argument("hyp")
    p.set_defaults(fn=cmd_score)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.fn(args, _load_config(args.config))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (BundleError, ngram_lm.ArpaFormatError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
