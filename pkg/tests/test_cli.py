import json

import pytest

from subcorpus.cli import main


@pytest.fixture(scope="module")
def bundles(tmp_path_factory):
    d = tmp_path_factory.mktemp("bundles")
    assert main(["--seed", "3", "simulate", str(d), "--programs", "3", "--duration-ms", "180000"]) == 0
    return d


def read_tsv(path):
    return [line.split("\t") for line in path.read_text(encoding="utf-8").splitlines()]


def test_usage_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["--jobs", "0", "stats", "a", "b"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pipeline": {"no_such_key": 1}}))
    assert main(["--config", str(cfg), "extract", str(tmp_path), "--out", str(tmp_path / "o")]) == 2
    assert main(["--config", str(tmp_path / "missing.json"), "stats", "a", "b"]) == 2


def test_processing_error(tmp_path):
    bad = tmp_path / "prog"
    bad.mkdir()
    (bad / "meta.tsv").write_text("title\tt\n", encoding="utf-8")
    assert main(["extract", str(tmp_path), "--out", str(tmp_path / "o")]) == 1


def test_extract_stats_package(bundles, tmp_path, capsys):
    out = tmp_path / "ext"
    assert main(["--seed", "1", "--jobs", "2", "extract", str(bundles), "--out", str(out)]) == 0
    total = read_tsv(out / "stats.tsv")[-1]
    assert total[0] == "total" and float(total[-1]) >= 99.0
    segs = read_tsv(out / "segments.tsv")
    assert segs[0] == ["segment_id", "program_id", "start_ms", "end_ms"] and len(segs) > 3
    capsys.readouterr()
    assert main(["stats", str(bundles), str(out)]) == 0
    assert capsys.readouterr().out.splitlines()[-1].split("\t")[0] == "total"
    assert main(["--seed", "2", "package", str(bundles), str(out), "--out", str(tmp_path / "pkg"),
                 "--dev-per-genre", "2"]) == 0
    dev = read_tsv(tmp_path / "pkg" / "dev" / "segments.tsv")
    train = read_tsv(tmp_path / "pkg" / "train" / "segments.tsv")
    assert len(dev) - 1 == 6 and len(dev) + len(train) == len(segs) + 1


def test_lm_commands(tmp_path, capsys):
    text = tmp_path / "t.txt"
    text.write_text("a b c\na b\nb c a\nc c b a\n", encoding="utf-8")
    arpa = tmp_path / "m.arpa"
    assert main(["lm", "train", str(text), "--order", "2", "--out", str(arpa)]) == 0
    capsys.readouterr()
    assert main(["lm", "ppl", str(arpa), str(text)]) == 0
    ppl = float(capsys.readouterr().out)
    pruned = tmp_path / "p.arpa"
    assert main(["lm", "prune", str(arpa), "--threshold", "1e-8", "--out", str(pruned)]) == 0
    assert main(["lm", "ppl", str(pruned), str(text)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(ppl, abs=1e-6)
    assert main(["lm", "interp", str(arpa), str(pruned), "--heldout", str(text)]) == 0
    lam = capsys.readouterr().out.splitlines()[0].split("\t")
    assert lam[0] == "lambda" and 0.0 <= float(lam[1]) <= 1.0
    (tmp_path / "bad.arpa").write_text("nonsense\n", encoding="utf-8")
    assert main(["lm", "ppl", str(tmp_path / "bad.arpa"), str(text)]) == 1


def test_score_cer(tmp_path, capsys):
    ref, hyp = tmp_path / "ref", tmp_path / "hyp"
    ref.write_text("u1\tabc\nu2\tde f\n", encoding="utf-8")
    hyp.write_text("u1\taxc\nu2\tdef\n", encoding="utf-8")
    assert main(["score", "cer", str(ref), str(hyp)]) == 0
    assert capsys.readouterr().out.strip() == "CER\t16.67\t1/6"
    hyp.write_text("u1\tabc\n", encoding="utf-8")
    assert main(["score", "cer", str(ref), str(hyp)]) == 1
