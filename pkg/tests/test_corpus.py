import json
import statistics

import pytest

from hicl.corpus import (
    CorpusError,
    Document,
    FewShotConfig,
    SamplingMode,
    VOCAB_SIZE,
    group_by_path,
    hash_token,
    load_corpus,
    sample_few_shot,
    sample_imbalanced,
    save_corpus,
    tokenize,
)
from hicl.rng import Xorshift64Star


def test_tokenize_case_folds():
    assert tokenize("Speech Recognition") == tokenize("speech recognition")
    assert len(tokenize("Speech Recognition")) == 2


def test_tokenize_repeats_and_range():
    ids = tokenize("a a a")
    assert len(ids) == 3 and len(set(ids)) == 1
    for tok in tokenize("The quick brown fox, 42 times; over-easy!"):
        assert 0 <= tok < VOCAB_SIZE


def test_tokenize_pure_and_hash_stable():
    assert tokenize("hello world") == tokenize("hello world")
    # hashing must not collapse to a few buckets
    ids = {hash_token(f"word{i}") for i in range(2000)}
    assert len(ids) > 1800


def _write_corpus(tmp_path, records):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )
    return path


def test_load_two_record_fixture(tmp_path, mini_tax):
    path = _write_corpus(
        tmp_path,
        [
            {"id": "d1", "text": "neural nets", "labels": ["CS", "Machine Learning"]},
            {"id": "d2", "text": "gene sequencing", "labels": ["Biology", "Genetics"]},
        ],
    )
    docs = load_corpus(path, mini_tax)
    assert len(docs) == 2
    for doc in docs:
        mini_tax.validate_path(doc.gold)
        assert doc.tokens


def test_load_rejects_short_path_with_line_number(tmp_path, mini_tax):
    path = _write_corpus(
        tmp_path,
        [
            {"id": "d1", "text": "ok", "labels": ["CS", "Machine Learning"]},
            {"id": "d2", "text": "bad", "labels": ["CS"]},
        ],
    )
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(path, mini_tax)


def test_load_rejects_empty_text_and_bad_json(tmp_path, mini_tax):
    path = _write_corpus(
        tmp_path, [{"id": "d1", "text": "  ", "labels": ["CS", "Databases"]}]
    )
    with pytest.raises(CorpusError, match="empty text"):
        load_corpus(path, mini_tax)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="line 1"):
        load_corpus(bad, mini_tax)


def test_save_load_round_trip(tmp_path, mini_tax):
    docs = [
        Document("d1", "neural nets", tuple(tokenize("neural nets")),
                 mini_tax.resolve_path(["CS", "Machine Learning"])),
    ]
    out = tmp_path / "c.jsonl"
    save_corpus(docs, mini_tax, out)
    back = load_corpus(out, mini_tax)
    assert [(d.id, d.text, d.gold) for d in back] == [
        (d.id, d.text, d.gold) for d in docs
    ]


def _docs(mini_tax, spec):
    """spec: dict label-name -> count; builds documents on distinct leaves."""
    docs = []
    for name, count in spec.items():
        path = mini_tax.resolve_path(name.split("/"))
        for i in range(count):
            docs.append(
                Document(f"{name}-{i}", f"text {name} {i}",
                         tuple(tokenize(f"text {name} {i}")), path)
            )
    return docs


def test_balanced_min_rule(mini_tax):
    docs = _docs(mini_tax, {"CS/Machine Learning": 5, "CS/Databases": 1})
    picked = sample_few_shot(docs, FewShotConfig(q=2, seed=0))
    by_path = group_by_path(picked)
    counts = sorted(len(g) for g in by_path.values())
    assert counts == [1, 2]
    assert len(picked) == 3


def test_balanced_small_group_taken_whole(mini_tax):
    docs = _docs(mini_tax, {"CS/Machine Learning": 1})
    picked = sample_few_shot(docs, FewShotConfig(q=16, seed=7))
    assert [d.id for d in picked] == [docs[0].id]


def test_balanced_deterministic_and_subset(mini_tax):
    docs = _docs(mini_tax, {"CS/Machine Learning": 9, "Biology/Ecology": 6})
    a = sample_few_shot(docs, FewShotConfig(q=4, seed=42))
    b = sample_few_shot(docs, FewShotConfig(q=4, seed=42))
    assert [d.id for d in a] == [d.id for d in b]
    ids = [d.id for d in a]
    assert len(set(ids)) == len(ids)
    assert set(ids) <= {d.id for d in docs}


def test_balanced_exact_counts_randomized(mini_tax):
    rng = Xorshift64Star(99)
    leaves = ["CS/Machine Learning", "CS/Databases", "Biology/Genetics",
              "Biology/Ecology"]
    for trial in range(25):
        spec = {name: rng.randint(1, 12) for name in leaves}
        q = rng.randint(1, 8)
        docs = _docs(mini_tax, spec)
        picked = sample_few_shot(docs, FewShotConfig(q=q, seed=trial))
        got = {k: len(v) for k, v in group_by_path(picked).items()}
        for name, count in spec.items():
            key = mini_tax.resolve_path(name.split("/")).node_ids
            assert got.get(key, 0) == min(count, q)


def test_imbalanced_range_and_zero(mini_tax):
    docs = _docs(mini_tax, {"CS/Machine Learning": 5})
    for seed in range(30):
        picked = sample_imbalanced(
            docs, FewShotConfig(q=2, seed=seed, mode=SamplingMode.IMBALANCED)
        )
        assert len(picked) in (0, 1, 2)
    assert (
        sample_imbalanced(docs, FewShotConfig(q=0, seed=1, mode=SamplingMode.IMBALANCED))
        == []
    )


def test_imbalanced_mean_matches_uniform_draw(mini_tax):
    docs = _docs(mini_tax, {"CS/Machine Learning": 7})
    q = 4  # per-path size uniform on {0..4}: mean 2, var 2
    sizes = [
        len(sample_imbalanced(docs, FewShotConfig(q=q, seed=s, mode=SamplingMode.IMBALANCED)))
        for s in range(400)
    ]
    mean = statistics.fmean(sizes)
    sigma = (2.0 / len(sizes)) ** 0.5
    assert abs(mean - q / 2) < 3 * sigma


def test_mode_mismatch_rejected(mini_tax):
    docs = _docs(mini_tax, {"CS/Databases": 2})
    with pytest.raises(ValueError):
        sample_few_shot(docs, FewShotConfig(q=1, seed=0, mode=SamplingMode.IMBALANCED))
    with pytest.raises(ValueError):
        sample_imbalanced(docs, FewShotConfig(q=1, seed=0))


def test_empty_corpus_rejected():
    with pytest.raises(CorpusError):
        sample_few_shot([], FewShotConfig(q=1, seed=0))
    with pytest.raises(CorpusError):
        sample_imbalanced([], FewShotConfig(q=1, seed=0, mode=SamplingMode.IMBALANCED))
