"""Smoothed n-gram models and the cross-domain loss matrix."""

import json
import math

import pytest

from corpusmith.corpus import Document
from corpusmith.errors import DataError
from corpusmith.lmproxy import (
    BOS,
    UNK,
    NgramLM,
    cross_domain_matrix,
    eval_loss,
    split_holdout,
    train_ngram,
    write_loss_json,
    write_loss_tsv,
)


def doc(text, did="d0", domain="test"):
    return Document(id=did, domain=domain, text=text)


def docs(texts, domain="test"):
    return [doc(t, did=f"{domain}-{i}", domain=domain) for i, t in enumerate(texts)]


# --- probabilities ---


def test_unigram_counts_and_smoothing():
    lm = train_ngram([doc("a a b")], order=1, alpha=0.1)
    # counts: a=2, b=1, total=3, vocab=2 -> denominator 3 + 0.1*3
    assert lm.prob((), "a") == pytest.approx((2 + 0.1) / (3 + 0.1 * 3), rel=1e-12)
    assert lm.prob((), "b") == pytest.approx((1 + 0.1) / (3 + 0.1 * 3), rel=1e-12)
    assert lm.prob((), "zzz") == pytest.approx(0.1 / (3 + 0.1 * 3), rel=1e-12)


def test_conditionals_sum_to_one():
    lm = train_ngram(docs(["a b a c", "b b a"]), order=2, alpha=0.1)
    for context in [(BOS,), ("a",), ("b",), ("never-seen",)]:
        total = math.fsum(lm.prob(context, t) for t in sorted(lm.vocab) + [UNK])
        assert total == pytest.approx(1.0, abs=1e-9)


def test_large_alpha_approaches_uniform():
    lm = train_ngram([doc("a a a a b")], order=1, alpha=1e9)
    uniform = 1.0 / (len(lm.vocab) + 1)
    assert lm.prob((), "a") == pytest.approx(uniform, rel=1e-6)
    assert lm.prob((), "b") == pytest.approx(uniform, rel=1e-6)


def test_bos_padding_gives_one_event_per_token():
    lm = train_ngram([doc("x y")], order=3)
    assert lm.counts[(BOS, BOS)] == {"x": 1}
    assert lm.counts[(BOS, "x")] == {"y": 1}
    # No end-of-document event: exactly as many events as tokens.
    assert sum(lm.context_totals.values()) == 2


def test_context_length_is_checked():
    lm = train_ngram([doc("a b")], order=2)
    with pytest.raises(DataError):
        lm.prob((), "a")
    with pytest.raises(DataError):
        lm.prob(("a", "b"), "a")


def test_analysis_tokenization_feeds_the_model():
    # Case folded, edge punctuation stripped, pure numbers dropped.
    lm = train_ngram([doc("The CAT, 42 sat.")], order=1)
    assert lm.vocab == frozenset({"the", "cat", "sat"})


def test_retrain_is_identical():
    corpus = docs(["a b c a", "c b a", "b b"])
    a = train_ngram(corpus, order=2, alpha=0.5)
    b = train_ngram(corpus, order=2, alpha=0.5)
    assert a == b


def test_train_argument_validation():
    with pytest.raises(DataError):
        train_ngram([], order=2)
    with pytest.raises(DataError):
        train_ngram([doc("a")], order=0)
    with pytest.raises(DataError):
        train_ngram([doc("a")], alpha=0.0)


# --- loss ---


def test_uniform_model_loss_is_exact():
    # Empty counts with alpha 1 make every conditional exactly
    # 1/(|vocab|+1); on 3 vocab terms each probability is 1/4 and the
    # mean of four identical -log(1/4) terms is log(4) with no rounding.
    lm = NgramLM(order=2, alpha=1.0, domain="flat", vocab=frozenset({"a", "b", "c"}))
    heldout = [doc("a b c a")]
    assert eval_loss(lm, heldout) == math.log(4.0)


def test_loss_prefers_matching_text():
    train = docs(["stars orbit quietly tonight"] * 8, domain="m")
    lm = train_ngram(train, order=2, alpha=0.1)
    near = eval_loss(lm, [doc("stars orbit quietly tonight")])
    far = eval_loss(lm, [doc("simmer the broth gently now")])
    assert near < far


def test_loss_rejects_empty_heldout():
    lm = train_ngram([doc("a b")], order=1)
    with pytest.raises(DataError):
        eval_loss(lm, [doc("42 17")])


# --- holdout splitting ---


def test_split_holdout_disjoint_and_complete():
    corpus = docs([f"text number {i} here" for i in range(10)])
    train, heldout = split_holdout(corpus, 0.2, seed=5)
    assert len(heldout) == 2
    assert len(train) == 8
    train_ids = {d.id for d in train}
    held_ids = {d.id for d in heldout}
    assert not train_ids & held_ids
    assert train_ids | held_ids == {d.id for d in corpus}


def test_split_holdout_seeded_and_clamped():
    corpus = docs([f"text {i}" for i in range(10)])
    a = split_holdout(corpus, 0.2, seed=5)
    b = split_holdout(corpus, 0.2, seed=5)
    assert [d.id for d in a[1]] == [d.id for d in b[1]]
    # Different seeds should pick different pairs often enough that at
    # least one of a handful differs.
    picks = {tuple(d.id for d in split_holdout(corpus, 0.2, seed=s)[1]) for s in range(8)}
    assert len(picks) > 1
    # Tiny fractions still hold out one document; huge ones leave one for training.
    assert len(split_holdout(corpus, 0.01, seed=1)[1]) == 1
    assert len(split_holdout(corpus, 0.99, seed=1)[0]) == 1


def test_split_holdout_argument_validation():
    corpus = docs(["a", "b"])
    with pytest.raises(DataError):
        split_holdout(corpus, 0.0, seed=1)
    with pytest.raises(DataError):
        split_holdout(corpus, 1.0, seed=1)
    with pytest.raises(DataError):
        split_holdout(corpus[:1], 0.5, seed=1)


# --- cross-domain matrix ---


def three_disjoint_domains():
    def bank(prefix):
        words = [f"{prefix}{i}" for i in range(12)]
        texts = []
        for d in range(10):
            parts = [
                " ".join(words[(d + s + j) % 12] for j in range(4)) for s in range(3)
            ]
            texts.append(". ".join(parts) + ".")
        return texts

    return {
        name: docs(bank(name[0]), domain=name) for name in ["alpha", "beta", "gamma"]
    }


def test_matrix_diagonal_dominates_disjoint_vocabularies():
    corpora = three_disjoint_domains()
    matrix = cross_domain_matrix(corpora, order=2, alpha=0.1, seed=3)
    for i, row_name in enumerate(matrix.domains):
        row = matrix.loss[i]
        assert row[i] == min(row), f"{row_name}: {row}"
        for j in range(len(row)):
            if j != i:
                assert row[i] < row[j] - 0.5


def test_matrix_identical_corpora_rows_match():
    texts = [f"shared phrasing number {i} appears here" for i in range(10)]
    corpora = {"one": docs(texts, domain="one"), "two": docs(texts, domain="two")}
    matrix = cross_domain_matrix(corpora, order=2, seed=9)
    # Same documents, same per-domain seed derivation inputs differ only
    # by name, so losses must be symmetric across the two domains.
    assert matrix.loss[0][0] == pytest.approx(matrix.loss[1][1], rel=1e-9)
    assert matrix.loss[0][1] == pytest.approx(matrix.loss[1][0], rel=1e-9)


def test_matrix_is_asymmetric_for_nested_domains():
    # beta's text reuses alpha's words plus its own; the two directions
    # of transfer differ.
    alpha = docs(["core words repeat here often"] * 10, domain="alpha")
    beta = docs(["core words repeat here often plus extra novel material"] * 10, domain="beta")
    matrix = cross_domain_matrix({"alpha": alpha, "beta": beta}, order=2, seed=1)
    assert matrix.loss[0][1] != pytest.approx(matrix.loss[1][0], abs=1e-6)


def test_matrix_split_stability_when_adding_domains():
    corpora = three_disjoint_domains()
    two = cross_domain_matrix(
        {k: corpora[k] for k in ["alpha", "beta"]}, order=2, seed=3
    )
    three = cross_domain_matrix(corpora, order=2, seed=3)
    # Per-domain seeding means alpha/beta losses are unchanged by gamma.
    assert two.loss[0][0] == three.loss[0][0]
    assert two.loss[0][1] == three.loss[0][1]
    assert two.loss[1][0] == three.loss[1][0]


def test_matrix_needs_two_domains():
    with pytest.raises(DataError):
        cross_domain_matrix({"solo": docs(["a b", "c d"])})


# --- writers ---


def test_loss_writers(tmp_path):
    corpora = three_disjoint_domains()
    matrix = cross_domain_matrix(corpora, order=2, seed=3)
    tsv = tmp_path / "loss.tsv"
    write_loss_tsv(tsv, matrix)
    lines = tsv.read_text().splitlines()
    assert lines[0] == "model\talpha\tbeta\tgamma"
    assert len(lines) == 4
    first = lines[1].split("\t")
    assert first[0] == "alpha"
    assert first[1] == f"{matrix.loss[0][0]:.4f}"

    jpath = tmp_path / "loss.json"
    write_loss_json(jpath, matrix)
    payload = json.loads(jpath.read_text())
    assert payload["domains"] == ["alpha", "beta", "gamma"]
    assert payload["loss"]["alpha"]["beta"] == matrix.loss[0][1]
    assert payload["holdout_docs"]["gamma"] == matrix.holdout_docs["gamma"]
