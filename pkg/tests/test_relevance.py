import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floodsense.relevance import (CLASSES, ConfusionMatrix, Label, LabeledExample, NBModel,
                                  cross_validate, evaluate_split, predict, read_training_file,
                                  tokenize, train, vectorize)

IMM, OTH = Label.IMMEDIATE, Label.OTHER


def ex(text, lab):
    return LabeledExample(text, lab)


def test_vectorize_examples():
    assert vectorize("flooded outside") == Counter({"flooded": 1, "outside": 1, "flooded outside": 1})
    assert vectorize("") == Counter()
    v = vectorize("It is flooded")
    assert sum(v.values()) == 5
    assert sum(1 for f in v if " " in f) == 2


def test_tokenize_rules():
    assert tokenize("Road FLOODED!! see http://t.co/x @bob #flood") == [
        "road", "flooded", "see", "<url>", "<mention>", "flood"]
    assert tokenize("  ...  ") == []


def test_two_example_corpus():
    m = train([ex("a", IMM), ex("b", OTH)], 0.5)
    assert np.allclose(np.exp(m.class_priors), [0.5, 0.5])
    p_a_imm = math.exp(m.feature_log_likelihoods[CLASSES.index(IMM), m.vocabulary["a"]])
    assert p_a_imm == pytest.approx(0.75, abs=1e-12)
    assert predict(m, "a")[0] is IMM
    lab, margin = predict(m, "")
    assert lab is OTH and margin == 0.0  # equal priors tie to Other
    assert predict(m, "a a a")[0] is IMM
    assert predict(m, "a a a")[1] > predict(m, "a")[1]


def test_large_smoothing_is_uniform():
    m = train([ex("a a a c", IMM), ex("b", OTH)], 1e9)
    V = len(m.vocabulary)
    assert np.allclose(np.exp(m.feature_log_likelihoods), 1.0 / V, rtol=1e-6)


def test_single_class_rejected():
    with pytest.raises(ValueError):
        train([ex("a", IMM), ex("b", IMM)])
    with pytest.raises(ValueError):
        train([ex("a", IMM), ex("b", OTH)], alpha_smooth=0)
    with pytest.raises(ValueError):
        LabeledExample("", IMM)


def test_margin_matches_joint_log_likelihood():
    m = train([ex("river burst its banks", IMM), ex("lovely sunny day", OTH),
               ex("street flooded now", IMM), ex("flooded with joy", OTH)])
    for t in ["street flooded", "sunny river", "unseen words only", "flooded flooded now"]:
        jll = m.joint_log_likelihood(t)
        assert m.margin(t) == pytest.approx(jll[1] - jll[0], abs=1e-12)


words = st.sampled_from(["rain", "flood", "river", "street", "tea", "match", "water", "now"])
texts = st.lists(words, min_size=1, max_size=6).map(" ".join)
corpora = st.lists(st.tuples(texts, st.sampled_from([IMM, OTH])), min_size=2, max_size=20).filter(
    lambda c: {l for _, l in c} == {IMM, OTH}).map(lambda c: [ex(t, l) for t, l in c])


@given(corpora)
def test_normalization_invariants(corpus):
    m = train(corpus)
    assert math.fsum(np.exp(m.class_priors)) == pytest.approx(1.0, abs=1e-9)
    for row in m.feature_log_likelihoods:
        assert math.fsum(np.exp(row)) == pytest.approx(1.0, abs=1e-9)


@given(corpora, texts)
def test_duplication_invariance_exact(corpus, probe):
    # duplicating the corpus while doubling the smoothing mass leaves every ratio fixed
    m1, m2 = train(corpus, 0.5), train(corpus * 2, 1.0)
    assert np.allclose(m1.feature_log_likelihoods, m2.feature_log_likelihoods, atol=1e-12)
    assert predict(m1, probe)[1] == pytest.approx(predict(m2, probe)[1], abs=1e-9)


def test_duplication_invariance_large_counts():
    # at fixed smoothing the labels agree once counts dominate the pseudo-counts
    corpus = separable(200)
    m1, m2 = train(corpus), train(corpus * 3)
    for e in corpus[:50] + [ex("flooded coffee music", IMM), ex("rising burst", IMM)]:
        assert predict(m1, e.text)[0] is predict(m2, e.text)[0]


@given(corpora, st.lists(words, min_size=1, max_size=5))
def test_single_token_order_invariance(corpus, toks):
    m = train(corpus)
    # with bigrams absent from the vocabulary, the margin depends only on the token bag
    import random
    shuffled = toks[:]
    random.Random(0).shuffle(shuffled)
    uni = lambda ts: sum(m._delta.get(t, 0.0) for t in ts)
    assert uni(toks) == pytest.approx(uni(shuffled), abs=1e-9)
    for t in toks:
        assert predict(m, t) == predict(m, t)


def separable(n=120):
    rng = np.random.default_rng(3)
    imm = ["flooded", "submerged", "underwater", "burst", "rising"]
    oth = ["football", "coffee", "music", "holiday", "shopping"]
    out = []
    for k in range(n):
        vocab, lab = (imm, IMM) if k % 2 else (oth, OTH)
        out.append(ex(" ".join(rng.choice(vocab, size=4)), lab))
    return out


def test_separable_split_and_cv():
    corpus = separable()
    assert evaluate_split(corpus, 0.75, seed=1) == 1.0
    cm = cross_validate(corpus, k=6, seed=2)
    assert cm.fp == 0 and cm.fn == 0 and cm.total == len(corpus)


def test_random_labels_give_majority_rate():
    # uninformative vocabulary, 60/40 labels: accuracy should be close to the majority prior
    rng = np.random.default_rng(11)
    vocab = [f"w{k}" for k in range(6)]
    accs = []
    for seed in range(10):
        corpus = [ex(" ".join(rng.choice(vocab, size=3)), IMM if rng.random() < 0.6 else OTH)
                  for _ in range(2000)]
        accs.append(evaluate_split(corpus, 0.75, seed=seed))
    assert abs(float(np.mean(accs)) - 0.6) <= 0.05


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 1000))
def test_cv_total(k, seed):
    corpus = separable(48)
    assert cross_validate(corpus, k=k, seed=seed).total == 48


def test_cv_errors():
    with pytest.raises(ValueError):
        cross_validate(separable(10), k=1)
    with pytest.raises(ValueError):
        cross_validate(separable(4), k=6)
    with pytest.raises(ValueError):
        evaluate_split(separable(10), 1.0)


def test_balanced_errors_on_noisy_corpus():
    from floodsense.synthetic import training_corpus
    corpus = training_corpus(1200, seed=5, noise=0.15)
    cm = cross_validate(corpus, k=6, seed=0)
    assert abs(cm.fp - cm.fn) <= 0.05 * cm.total


def test_published_confusion_matrix_arithmetic():
    cm = ConfusionMatrix(tn=1759, fp=359, fn=337, tp=1360)
    assert cm.total == 3815
    assert cm.precision == pytest.approx(0.791, abs=5e-4)
    assert abs(cm.fp - cm.fn) / max(cm.fp, cm.fn) < 0.07


def test_fraction_oracle_small():
    corpus = [ex("it is flooded", IMM), ex("flooded with offers", OTH), ex("water in street", IMM)]
    m = train(corpus)
    # exact oracle for one probe
    cnt = {IMM: Counter(), OTH: Counter()}
    for e in corpus:
        cnt[e.label].update(vectorize(e.text))
    V = set(cnt[IMM]) | set(cnt[OTH])
    a = Fraction(1, 2)
    probe = vectorize("flooded street now")
    logp = {}
    for lab in (IMM, OTH):
        tot = sum(cnt[lab].values())
        s = math.log(sum(e.label is lab for e in corpus) / len(corpus))
        for f, c in probe.items():
            if f in V:
                s += c * math.log((cnt[lab][f] + a) / (tot + a * len(V)))
        logp[lab] = s
    assert predict(m, "flooded street now")[1] == pytest.approx(logp[IMM] - logp[OTH], abs=1e-9)


def test_save_load_roundtrip(tmp_path):
    m = train(separable(40))
    p = tmp_path / "m.json"
    m.save(p)
    m2 = NBModel.load(p)
    assert m2.vocabulary == m.vocabulary
    assert np.array_equal(m2.class_priors, m.class_priors)
    assert np.array_equal(m2.feature_log_likelihoods, m.feature_log_likelihoods)
    for t in ["flooded coffee", "nothing known", "burst burst"]:
        assert predict(m2, t) == predict(m, t)
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        NBModel.load(tmp_path / "bad.json")


def test_read_training_file(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("# comment\nImmediate\tstreet flooded\n\nother\tnice day\n")
    got = read_training_file(p)
    assert got == [ex("street flooded", IMM), ex("nice day", OTH)]
    p.write_text("Immediate street flooded\n")
    with pytest.raises(ValueError, match=":1:"):
        read_training_file(p)
