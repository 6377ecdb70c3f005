"""Multinomial naive Bayes relevance classifier over unigram + bigram counts."""
from __future__ import annotations

import enum
import json
import math
import string
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np


class Label(enum.Enum):
    OTHER = "Other"
    IMMEDIATE = "Immediate"

    @classmethod
    def parse(cls, s: str) -> "Label":
        s = s.strip().lower()
        for lab in cls:
            if lab.value.lower() == s:
                return lab
        raise ValueError(f"unknown label {s!r}")


# Class order used for all per-class arrays.
CLASSES = (Label.OTHER, Label.IMMEDIATE)

_PUNCT = string.punctuation + "‘’“”…–—«»¡¿•"
MODEL_FORMAT = "floodsense-nb"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: Label

    def __post_init__(self):
        if not self.text:
            raise ValueError("example text must be nonempty")


def tokenize(text: str) -> List[str]:
    out = []
    for tok in text.lower().split():
        if tok.startswith(("http://", "https://", "www.")):
            out.append("<url>")
        elif tok.startswith("@") and len(tok) > 1:
            out.append("<mention>")
        else:
            tok = tok.strip(_PUNCT)
            if tok:
                out.append(tok)
    return out


def features(tokens: Sequence[str]) -> List[str]:
    # bigrams are space-joined; tokens never contain whitespace
    return list(tokens) + [a + " " + b for a, b in zip(tokens, tokens[1:])]


def vectorize(text: str) -> Counter:
    """Unigram and bigram feature counts of ``text``."""
    return Counter(features(tokenize(text)))


@dataclass
class NBModel:
    vocabulary: Dict[str, int]
    class_priors: np.ndarray  # log P(class), shape (2,)
    feature_log_likelihoods: np.ndarray  # log P(f | class), shape (2, |V|)
    alpha_smooth: float = 0.5

    def __post_init__(self):
        if self.alpha_smooth <= 0:
            raise ValueError("alpha_smooth must be positive")
        # per-feature log-likelihood ratio Immediate vs Other, for fast scoring
        delta = self.feature_log_likelihoods[1] - self.feature_log_likelihoods[0]
        self._delta = dict(zip(self.vocabulary, delta.tolist()))
        self._prior_margin = float(self.class_priors[1] - self.class_priors[0])

    def joint_log_likelihood(self, text: str) -> np.ndarray:
        """log P(class) + sum_f count(f) log P(f|class), out-of-vocabulary features skipped."""
        jll = self.class_priors.astype(float).copy()
        for f, c in vectorize(text).items():
            i = self.vocabulary.get(f)
            if i is not None:
                jll += c * self.feature_log_likelihoods[:, i]
        return jll

    def margin(self, text: str) -> float:
        m = self._prior_margin
        d = self._delta
        toks = tokenize(text)
        for t in toks:
            v = d.get(t)
            if v is not None:
                m += v
        for a, b in zip(toks, toks[1:]):
            v = d.get(a + " " + b)
            if v is not None:
                m += v
        return m

    def is_relevant(self, text: str) -> bool:
        return self.margin(text) > 0.0

    def save(self, path) -> None:
        vocab = sorted(self.vocabulary, key=self.vocabulary.get)
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "classes": [c.value for c in CLASSES],
            "alpha_smooth": self.alpha_smooth,
            "class_priors": self.class_priors.tolist(),
            "vocabulary": vocab,
            "feature_log_likelihoods": self.feature_log_likelihoods.tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path) -> "NBModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a {MODEL_FORMAT} model file")
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
        return cls(
            vocabulary={f: i for i, f in enumerate(doc["vocabulary"])},
            class_priors=np.array(doc["class_priors"], dtype=float),
            feature_log_likelihoods=np.array(doc["feature_log_likelihoods"], dtype=float).reshape(
                len(CLASSES), len(doc["vocabulary"])
            ),
            alpha_smooth=doc["alpha_smooth"],
        )


def train(examples: Sequence[LabeledExample], alpha_smooth: float = 0.5) -> NBModel:
    if alpha_smooth <= 0:
        raise ValueError("alpha_smooth must be positive")
    n_class = Counter(ex.label for ex in examples)
    if any(n_class[c] == 0 for c in CLASSES):
        raise ValueError("training data must contain both Immediate and Other examples")

    counts = [Counter(), Counter()]
    vocabulary: Dict[str, int] = {}
    for ex in examples:
        fc = vectorize(ex.text)
        counts[CLASSES.index(ex.label)].update(fc)
        for f in fc:
            if f not in vocabulary:
                vocabulary[f] = len(vocabulary)

    V = len(vocabulary)
    n = len(examples)
    priors = np.log(np.array([n_class[c] / n for c in CLASSES]))
    ll = np.empty((len(CLASSES), V))
    for k, cnt in enumerate(counts):
        total = sum(cnt.values())
        num = np.full(V, alpha_smooth)
        for f, c in cnt.items():
            num[vocabulary[f]] += c
        ll[k] = np.log(num) - math.log(total + alpha_smooth * V)
    return NBModel(vocabulary, priors, ll, alpha_smooth)


def predict(model: NBModel, text: str) -> Tuple[Label, float]:
    """Return the label and log P(Immediate, x) - log P(Other, x); ties go to Other."""
    m = model.margin(text)
    return (Label.IMMEDIATE if m > 0.0 else Label.OTHER), m


@dataclass
class ConfusionMatrix:
    tn: int = 0
    fp: int = 0
    fn: int = 0
    tp: int = 0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tn + other.tn, self.fp + other.fp,
                               self.fn + other.fn, self.tp + other.tp)

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def add(self, truth: Label, pred: Label) -> None:
        if truth is Label.IMMEDIATE:
            if pred is Label.IMMEDIATE:
                self.tp += 1
            else:
                self.fn += 1
        elif pred is Label.IMMEDIATE:
            self.fp += 1
        else:
            self.tn += 1


def confusion(model: NBModel, examples: Iterable[LabeledExample]) -> ConfusionMatrix:
    cm = ConfusionMatrix()
    for ex in examples:
        cm.add(ex.label, predict(model, ex.text)[0])
    return cm


def evaluate_split(examples: Sequence[LabeledExample], train_fraction: float = 0.75,
                   seed: int = 0, alpha_smooth: float = 0.5) -> float:
    """Seeded shuffle, train on the first ``train_fraction``, return accuracy on the rest."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(examples))
    n_train = int(round(train_fraction * len(examples)))
    if n_train == 0 or n_train == len(examples):
        raise ValueError("split leaves the training or test set empty")
    tr = [examples[i] for i in order[:n_train]]
    te = [examples[i] for i in order[n_train:]]
    return confusion(train(tr, alpha_smooth), te).accuracy


def kfold_indices(n: int, k: int, seed: int) -> List[np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    return np.array_split(order, k)


def cross_validate(examples: Sequence[LabeledExample], k: int = 6, seed: int = 0,
                   alpha_smooth: float = 0.5) -> ConfusionMatrix:
    """Sum of the per-fold confusion matrices of seeded k-fold cross-validation."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(examples):
        raise ValueError(f"k={k} exceeds the number of examples ({len(examples)})")
    folds = kfold_indices(len(examples), k, seed)
    total = ConfusionMatrix()
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model = train([examples[j] for j in train_idx], alpha_smooth)
        total = total + confusion(model, (examples[j] for j in test_idx))
    return total


def read_training_file(path) -> List[LabeledExample]:
    """Tab-separated ``label<TAB>text`` lines; blank lines and ``#`` comments ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            try:
                label, text = line.split("\t", 1)
                out.append(LabeledExample(text, Label.parse(label)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out
