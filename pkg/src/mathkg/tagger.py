"""Linear-chain CRF tagger for knowledge entity recognition.

Viterbi decoding over a fixed 5-tag BIO tagset with structurally enforced
well-formedness; training by the averaged perceptron.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sklearn.base import BaseEstimator

from .distant import Gazetteer, KerExample

TAGSET = ("B-CON", "I-CON", "B-LEG", "I-LEG", "O")
BOS = "BOS"

NEG_INF = float("-inf")


@dataclass
class CrfModel:
    feature_weights: Dict[Tuple[str, str], float] = field(default_factory=dict)
    transition_weights: Dict[Tuple[str, str], float] = field(default_factory=dict)
    tagset: Tuple[str, ...] = TAGSET


@dataclass
class SpanMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def extract_features(
    tokens: Sequence[str], position: int, gazetteer: Optional[Gazetteer] = None
) -> List[str]:
    """Surface feature templates for one token position."""
    if not 0 <= position < len(tokens):
        raise IndexError(f"position {position} out of range for {len(tokens)} tokens")

    def ctx(offset: int) -> str:
        i = position + offset
        if i < 0:
            return BOS
        if i >= len(tokens):
            return "EOS"
        return tokens[i]

    w = tokens[position]
    feats = [
        f"w0={w}",
        f"low={w.lower()}",
        f"w-1={ctx(-1)}",
        f"w-2={ctx(-2)}",
        f"w+1={ctx(1)}",
        f"w+2={ctx(2)}",
    ]
    for n in range(1, 4):
        if len(w) >= n:
            feats.append(f"pre{n}={w[:n]}")
            feats.append(f"suf{n}={w[-n:]}")
    if w.isdigit():
        feats.append("isdigit")
    if gazetteer is not None:
        cls = gazetteer.class_of(w)
        if cls is not None:
            feats.append(f"gaz={cls}")
    return feats


def transition_allowed(prev: str, tag: str) -> bool:
    """Into I-X only from B-X or I-X; everything else is open."""
    if tag.startswith("I-"):
        cls = tag[2:]
        return prev in (f"B-{cls}", f"I-{cls}")
    return True


def _transition_score(model: CrfModel, prev: str, tag: str) -> float:
    if not transition_allowed(prev, tag):
        return NEG_INF
    return model.transition_weights.get((prev, tag), 0.0)


def _emissions(
    model: CrfModel, tokens: Sequence[str], gazetteer: Optional[Gazetteer]
) -> List[List[float]]:
    out = []
    for pos in range(len(tokens)):
        feats = extract_features(tokens, pos, gazetteer)
        out.append(
            [
                sum(model.feature_weights.get((f, tag), 0.0) for f in feats)
                for tag in model.tagset
            ]
        )
    return out


def decode(
    model: CrfModel, tokens: Sequence[str], gazetteer: Optional[Gazetteer] = None
) -> List[str]:
    """Viterbi-optimal BIO sequence; among ties, the lexicographically smallest
    sequence in tagset-index order."""
    n = len(tokens)
    if n == 0:
        return []
    tagset = model.tagset
    emit = _emissions(model, tokens, gazetteer)

    # suffix[t][y]: best score of positions t..n-1 given tag y at t
    # (emission at t included, transition into t excluded)
    suffix = [[0.0] * len(tagset) for _ in range(n)]
    suffix[n - 1] = list(emit[n - 1])
    for t in range(n - 2, -1, -1):
        for yi, y in enumerate(tagset):
            best = NEG_INF
            for yj, y2 in enumerate(tagset):
                s = _transition_score(model, y, y2)
                if s == NEG_INF:
                    continue
                s += suffix[t + 1][yj]
                if s > best:
                    best = s
            suffix[t][yi] = emit[t][yi] + best

    # greedy forward pass: lowest tagset index wins ties, which yields the
    # lexicographically smallest optimal sequence
    tags: List[str] = []
    prev = BOS
    for t in range(n):
        best_idx, best_score = None, NEG_INF
        for yi, y in enumerate(tagset):
            s = _transition_score(model, prev, y)
            if s == NEG_INF:
                continue
            s += suffix[t][yi]
            if s > best_score:
                best_idx, best_score = yi, s
        assert best_idx is not None  # O is always reachable
        tags.append(tagset[best_idx])
        prev = tagset[best_idx]
    return tags


def sequence_score(
    model: CrfModel,
    tokens: Sequence[str],
    tags: Sequence[str],
    gazetteer: Optional[Gazetteer] = None,
) -> float:
    """Score of one tag sequence under the model (the decode objective)."""
    total = 0.0
    prev = BOS
    for pos, tag in enumerate(tags):
        t = _transition_score(model, prev, tag)
        if t == NEG_INF:
            return NEG_INF
        total += t
        total += sum(
            model.feature_weights.get((f, tag), 0.0)
            for f in extract_features(tokens, pos, gazetteer)
        )
        prev = tag
    return total


def bio_spans(tags: Sequence[str]) -> List[Tuple[int, int, str]]:
    """(start, end, class) spans of a BIO sequence; end exclusive."""
    spans: List[Tuple[int, int, str]] = []
    start, cls = None, None
    for i, tag in enumerate(tags):
        if tag.startswith("B-"):
            if start is not None:
                spans.append((start, i, cls))
            start, cls = i, tag[2:]
        elif tag.startswith("I-") and cls == tag[2:] and start is not None:
            continue
        else:
            if start is not None:
                spans.append((start, i, cls))
            start, cls = None, None
    if start is not None:
        spans.append((start, len(tags), cls))
    return spans


def evaluate_spans(
    gold: Sequence[KerExample], predicted: Sequence[Sequence[str]]
) -> SpanMetrics:
    """Micro-averaged exact-span precision/recall/F1."""
    if len(gold) != len(predicted):
        raise ValueError(f"gold has {len(gold)} examples, predictions {len(predicted)}")
    tp = fp = fn = 0
    for ex, pred_tags in zip(gold, predicted):
        gold_set = set(bio_spans(ex.tags))
        pred_set = set(bio_spans(pred_tags))
        tp += len(gold_set & pred_set)
        fp += len(pred_set - gold_set)
        fn += len(gold_set - pred_set)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SpanMetrics(precision, recall, f1, tp, fp, fn)


class CrfTagger(BaseEstimator):
    """Averaged-perceptron trained linear-chain tagger (fit/predict)."""

    def __init__(self, epochs: int = 10, seed: int = 0, gazetteer: Optional[Gazetteer] = None):
        self.epochs = epochs
        self.seed = seed
        self.gazetteer = gazetteer

    def fit(self, X: Sequence[KerExample], y=None) -> "CrfTagger":
        if not X:
            raise ValueError("training dataset must be non-empty")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        dataset = list(X)
        w_feat: Dict[Tuple[str, str], float] = {}
        w_trans: Dict[Tuple[str, str], float] = {}
        # averaging accumulators (lazy: w - acc / steps)
        acc_feat: Dict[Tuple[str, str], float] = {}
        acc_trans: Dict[Tuple[str, str], float] = {}
        step = 0
        rng = random.Random(self.seed)
        model = CrfModel(w_feat, w_trans)

        feats_cache = [
            [extract_features(ex.tokens, i, self.gazetteer) for i in range(len(ex.tokens))]
            for ex in dataset
        ]
        order = list(range(len(dataset)))
        for _ in range(self.epochs):
            rng.shuffle(order)
            for idx in order:
                ex = dataset[idx]
                step += 1
                pred = decode(model, ex.tokens, self.gazetteer)
                if pred == ex.tags:
                    continue
                prev_g = prev_p = BOS
                for pos in range(len(ex.tokens)):
                    g, p = ex.tags[pos], pred[pos]
                    if g != p:
                        for f in feats_cache[idx][pos]:
                            w_feat[(f, g)] = w_feat.get((f, g), 0.0) + 1.0
                            w_feat[(f, p)] = w_feat.get((f, p), 0.0) - 1.0
                            acc_feat[(f, g)] = acc_feat.get((f, g), 0.0) + step
                            acc_feat[(f, p)] = acc_feat.get((f, p), 0.0) - step
                    if (prev_g, g) != (prev_p, p):
                        w_trans[(prev_g, g)] = w_trans.get((prev_g, g), 0.0) + 1.0
                        w_trans[(prev_p, p)] = w_trans.get((prev_p, p), 0.0) - 1.0
                        acc_trans[(prev_g, g)] = acc_trans.get((prev_g, g), 0.0) + step
                        acc_trans[(prev_p, p)] = acc_trans.get((prev_p, p), 0.0) - step
                    prev_g, prev_p = g, p

        avg_feat = {k: v - acc_feat.get(k, 0.0) / step for k, v in w_feat.items()}
        avg_trans = {k: v - acc_trans.get(k, 0.0) / step for k, v in w_trans.items()}
        self.model_ = CrfModel(avg_feat, avg_trans)
        return self

    def predict(self, X: Sequence) -> List[List[str]]:
        """Tag sequences for a list of token lists (or KerExamples)."""
        out = []
        for item in X:
            tokens = item.tokens if isinstance(item, KerExample) else item
            out.append(decode(self.model_, tokens, self.gazetteer))
        return out

    def score(self, X: Sequence[KerExample], y=None) -> float:
        return evaluate_spans(list(X), self.predict(X)).f1


def train(dataset: Sequence[KerExample], epochs: int, seed: int,
          gazetteer: Optional[Gazetteer] = None) -> CrfModel:
    return CrfTagger(epochs=epochs, seed=seed, gazetteer=gazetteer).fit(dataset).model_


def save_model(model: CrfModel, path: str) -> None:
    payload = {
        "tagset": list(model.tagset),
        "feature_weights": [[f, t, w] for (f, t), w in sorted(model.feature_weights.items())],
        "transition_weights": [[a, b, w] for (a, b), w in sorted(model.transition_weights.items())],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=None, separators=(",", ":"))


def load_model(path: str) -> CrfModel:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    return CrfModel(
        feature_weights={(f, t): w for f, t, w in payload["feature_weights"]},
        transition_weights={(a, b): w for a, b, w in payload["transition_weights"]},
        tagset=tuple(payload["tagset"]),
    )
