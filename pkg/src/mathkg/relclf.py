"""Entity relation classification: pattern rules and a 13-way max-ent model."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .distant import ErcExample
from .relations import ALL_LABELS, canonical_relation, split_directed


@dataclass(frozen=True)
class PatternRule:
    id: str
    template: Tuple[str, ...]  # tokens with "E1"/"E2" slots and "*" wildcards
    relation: str  # directed label, e.g. "Aff->"

    def __post_init__(self):
        if self.template.count("E1") != 1 or self.template.count("E2") != 1:
            raise ValueError("template must contain E1 and E2 exactly once")
        if self.template.index("E1") > self.template.index("E2"):
            raise ValueError("E1 must precede E2 in the template")
        split_directed(self.relation)  # validates


def parse_rule(obj: dict) -> PatternRule:
    relation = obj["relation"]
    if not (relation.endswith("->") or relation.endswith("<-")):
        relation = canonical_relation(relation) + "->"
    else:
        rel, fwd = split_directed(relation)
        relation = f"{rel}{'->' if fwd else '<-'}"
    return PatternRule(obj["id"], tuple(obj["template"].split()), relation)


def load_rules(path: str) -> List[PatternRule]:
    with open(path, "r", encoding="utf-8") as f:
        return [parse_rule(obj) for obj in json.load(f)]


def save_rules(rules: Sequence[PatternRule], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            [{"id": r.id, "template": " ".join(r.template), "relation": r.relation} for r in rules],
            f, ensure_ascii=False, indent=2,
        )


def _segment_matches(segment: Sequence[str], literals: Sequence[str]) -> bool:
    """Does the literal/wildcard sequence match some contiguous window of segment?"""
    if not literals:
        return len(segment) == 0
    lowered = [t.lower() for t in segment]
    width = len(literals)
    for i in range(len(lowered) - width + 1):
        if all(lit == "*" or lit == lowered[i + k] for k, lit in enumerate(literals)):
            return True
    return False


def _edge_matches(segment: Sequence[str], literals: Sequence[str]) -> bool:
    if len(segment) < len(literals):
        return False
    return all(
        lit == "*" or lit == segment[k].lower() for k, lit in enumerate(literals)
    )


def match_patterns(
    tokens: Sequence[str], mentions: Sequence, rules: Sequence[PatternRule]
) -> List[Tuple[Tuple[int, int], Tuple[int, int], str]]:
    """Fire rules over mention pairs; returns (e1_span, e2_span, directed label).

    Prefix/suffix literals anchor directly before E1 / after E2; the inter-slot
    part matches any contiguous window strictly between the mentions.
    """
    spans = [(m[0], m[1]) for m in mentions]
    fired: List[Tuple[Tuple[int, int], Tuple[int, int], str]] = []
    for rule in rules:
        i1 = rule.template.index("E1")
        i2 = rule.template.index("E2")
        prefix = rule.template[:i1]
        inter = rule.template[i1 + 1 : i2]
        suffix = rule.template[i2 + 1 :]
        for a in range(len(spans)):
            for b in range(a + 1, len(spans)):
                (s1, e1), (s2, e2) = spans[a], spans[b]
                if e1 > s2:
                    continue
                if len(prefix) > s1 or not _edge_matches(tokens[s1 - len(prefix) : s1], prefix):
                    continue
                if not _edge_matches(tokens[e2 : e2 + len(suffix)], suffix):
                    continue
                if not _segment_matches(tokens[e1:s2], inter):
                    continue
                fired.append(((s1, e1), (s2, e2), rule.relation))
    return fired


def discover_patterns(
    positives: Sequence[ErcExample], min_count: int = 2
) -> List[PatternRule]:
    """Inter-entity token sequences of seed-labeled pairs that recur at least
    min_count times with a single majority relation become rules."""
    by_seq: Dict[Tuple[str, ...], Counter] = defaultdict(Counter)
    for ex in positives:
        if ex.label == "NA":
            continue
        seq = tuple(t.lower() for t in ex.tokens[ex.e1_span[1] : ex.e2_span[0]])
        by_seq[seq][ex.label] += 1
    rules: List[PatternRule] = []
    n = 0
    for seq in sorted(by_seq):
        counts = by_seq[seq]
        total = sum(counts.values())
        if total < min_count:
            continue
        (label, top), *rest = counts.most_common()
        if rest and rest[0][1] == top:
            continue  # no single majority relation
        rules.append(PatternRule(f"p{n}", ("E1",) + seq + ("E2",), label))
        n += 1
    return rules


# ---------------------------------------------------------------------------
# Maximum-entropy classifier


def erc_features(
    tokens: Sequence[str],
    e1_span: Tuple[int, int],
    e2_span: Tuple[int, int],
    rules: Sequence[PatternRule] = (),
) -> List[str]:
    (s1, e1), (s2, e2) = e1_span, e2_span
    if e1 > s2:
        raise ValueError("mention spans must not overlap")

    def ctx(i: int) -> str:
        if i < 0:
            return "BOS"
        if i >= len(tokens):
            return "EOS"
        return tokens[i].lower()

    feats = [f"mid={t.lower()}" for t in tokens[e1:s2]]
    feats.append("e1=" + " ".join(t.lower() for t in tokens[s1:e1]))
    feats.append("e2=" + " ".join(t.lower() for t in tokens[s2:e2]))
    for off in (1, 2):
        feats.append(f"e1w-{off}={ctx(s1 - off)}")
        feats.append(f"e1w+{off}={ctx(e1 + off - 1)}")
        feats.append(f"e2w-{off}={ctx(s2 - off)}")
        feats.append(f"e2w+{off}={ctx(e2 + off - 1)}")
    gap = s2 - e1
    for lo, hi, name in ((0, 0, "0"), (1, 1, "1"), (2, 2, "2"), (3, 5, "3-5"), (6, 10, "6-10")):
        if lo <= gap <= hi:
            feats.append(f"dist={name}")
            break
    else:
        feats.append("dist=>10")
    if rules:
        for (fs1, fe1), (fs2, fe2), label in match_patterns(tokens, [(s1, e1), (s2, e2)], rules):
            if (fs1, fe1) == (s1, e1) and (fs2, fe2) == (s2, e2):
                feats.append(f"pat={label}")
    return feats


def nll_and_grad(
    weights: np.ndarray, feature_lists: Sequence[Sequence[int]], labels: Sequence[int]
) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy of the softmax model and its analytic gradient.

    weights: (n_features, n_labels); feature_lists: per-example active feature
    indices (binary features); labels: per-example gold label indices.
    """
    n = len(feature_lists)
    grad = np.zeros_like(weights)
    loss = 0.0
    for feats, label in zip(feature_lists, labels):
        logits = weights[feats].sum(axis=0)
        logits -= logits.max()
        exp = np.exp(logits)
        probs = exp / exp.sum()
        loss -= np.log(probs[label])
        delta = probs.copy()
        delta[label] -= 1.0
        for f in feats:
            grad[f] += delta
    return loss / n, grad / n


class RelationClassifier(BaseEstimator):
    """Multinomial logistic regression over sparse text features,
    trained by mini-batch gradient descent."""

    def __init__(
        self,
        epochs: int = 200,
        learning_rate: float = 0.5,
        batch_size: int = 32,
        seed: int = 0,
        rules: Sequence[PatternRule] = (),
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.rules = rules

    @property
    def classes_(self) -> Tuple[str, ...]:
        return ALL_LABELS

    def _featurize(self, ex: ErcExample) -> List[str]:
        return erc_features(ex.tokens, ex.e1_span, ex.e2_span, self.rules)

    def fit(self, X: Sequence[ErcExample], y=None) -> "RelationClassifier":
        if not X:
            raise ValueError("training dataset must be non-empty")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        raw_feats = [self._featurize(ex) for ex in X]
        index: Dict[str, int] = {}
        for feats in raw_feats:
            for f in feats:
                if f not in index:
                    index[f] = len(index)
        self.feature_index_ = index
        feat_ids = [[index[f] for f in feats] for feats in raw_feats]
        label_ids = [ALL_LABELS.index(ex.label) for ex in X]

        rng = np.random.default_rng(self.seed)
        W = np.zeros((len(index), len(ALL_LABELS)))
        order = np.arange(len(X))
        for _ in range(self.epochs):
            rng.shuffle(order)
            for start in range(0, len(order), self.batch_size):
                batch = order[start : start + self.batch_size]
                _, grad = nll_and_grad(
                    W, [feat_ids[i] for i in batch], [label_ids[i] for i in batch]
                )
                W -= self.learning_rate * grad
        self.weights_ = W
        return self

    def _probs(self, feats: Sequence[str]) -> np.ndarray:
        ids = [self.feature_index_[f] for f in feats if f in self.feature_index_]
        logits = self.weights_[ids].sum(axis=0) if ids else np.zeros(len(ALL_LABELS))
        logits = logits - logits.max()
        exp = np.exp(logits)
        return exp / exp.sum()

    def predict_proba_one(
        self, tokens: Sequence[str], e1_span: Tuple[int, int], e2_span: Tuple[int, int]
    ) -> Tuple[str, Dict[str, float]]:
        """Argmax label (ties to the first label in fixed order) and the full
        distribution for one mention pair."""
        probs = self._probs(erc_features(tokens, e1_span, e2_span, self.rules))
        best = int(np.argmax(probs))
        return ALL_LABELS[best], {lab: float(p) for lab, p in zip(ALL_LABELS, probs)}

    def predict(self, X: Sequence[ErcExample]) -> List[str]:
        return [
            self.predict_proba_one(ex.tokens, ex.e1_span, ex.e2_span)[0] for ex in X
        ]

    def score(self, X: Sequence[ErcExample], y=None) -> float:
        pred = self.predict(X)
        return sum(p == ex.label for p, ex in zip(pred, X)) / len(X)

    def save(self, path: str) -> None:
        features = sorted(self.feature_index_, key=self.feature_index_.get)
        payload = {
            "labels": list(ALL_LABELS),
            "features": features,
            "weights": self.weights_.tolist(),
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def load(cls, path: str, rules: Sequence[PatternRule] = ()) -> "RelationClassifier":
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        clf = cls(rules=rules)
        clf.feature_index_ = {f: i for i, f in enumerate(payload["features"])}
        clf.weights_ = np.array(payload["weights"])
        return clf


def classify_relation(
    model: RelationClassifier,
    tokens: Sequence[str],
    e1_span: Tuple[int, int],
    e2_span: Tuple[int, int],
) -> Tuple[str, Dict[str, float]]:
    return model.predict_proba_one(tokens, e1_span, e2_span)


def evaluate_relations(
    gold: Sequence[ErcExample], predicted: Sequence[str]
) -> Dict[str, float]:
    """Micro P/R/F1 treating NA as the negative class."""
    if len(gold) != len(predicted):
        raise ValueError("gold and predictions must align")
    tp = fp = fn = 0
    for ex, pred in zip(gold, predicted):
        if pred != "NA":
            if pred == ex.label:
                tp += 1
            else:
                fp += 1
                if ex.label != "NA":
                    fn += 1
        elif ex.label != "NA":
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}
