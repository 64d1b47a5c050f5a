"""Translation embeddings over the knowledge graph (margin-ranking SGD)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .graphstore import KnowledgeGraph


@dataclass
class EmbeddingTable:
    dim: int
    entity_vecs: Dict[str, np.ndarray]
    relation_vecs: Dict[str, np.ndarray]

    def entity(self, eid: str) -> np.ndarray:
        if eid not in self.entity_vecs:
            raise KeyError(f"unknown entity {eid!r}")
        return self.entity_vecs[eid]

    def relation(self, label: str) -> np.ndarray:
        if label not in self.relation_vecs:
            raise KeyError(f"unknown relation {label!r}")
        return self.relation_vecs[label]


def score_triple(table: EmbeddingTable, head: str, relation: str, tail: str) -> float:
    """Translation distance ||v_h + v_r - v_t||_2 (0 means a perfect fit)."""
    return float(np.linalg.norm(table.entity(head) + table.relation(relation) - table.entity(tail)))


def rank_tails(
    table: EmbeddingTable, graph: KnowledgeGraph, head: str, relation: str
) -> List[Tuple[str, float]]:
    """All graph entities sorted ascending by score, ties broken by id."""
    table.entity(head)
    table.relation(relation)
    scored = [
        (eid, score_triple(table, head, relation, eid)) for eid in graph.entities
    ]
    scored.sort(key=lambda x: (x[1], x[0]))
    return scored


def margin_loss(
    ent: np.ndarray,
    rel: np.ndarray,
    positives: Sequence[Tuple[int, int, int]],
    negatives: Sequence[Tuple[int, int, int]],
    margin: float,
) -> float:
    """Total margin-ranking loss sum(max(0, margin + d(pos) - d(neg)))."""
    total = 0.0
    for (h, r, t), (h2, r2, t2) in zip(positives, negatives):
        d_pos = np.linalg.norm(ent[h] + rel[r] - ent[t])
        d_neg = np.linalg.norm(ent[h2] + rel[r2] - ent[t2])
        total += max(0.0, margin + d_pos - d_neg)
    return float(total)


def margin_loss_grads(
    ent: np.ndarray,
    rel: np.ndarray,
    pos: Tuple[int, int, int],
    neg: Tuple[int, int, int],
    margin: float,
) -> Tuple[np.ndarray, np.ndarray] | None:
    """Analytic gradients of one hinge term w.r.t. (ent, rel), or None when
    the margin is satisfied."""
    h, r, t = pos
    h2, r2, t2 = neg
    diff_pos = ent[h] + rel[r] - ent[t]
    diff_neg = ent[h2] + rel[r2] - ent[t2]
    d_pos = np.linalg.norm(diff_pos)
    d_neg = np.linalg.norm(diff_neg)
    if margin + d_pos - d_neg <= 0:
        return None
    g_ent = np.zeros_like(ent)
    g_rel = np.zeros_like(rel)
    if d_pos > 0:
        u = diff_pos / d_pos
        g_ent[h] += u
        g_rel[r] += u
        g_ent[t] -= u
    if d_neg > 0:
        u = diff_neg / d_neg
        g_ent[h2] -= u
        g_rel[r2] -= u
        g_ent[t2] += u
    return g_ent, g_rel


class TransE(BaseEstimator):
    """TransE trained by seeded SGD over margin violations.

    Entity vectors are renormalized to unit L2 norm after initialization and
    after every epoch.
    """

    def __init__(
        self,
        dim: int = 50,
        margin: float = 1.0,
        learning_rate: float = 0.01,
        epochs: int = 200,
        negatives_per_positive: int = 1,
        seed: int = 0,
    ):
        self.dim = dim
        self.margin = margin
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.negatives_per_positive = negatives_per_positive
        self.seed = seed

    def fit(self, graph: KnowledgeGraph, y=None) -> "TransE":
        triples = graph.triples
        if not triples:
            raise ValueError("graph must contain at least one triple")
        if self.dim < 1 or self.margin <= 0:
            raise ValueError("dim must be >= 1 and margin > 0")
        entity_ids = sorted(graph.entities)
        relation_ids = sorted({t.relation for t in triples})
        e_index = {e: i for i, e in enumerate(entity_ids)}
        r_index = {r: i for i, r in enumerate(relation_ids)}
        pos = [(e_index[t.head], r_index[t.relation], e_index[t.tail]) for t in triples]
        existing = set(pos)

        rng = np.random.default_rng(self.seed)
        bound = 6.0 / np.sqrt(self.dim)
        ent = rng.uniform(-bound, bound, size=(len(entity_ids), self.dim))
        rel = rng.uniform(-bound, bound, size=(len(relation_ids), self.dim))
        ent /= np.linalg.norm(ent, axis=1, keepdims=True)

        n_ent = len(entity_ids)
        for _ in range(self.epochs):
            order = rng.permutation(len(pos))
            for idx in order:
                h, r, t = pos[idx]
                for _ in range(self.negatives_per_positive):
                    neg = self._corrupt(rng, (h, r, t), n_ent, existing)
                    grads = margin_loss_grads(ent, rel, (h, r, t), neg, self.margin)
                    if grads is None:
                        continue
                    g_ent, g_rel = grads
                    ent -= self.learning_rate * g_ent
                    rel -= self.learning_rate * g_rel
            ent /= np.linalg.norm(ent, axis=1, keepdims=True)

        self.table_ = EmbeddingTable(
            self.dim,
            {e: ent[i].copy() for e, i in e_index.items()},
            {r: rel[i].copy() for r, i in r_index.items()},
        )
        self._pos_indices = pos
        self._entity_ids = entity_ids
        self._relation_ids = relation_ids
        return self

    @staticmethod
    def _corrupt(rng, triple, n_ent: int, existing: set) -> Tuple[int, int, int]:
        h, r, t = triple
        for _ in range(100):
            e = int(rng.integers(n_ent))
            cand = (e, r, t) if rng.integers(2) == 0 else (h, r, e)
            if cand not in existing:
                return cand
        # degenerate tiny graphs: fall back to any different endpoint
        e = (t + 1) % n_ent
        return (h, r, e) if (h, r, e) not in existing else ((e, r, t))


def train_transe(
    graph: KnowledgeGraph,
    dim: int = 50,
    margin: float = 1.0,
    learning_rate: float = 0.01,
    epochs: int = 200,
    negatives_per_positive: int = 1,
    seed: int = 0,
) -> EmbeddingTable:
    return TransE(dim, margin, learning_rate, epochs, negatives_per_positive, seed).fit(graph).table_


def hits_at_k(table: EmbeddingTable, graph: KnowledgeGraph, k: int = 1) -> float:
    """Fraction of training triples whose true tail ranks in the top k."""
    triples = graph.triples
    hits = 0
    for t in triples:
        ranking = rank_tails(table, graph, t.head, t.relation)
        top = [eid for eid, _ in ranking[:k]]
        if t.tail in top:
            hits += 1
    return hits / len(triples)


def save_table(table: EmbeddingTable, path: str) -> None:
    payload = {
        "dim": table.dim,
        "entities": {e: [float(x) for x in table.entity_vecs[e]] for e in sorted(table.entity_vecs)},
        "relations": {r: [float(x) for x in table.relation_vecs[r]] for r in sorted(table.relation_vecs)},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, separators=(",", ":"))


def load_table(path: str) -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    return EmbeddingTable(
        payload["dim"],
        {e: np.array(v) for e, v in payload["entities"].items()},
        {r: np.array(v) for r, v in payload["relations"].items()},
    )
