"""Semantic search: topic entity detection, multi-hop recall, hybrid scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .corpus import normalize_surface, token_surfaces
from .embed import EmbeddingTable
from .graphstore import FWD, KnowledgeGraph

DEFAULT_HOPS = 2
DEFAULT_TOP_N = 10
DEFAULT_LAMBDA = 0.5


class NoTopicEntityError(ValueError):
    pass


@dataclass
class SearchResult:
    entity: str
    score: float
    lexical_score: float
    embedding_score: float
    path: List[Tuple[str, str, str]] = field(default_factory=list)


def _name_index(graph: KnowledgeGraph) -> dict:
    """Token tuples of every entity name/alias -> sorted candidate ids."""
    index: dict = {}
    for eid, ent in graph.entities.items():
        for name in ent.names:
            key = tuple(t.lower() for t in token_surfaces(name))
            if key:
                index.setdefault(key, set()).add(eid)
    return {k: sorted(v) for k, v in index.items()}


def detect_topic_entity(question: str, graph: KnowledgeGraph, tagger=None) -> str:
    """Longest entity-name match over the question tokens; ties go to the
    earliest position, then the lexicographically smallest id.  Falls back to
    CRF tagger spans when no name matches."""
    tokens = [t.lower() for t in token_surfaces(question)]
    index = _name_index(graph)
    max_len = max((len(k) for k in index), default=0)
    # widths tried longest-first, positions leftmost-first: first hit wins
    for width in range(min(max_len, len(tokens)), 0, -1):
        for i in range(len(tokens) - width + 1):
            key = tuple(tokens[i : i + width])
            if key in index:
                return index[key][0]

    if tagger is not None:
        from .tagger import bio_spans

        raw = token_surfaces(question)
        tags = tagger.predict([raw])[0]
        candidates = []
        for start, end, _cls in bio_spans(tags):
            span = set(t.lower() for t in raw[start:end])
            for eid, ent in graph.entities.items():
                name_tokens = set()
                for name in ent.names:
                    name_tokens |= {t.lower() for t in token_surfaces(name)}
                overlap = len(span & name_tokens)
                if overlap:
                    candidates.append((-overlap, eid))
        if candidates:
            return min(candidates)[1]
    raise NoTopicEntityError(f"no topic entity found in question {question!r}")


def _lexical_score(question_tokens: set, graph: KnowledgeGraph, entity: str) -> float:
    name_tokens = set()
    for name in graph.entities[entity].names:
        name_tokens |= {t.lower() for t in token_surfaces(name)}
    if not name_tokens:
        return 0.0
    return len(question_tokens & name_tokens) / len(name_tokens)


def _embedding_score(
    table: EmbeddingTable, topic: str, entity: str, path: Sequence[Tuple[str, str, str]]
) -> float:
    """1 / (1 + ||v_topic + sum of signed relation vectors - v_entity||)."""
    translated = table.entity(topic).copy()
    for _node, rel, direction in path:
        vec = table.relation(rel)
        translated = translated + vec if direction == FWD else translated - vec
    dist = float(np.linalg.norm(translated - table.entity(entity)))
    return 1.0 / (1.0 + dist)


def answer_question(
    question: str,
    graph: KnowledgeGraph,
    table: Optional[EmbeddingTable] = None,
    k: int = DEFAULT_HOPS,
    mix: float = DEFAULT_LAMBDA,
    top_n: int = DEFAULT_TOP_N,
    tagger=None,
) -> Tuple[str, List[SearchResult]]:
    """Recall the k-hop neighborhood of the topic entity and rank candidates
    by mix * lexical + (1 - mix) * embedding score."""
    if not 0 <= mix <= 1:
        raise ValueError("mix must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    topic = detect_topic_entity(question, graph, tagger)
    sub = graph.k_hop_subgraph([topic], k)
    question_tokens = {t.lower() for t in token_surfaces(question)}
    results: List[SearchResult] = []
    for entity in sorted(sub.entities):
        if entity == topic:
            continue
        path = sub.shortest_path(topic, entity) or []
        lex = _lexical_score(question_tokens, graph, entity)
        if table is not None and mix < 1:
            emb = _embedding_score(table, topic, entity, path)
        else:
            emb = 0.0
        results.append(SearchResult(entity, mix * lex + (1 - mix) * emb, lex, emb, path))
    results.sort(key=lambda r: (-r.score, r.entity))
    return topic, results[:top_n]
