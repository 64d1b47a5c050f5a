"""Distant supervision: seed entity recall and KER/ERC dataset construction."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .corpus import Document, doc_sentences, normalize_surface, token_surfaces
from .relations import NA, canonical_relation, directed

CON = "CON"
LEG = "LEG"

# Titles containing any of these markers are classed as theorem entities.
THEOREM_MARKERS = ("theorem", "law", "rule", "formula", "定理", "法则", "公式")

MAX_NGRAM = 4


def entity_class_for(name: str) -> str:
    low = name.lower()
    return LEG if any(m in low for m in THEOREM_MARKERS) else CON


@dataclass
class Gazetteer:
    """Seed entity lexicon: normalized surface -> entity class, with provenance."""

    entries: Dict[str, str] = field(default_factory=dict)
    sources: Dict[str, str] = field(default_factory=dict)

    def add(self, surface: str, cls: str, source: str) -> None:
        key = normalize_surface(surface)
        if not key:
            return
        if key in self.entries:
            return  # first source wins (title > pattern > tfidf insertion order)
        self.entries[key] = cls
        self.sources[key] = source

    def __contains__(self, surface: str) -> bool:
        return normalize_surface(surface) in self.entries

    def class_of(self, surface: str) -> Optional[str]:
        return self.entries.get(normalize_surface(surface))

    def _token_index(self) -> Dict[Tuple[str, ...], Tuple[str, str]]:
        index: Dict[Tuple[str, ...], Tuple[str, str]] = {}
        for surface, cls in self.entries.items():
            toks = tuple(t.lower() for t in token_surfaces(surface))
            if toks and toks not in index:
                index[toks] = (surface, cls)
        return index

    def match_spans(self, tokens: Sequence[str]) -> List[Tuple[int, int, str, str]]:
        """Greedy longest-match-first, leftmost-first matching over token
        subsequences.  Returns (start, end, surface, class) spans."""
        index = self._token_index()
        if not index:
            return []
        max_len = max(len(k) for k in index)
        lowered = [t.lower() for t in tokens]
        spans: List[Tuple[int, int, str, str]] = []
        i = 0
        while i < len(tokens):
            matched = False
            for width in range(min(max_len, len(tokens) - i), 0, -1):
                key = tuple(lowered[i : i + width])
                if key in index:
                    surface, cls = index[key]
                    spans.append((i, i + width, surface, cls))
                    i += width
                    matched = True
                    break
            if not matched:
                i += 1
        return spans


@dataclass
class KerExample:
    tokens: List[str]
    tags: List[str]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError("tokens and tags must have equal length")
        validate_bio(self.tags)


@dataclass
class ErcExample:
    tokens: List[str]
    e1_span: Tuple[int, int]
    e2_span: Tuple[int, int]
    label: str

    def __post_init__(self):
        (s1, e1), (s2, e2) = self.e1_span, self.e2_span
        if not (0 <= s1 < e1 <= s2 < e2 <= len(self.tokens)):
            raise ValueError(
                f"spans {self.e1_span}/{self.e2_span} must be in-bounds, "
                "non-overlapping, with e1 before e2"
            )


def validate_bio(tags: Sequence[str]) -> None:
    prev = "O"
    for tag in tags:
        if tag.startswith("I-"):
            cls = tag[2:]
            if prev not in (f"B-{cls}", f"I-{cls}"):
                raise ValueError(f"I-{cls} may only follow B-{cls} or I-{cls}")
        prev = tag


def _wordlike(tok: str) -> bool:
    return any(ch.isalnum() for ch in tok)


def _doc_ngrams(doc: Document) -> List[str]:
    """All token n-grams (n <= MAX_NGRAM) whose tokens are wordlike and not
    all digits, as normalized surfaces."""
    grams: List[str] = []
    for sent in doc_sentences(doc):
        toks = [t.surface for t in sent.tokens]
        for n in range(1, MAX_NGRAM + 1):
            for i in range(len(toks) - n + 1):
                window = toks[i : i + n]
                if all(_wordlike(t) for t in window) and not all(
                    t.isdigit() for t in window
                ):
                    grams.append(normalize_surface(" ".join(window)))
    return grams


def _looks_like_entity(value: str) -> bool:
    toks = token_surfaces(value)
    return 0 < len(toks) <= MAX_NGRAM and any(_wordlike(t) for t in toks)


def recall_seed_entities(docs: Sequence[Document], min_tfidf: float) -> Gazetteer:
    """Seed recall from titles, infobox values and high tf-idf n-grams.

    tf-idf(term, doc) = tf(term, doc) * ln(N / df(term)); an n-gram enters the
    gazetteer when its tf-idf in any document reaches min_tfidf.
    """
    if not docs:
        raise ValueError("seed recall needs a non-empty document list")
    gaz = Gazetteer()
    for doc in docs:
        if doc.title:
            gaz.add(doc.title, entity_class_for(doc.title), "title")
    for doc in docs:
        for value in doc.infobox.values():
            if _looks_like_entity(value):
                gaz.add(value, entity_class_for(value), "pattern")

    if math.isinf(min_tfidf) and min_tfidf > 0:
        return gaz

    per_doc_counts: List[Dict[str, int]] = []
    df: Dict[str, int] = {}
    for doc in docs:
        counts: Dict[str, int] = {}
        for gram in _doc_ngrams(doc):
            counts[gram] = counts.get(gram, 0) + 1
        per_doc_counts.append(counts)
        for gram in counts:
            df[gram] = df.get(gram, 0) + 1

    n_docs = len(docs)
    passing = set()
    for counts in per_doc_counts:
        for gram, tf in counts.items():
            if tf * math.log(n_docs / df[gram]) >= min_tfidf:
                passing.add(gram)
    for gram in sorted(passing):
        gaz.add(gram, entity_class_for(gram), "tfidf")
    return gaz


def build_ker_dataset(docs: Sequence[Document], gazetteer: Gazetteer) -> List[KerExample]:
    """Label every sentence by aligning it with the gazetteer (BIO scheme)."""
    if not gazetteer.entries:
        raise ValueError("gazetteer must be non-empty")
    examples: List[KerExample] = []
    for doc in docs:
        for sent in doc_sentences(doc):
            toks = [t.surface for t in sent.tokens]
            if not toks:
                continue
            tags = ["O"] * len(toks)
            for start, end, _surface, cls in gazetteer.match_spans(toks):
                tags[start] = f"B-{cls}"
                for k in range(start + 1, end):
                    tags[k] = f"I-{cls}"
            examples.append(KerExample(toks, tags))
    return examples


def _seed_key(surface: str) -> str:
    return normalize_surface(surface)


def build_erc_dataset(
    docs: Sequence[Document],
    gazetteer: Gazetteer,
    seed_triples: Iterable,
    patterns: Sequence = (),
    na_ratio: float = 1.0,
    seed: int = 0,
) -> List[ErcExample]:
    """Align sentences with seed triples (distant supervision), add pattern
    positives, and sample NA negatives at na_ratio x positives."""
    if na_ratio < 0:
        raise ValueError("na_ratio must be >= 0")
    # (head, tail) normalized -> relation, plus symmetric lookup for direction
    seed_index: Dict[Tuple[str, str], str] = {}
    for t in seed_triples:
        if isinstance(t, tuple):
            head, rel, tail = t
        else:
            head, rel, tail = t.head, t.relation, t.tail
        key = (_seed_key(head), _seed_key(tail))
        seed_index.setdefault(key, canonical_relation(rel))

    positives: List[ErcExample] = []
    na_pool: List[ErcExample] = []
    seen: set = set()

    def emit(example: ErcExample, positive: bool) -> None:
        key = (tuple(example.tokens), example.e1_span, example.e2_span)
        if key in seen:
            return
        seen.add(key)
        (positives if positive else na_pool).append(example)

    from .relclf import match_patterns  # local import: relclf depends on distant types

    for doc in docs:
        for sent in doc_sentences(doc):
            toks = [t.surface for t in sent.tokens]
            mentions = gazetteer.match_spans(toks)
            if len(mentions) < 2:
                continue
            if patterns:
                fired = {
                    (m1[:2], m2[:2]): label
                    for m1, m2, label in match_patterns(toks, mentions, patterns)
                }
            else:
                fired = {}
            for a in range(len(mentions)):
                for b in range(a + 1, len(mentions)):
                    s1, e1, surf1, _ = mentions[a]
                    s2, e2, surf2, _ = mentions[b]
                    if e1 > s2:
                        continue
                    rel = seed_index.get((surf1, surf2))
                    if rel is not None:
                        emit(ErcExample(toks, (s1, e1), (s2, e2), directed(rel, True)), True)
                        continue
                    rel = seed_index.get((surf2, surf1))
                    if rel is not None:
                        emit(ErcExample(toks, (s1, e1), (s2, e2), directed(rel, False)), True)
                        continue
                    label = fired.get(((s1, e1), (s2, e2)))
                    if label is not None:
                        emit(ErcExample(toks, (s1, e1), (s2, e2), label), True)
                    else:
                        emit(ErcExample(toks, (s1, e1), (s2, e2), NA), False)

    n_negatives = min(len(na_pool), round(na_ratio * len(positives)))
    rng = random.Random(seed)
    negatives = rng.sample(na_pool, n_negatives) if n_negatives else []
    return positives + negatives


# ---------------------------------------------------------------------------
# File formats and splits


def write_conll(examples: Sequence[KerExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            for tok, tag in zip(ex.tokens, ex.tags):
                f.write(f"{tok}\t{tag}\n")
            f.write("\n")


def read_conll(path: str) -> List[KerExample]:
    examples: List[KerExample] = []
    tokens: List[str] = []
    tags: List[str] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                if tokens:
                    examples.append(KerExample(tokens, tags))
                    tokens, tags = [], []
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'token<TAB>tag'")
            tokens.append(parts[0])
            tags.append(parts[1])
    if tokens:
        examples.append(KerExample(tokens, tags))
    return examples


def write_erc_tsv(examples: Sequence[ErcExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(
                "\t".join(
                    [
                        " ".join(ex.tokens),
                        str(ex.e1_span[0]),
                        str(ex.e1_span[1]),
                        str(ex.e2_span[0]),
                        str(ex.e2_span[1]),
                        ex.label,
                    ]
                )
                + "\n"
            )


def read_erc_tsv(path: str) -> List[ErcExample]:
    examples: List[ErcExample] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 tab-separated fields")
            tokens = parts[0].split(" ")
            examples.append(
                ErcExample(
                    tokens,
                    (int(parts[1]), int(parts[2])),
                    (int(parts[3]), int(parts[4])),
                    parts[5],
                )
            )
    return examples


def split_dataset(examples: Sequence, seed: int, ratios=(0.7, 0.15, 0.15)):
    """Seeded shuffle, then train/dev/test split by the given ratios."""
    order = list(range(len(examples)))
    random.Random(seed).shuffle(order)
    n = len(examples)
    n_train = round(ratios[0] * n)
    n_dev = round(ratios[1] * n)
    shuffled = [examples[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_dev],
        shuffled[n_train + n_dev :],
    )


def save_gazetteer(gaz: Gazetteer, path: str) -> None:
    import json

    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            {
                s: {"class": gaz.entries[s], "source": gaz.sources.get(s, "")}
                for s in sorted(gaz.entries)
            },
            f, ensure_ascii=False, indent=2,
        )


def load_gazetteer(path: str) -> Gazetteer:
    import json

    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    gaz = Gazetteer()
    for surface, info in payload.items():
        gaz.add(surface, info["class"], info.get("source", ""))
    return gaz
