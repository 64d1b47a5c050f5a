"""Pipeline glue: seed triples from semi-structured fields, triple extraction
over the corpus, and fusion into the persisted graph."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import Document, doc_sentences, normalize_surface
from .distant import Gazetteer
from .fusion import DEFAULT_CONFIDENCE, KnowledgeEntity, RawTriple, Triple, fuse
from .graphstore import KnowledgeGraph
from .relations import NA, canonical_relation, split_directed
from .relclf import PatternRule, RelationClassifier, match_patterns
from .tagger import CrfTagger

# Infobox keys that carry an explicit relation; the flag says whether the
# document title is the head of the stored triple.
INFOBOX_RELATION_KEYS = {
    "depends_on": ("Dep", False),  # value is the prerequisite
    "prerequisite": ("Dep", False),
    "part_of": ("Aff", True),
    "kind_of": ("Aff", True),
    "type": ("Aff", True),
    "equivalent": ("Equ", True),
    "also_known_as": ("Equ", True),
    "opposite": ("Ant", True),
    "antonym": ("Ant", True),
    "synonym": ("Syn", True),
    "similar_to": ("Syn", True),
    "has_property": ("Pro", True),  # stored as owner -> property ("has")
    "properties": ("Pro", True),
}

CLASSIFIER_THRESHOLD = 0.5


def extract_seed_triples(docs: Sequence[Document]) -> List[RawTriple]:
    """Explicit triples from categories and relation-bearing infobox keys."""
    seeds: List[RawTriple] = []
    conf = DEFAULT_CONFIDENCE["infobox"]
    for doc in docs:
        title = normalize_surface(doc.title)
        if not title:
            continue
        for category in doc.categories:
            cat = normalize_surface(category)
            if cat and cat != title:
                seeds.append(RawTriple(title, "Aff", cat, conf, "infobox"))
        for key, value in doc.infobox.items():
            mapped = INFOBOX_RELATION_KEYS.get(key.strip().lower().replace(" ", "_"))
            if mapped is None:
                continue
            rel, title_is_head = mapped
            val = normalize_surface(value)
            if not val or val == title:
                continue
            if title_is_head:
                seeds.append(RawTriple(title, rel, val, conf, "infobox"))
            else:
                seeds.append(RawTriple(val, rel, title, conf, "infobox"))
    return seeds


def _mention_surface(tokens: Sequence[str], span: Tuple[int, int]) -> str:
    return normalize_surface(" ".join(tokens[span[0] : span[1]]))


def extract_triples(
    docs: Sequence[Document],
    gazetteer: Gazetteer,
    tagger: Optional[CrfTagger] = None,
    classifier: Optional[RelationClassifier] = None,
    rules: Sequence[PatternRule] = (),
    threshold: float = CLASSIFIER_THRESHOLD,
) -> List[RawTriple]:
    """Run mention detection and relation prediction over every sentence.

    Mentions come from the gazetteer (and the tagger, when provided); pattern
    hits yield triples at pattern confidence, classifier predictions at their
    probability when it clears the threshold.
    """
    raw: List[RawTriple] = []
    seen: set = set()

    def emit(head: str, rel: str, tail: str, conf: float, prov: str) -> None:
        if head == tail:
            return
        key = (head, rel, tail, prov)
        if key in seen:
            return
        seen.add(key)
        raw.append(RawTriple(head, rel, tail, conf, prov))

    for doc in docs:
        for sent in doc_sentences(doc):
            tokens = [t.surface for t in sent.tokens]
            mentions = gazetteer.match_spans(tokens)
            if tagger is not None and hasattr(tagger, "model_"):
                from .tagger import bio_spans

                taken = {(m[0], m[1]) for m in mentions}
                for start, end, cls in bio_spans(tagger.predict([tokens])[0]):
                    if all(end <= s or start >= e for s, e in taken):
                        surface = _mention_surface(tokens, (start, end))
                        mentions.append((start, end, surface, cls))
                mentions.sort()
            if len(mentions) < 2:
                continue
            spans = [(m[0], m[1]) for m in mentions]
            surfaces = {(m[0], m[1]): m[2] for m in mentions}
            if rules:
                for e1, e2, label in match_patterns(tokens, mentions, rules):
                    rel, forward = split_directed(label)
                    head, tail = (surfaces[e1], surfaces[e2]) if forward else (surfaces[e2], surfaces[e1])
                    emit(head, rel, tail, DEFAULT_CONFIDENCE["pattern"], "pattern")
            if classifier is not None and hasattr(classifier, "weights_"):
                for a in range(len(spans)):
                    for b in range(a + 1, len(spans)):
                        if spans[a][1] > spans[b][0]:
                            continue
                        label, probs = classifier.predict_proba_one(tokens, spans[a], spans[b])
                        if label == NA or probs[label] < threshold:
                            continue
                        rel, forward = split_directed(label)
                        head, tail = (
                            (surfaces[spans[a]], surfaces[spans[b]])
                            if forward
                            else (surfaces[spans[b]], surfaces[spans[a]])
                        )
                        emit(head, rel, tail, probs[label], "classifier")
    return raw


def document_attributes(docs: Sequence[Document]) -> Dict[str, Dict[str, str]]:
    """Per-title attribute map carried onto the fused entities."""
    attrs: Dict[str, Dict[str, str]] = {}
    for doc in docs:
        title = normalize_surface(doc.title)
        if not title:
            continue
        a: Dict[str, str] = {"source_doc": doc.id}
        if doc.categories:
            a["categories"] = "; ".join(doc.categories)
        for k, v in doc.infobox.items():
            a[f"infobox.{k}"] = v
        if doc.formulas:
            a["formulas"] = " ; ".join(doc.formulas)
        if doc.links:
            a["links"] = "; ".join(doc.links)
        attrs[title] = a
    return attrs


def build_graph(
    docs: Sequence[Document],
    gazetteer: Gazetteer,
    raw_triples: Sequence[RawTriple],
    manual_triples: Sequence[RawTriple] = (),
) -> KnowledgeGraph:
    """Fuse raw triples (plus manual overrides) and assemble the graph."""
    entity_classes = {s: c for s, c in gazetteer.entries.items()}
    all_raw = list(raw_triples) + list(manual_triples)
    entities, triples = fuse(all_raw, entity_classes, document_attributes(docs))
    return KnowledgeGraph.build(entities, triples)
