"""Knowledge fusion: alias resolution, triple dedup and confidence weighting."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from .corpus import normalize_surface
from .relations import RELATIONS, SYMMETRIC_RELATIONS, canonical_relation

logger = logging.getLogger(__name__)

# Trust ordering: explicit seeds > rules > distant supervision.
DEFAULT_CONFIDENCE = {"infobox": 0.9, "manual": 0.95, "pattern": 0.8}

EQU_EVIDENCE_THRESHOLD = 0.9


@dataclass
class KnowledgeEntity:
    canonical_id: str
    names: Set[str] = field(default_factory=set)
    entity_class: str = "CON"
    attributes: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.names = set(self.names) | {self.canonical_id}


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: str
    confidence: float = 1.0
    provenance: frozenset = frozenset()

    def __post_init__(self):
        if self.head == self.tail:
            raise ValueError(f"self-loop triple on {self.head!r}")
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")


@dataclass(frozen=True)
class RawTriple:
    """Pre-fusion triple over raw surfaces."""
    head: str
    relation: str
    tail: str
    confidence: float = 0.9
    provenance: str = "infobox"


class UnionFind:
    def __init__(self):
        self.parent: Dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smallest member as the root
            lo, hi = sorted((ra, rb))
            self.parent[hi] = lo

    def groups(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


def resolve_aliases(
    surfaces: Iterable[str], evidence: Iterable[Tuple[str, str]] = ()
) -> Dict[str, str]:
    """Union-find closure over evidence pairs plus normalized string identity.

    Returns surface -> canonical_id; the canonical id is the lexicographically
    smallest normalized member of each equivalence class.
    """
    uf = UnionFind()
    for s in surfaces:
        key = normalize_surface(s)
        if key:
            uf.union(key, key)
    for a, b in evidence:
        ka, kb = normalize_surface(a), normalize_surface(b)
        if ka and kb:
            uf.union(ka, kb)
    mapping: Dict[str, str] = {}
    for member in uf.parent:
        mapping[member] = uf.find(member)
    return mapping


def equ_evidence(raw: Sequence[RawTriple]) -> List[Tuple[str, str]]:
    """High-confidence equivalence triples feed alias evidence."""
    return [
        (t.head, t.tail)
        for t in raw
        if canonical_relation(t.relation) == "Equ" and t.confidence >= EQU_EVIDENCE_THRESHOLD
    ]


def merge_triples(raw: Sequence[Triple]) -> List[Triple]:
    """Collapse duplicates (max confidence, union provenance); store symmetric
    relations with head < tail; drop self-loops.  Output sorted."""
    merged: Dict[Tuple[str, str, str], Tuple[float, Set[str]]] = {}
    for t in raw:
        head, tail = t.head, t.tail
        if head == tail:
            continue
        if t.relation in SYMMETRIC_RELATIONS and head > tail:
            head, tail = tail, head
        key = (head, t.relation, tail)
        if key in merged:
            conf, prov = merged[key]
            merged[key] = (max(conf, t.confidence), prov | set(t.provenance))
        else:
            merged[key] = (t.confidence, set(t.provenance))
    return [
        Triple(h, r, tl, conf, frozenset(prov))
        for (h, r, tl), (conf, prov) in sorted(merged.items())
    ]


def fuse(
    raw_triples: Sequence[RawTriple],
    entity_classes: Dict[str, str] | None = None,
    entity_attrs: Dict[str, Dict[str, str]] | None = None,
) -> Tuple[List[KnowledgeEntity], List[Triple]]:
    """Full fusion: alias resolution over all endpoints, then triple merging."""
    entity_classes = entity_classes or {}
    entity_attrs = entity_attrs or {}
    surfaces = set()
    for t in raw_triples:
        surfaces.add(t.head)
        surfaces.add(t.tail)
    surfaces |= set(entity_classes)
    mapping = resolve_aliases(surfaces, equ_evidence(raw_triples))

    def canon(s: str) -> str:
        return mapping[normalize_surface(s)]

    entities: Dict[str, KnowledgeEntity] = {}
    for s in sorted(surfaces, key=normalize_surface):
        norm = normalize_surface(s)
        cid = mapping[norm]
        ent = entities.setdefault(cid, KnowledgeEntity(cid))
        ent.names.add(norm)
        cls = entity_classes.get(s)
        if cls:
            if ent.attributes.get("_class_set") and ent.entity_class != cls:
                logger.warning("entity class conflict on %s; resolving to CON", cid)
                ent.entity_class = "CON"
            else:
                ent.entity_class = cls
                ent.attributes["_class_set"] = "1"
        for k, v in entity_attrs.get(s, {}).items():
            ent.attributes.setdefault(k, v)
    for ent in entities.values():
        ent.attributes.pop("_class_set", None)

    pre: List[Triple] = []
    for t in raw_triples:
        head, tail = canon(t.head), canon(t.tail)
        if head == tail:
            continue
        pre.append(
            Triple(head, canonical_relation(t.relation), tail, t.confidence,
                   frozenset({t.provenance}))
        )
    triples = merge_triples(pre)
    return [entities[k] for k in sorted(entities)], triples


# ---------------------------------------------------------------------------
# File formats


def write_entities(entities: Sequence[KnowledgeEntity], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for e in sorted(entities, key=lambda x: x.canonical_id):
            obj = {
                "canonical_id": e.canonical_id,
                "names": sorted(e.names),
                "entity_class": e.entity_class,
                "attributes": {k: e.attributes[k] for k in sorted(e.attributes)},
            }
            f.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_entities(path: str) -> List[KnowledgeEntity]:
    out: List[KnowledgeEntity] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: malformed entity line: {e}") from e
            out.append(
                KnowledgeEntity(
                    obj["canonical_id"],
                    set(obj.get("names", [])),
                    obj.get("entity_class", "CON"),
                    dict(obj.get("attributes", {})),
                )
            )
    return out


def write_triples(triples: Sequence[Triple], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in sorted(triples, key=lambda x: (x.head, x.relation, x.tail)):
            f.write(
                f"{t.head}\t{t.relation}\t{t.tail}\t{t.confidence:.6g}\t"
                + ",".join(sorted(t.provenance))
                + "\n"
            )


def read_triples(path: str) -> List[Triple]:
    out: List[Triple] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            head, rel, tail, conf, prov = parts
            out.append(
                Triple(head, rel, tail, float(conf),
                       frozenset(p for p in prov.split(",") if p))
            )
    return out


def write_raw_triples(raw: Sequence[RawTriple], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in raw:
            f.write(f"{t.head}\t{t.relation}\t{t.tail}\t{t.confidence:.6g}\t{t.provenance}\n")


def read_raw_triples(path: str) -> List[RawTriple]:
    out: List[RawTriple] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            out.append(RawTriple(parts[0], parts[1], parts[2], float(parts[3]), parts[4]))
    return out
