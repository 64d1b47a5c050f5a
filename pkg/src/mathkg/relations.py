"""Relation label space shared by dataset building, classification and fusion."""

from __future__ import annotations

RELATIONS = ("Dep", "Aff", "Equ", "Ant", "Syn", "Pro")
SYMMETRIC_RELATIONS = frozenset({"Equ", "Ant", "Syn"})

NA = "NA"

# Fixed 13-way label order: 12 directed labels then NA.  The arrow refers to
# textual order: "Dep->" means the earlier mention is the head.
DIRECTED_LABELS = tuple(f"{r}{arrow}" for r in RELATIONS for arrow in ("->", "<-"))
ALL_LABELS = DIRECTED_LABELS + (NA,)

RELATION_ALIASES = {
    "dep": "Dep",
    "dependencies": "Dep",
    "dependency": "Dep",
    "aff": "Aff",
    "affiliation": "Aff",
    "equ": "Equ",
    "equivalence": "Equ",
    "equivalent": "Equ",
    "ant": "Ant",
    "antisense": "Ant",
    "opposite": "Ant",
    "antonym": "Ant",
    "syn": "Syn",
    "synonyms": "Syn",
    "synonym": "Syn",
    "pro": "Pro",
    "has properties": "Pro",
    "has_properties": "Pro",
    "property": "Pro",
    "properties": "Pro",
}


def canonical_relation(name: str) -> str:
    """Map a relation name or alias to its canonical label, e.g. 'opposite' -> 'Ant'."""
    if name in RELATIONS:
        return name
    key = name.strip().lower()
    if key in RELATION_ALIASES:
        return RELATION_ALIASES[key]
    raise ValueError(f"unknown relation name {name!r}")


def directed(relation: str, forward: bool) -> str:
    rel = canonical_relation(relation)
    return f"{rel}{'->' if forward else '<-'}"


def split_directed(label: str) -> tuple[str, bool]:
    """Split a directed label into (relation, forward?)."""
    if label.endswith("->"):
        return canonical_relation(label[:-2]), True
    if label.endswith("<-"):
        return canonical_relation(label[:-2]), False
    raise ValueError(f"label {label!r} carries no direction")
