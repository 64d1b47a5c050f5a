"""Corpus ingestion: encyclopedia dumps to documents, sentences and tokens."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List

SENTENCE_TERMINATORS = {".", "!", "?", "。", "！", "？"}


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str
    tokens: tuple  # tuple of Token


@dataclass
class Document:
    id: str
    title: str = ""
    categories: List[str] = field(default_factory=list)
    abstract: str = ""
    body: str = ""
    infobox: Dict[str, str] = field(default_factory=dict)
    links: List[str] = field(default_factory=list)
    formulas: List[str] = field(default_factory=list)


class CorpusError(ValueError):
    pass


def ingest_corpus(path: str) -> List[Document]:
    """Read a documents.jsonl dump; one Document object per line, ids unique."""
    docs: List[Document] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON line: {e}") from e
            if not isinstance(obj, dict) or not obj.get("id"):
                raise CorpusError(f"{path}:{lineno}: document must be an object with a non-empty 'id'")
            doc_id = obj["id"]
            if doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            docs.append(
                Document(
                    id=doc_id,
                    title=obj.get("title", ""),
                    categories=list(obj.get("categories", [])),
                    abstract=obj.get("abstract", ""),
                    body=obj.get("body", ""),
                    infobox=dict(obj.get("infobox", {})),
                    links=list(obj.get("links", [])),
                    formulas=list(obj.get("formulas", [])),
                )
            )
    return docs


def split_sentences(text: str) -> List[str]:
    """Split on terminal punctuation followed by whitespace or end-of-text.

    Terminators stay attached to their sentence; empty sentences are dropped.
    """
    sentences: List[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in SENTENCE_TERMINATORS and (i + 1 == n or text[i + 1].isspace()):
            piece = text[start : i + 1].strip()
            if piece:
                sentences.append(piece)
            start = i + 1
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_word_char(ch: str) -> bool:
    # Latin letters and digits run together into one token; CJK is handled apart.
    return (ch.isalnum() or ch == "_") and not _is_cjk(ch)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0xF900 <= cp <= 0xFAFF
    )


def tokenize(sentence: str) -> List[Token]:
    """Runs of Latin letters/digits are one token; each CJK char and each
    punctuation char is its own token; whitespace only separates."""
    tokens: List[Token] = []
    i = 0
    n = len(sentence)
    while i < n:
        ch = sentence[i]
        if ch.isspace():
            i += 1
            continue
        if _is_cjk(ch):
            tokens.append(Token(ch, i, i + 1))
            i += 1
        elif _is_word_char(ch):
            j = i + 1
            while j < n and _is_word_char(sentence[j]):
                j += 1
            tokens.append(Token(sentence[i:j], i, j))
            i = j
        else:
            tokens.append(Token(ch, i, i + 1))
            i += 1
    return tokens


def token_surfaces(sentence: str) -> List[str]:
    return [t.surface for t in tokenize(sentence)]


def doc_sentences(doc: Document) -> List[Sentence]:
    """All sentences of a document (abstract then body), tokenized."""
    out: List[Sentence] = []
    idx = 0
    for text_field in (doc.abstract, doc.body):
        for raw in split_sentences(text_field):
            out.append(Sentence(doc.id, idx, raw, tuple(tokenize(raw))))
            idx += 1
    return out


def normalize_surface(s: str) -> str:
    """Case/whitespace normalization used for matching and alias identity."""
    return " ".join(unicodedata.normalize("NFKC", s).lower().split())


def mini_corpus_path() -> str:
    """Path of the bundled mini encyclopedia dump."""
    from importlib.resources import files

    return str(files("mathkg").joinpath("data/mini_corpus.jsonl"))
