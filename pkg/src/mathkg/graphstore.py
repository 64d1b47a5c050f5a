"""Directed multigraph of entities and triples with BFS queries and flat-file
persistence (entities.jsonl + triples.tsv + manifest.json)."""

from __future__ import annotations

import json
import os
from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .fusion import (
    KnowledgeEntity,
    Triple,
    read_entities,
    read_triples,
    write_entities,
    write_triples,
)
from .relations import RELATIONS, SYMMETRIC_RELATIONS

FWD = "->"
REV = "<-"


class UnknownEntityError(KeyError):
    pass


class KnowledgeGraph:
    def __init__(self):
        self.entities: Dict[str, KnowledgeEntity] = {}
        self._triples: Dict[Tuple[str, str, str], Triple] = {}

    # -- construction -------------------------------------------------------

    def add_entity(self, entity: KnowledgeEntity) -> None:
        """Upsert: merge names and attributes into any existing entity."""
        existing = self.entities.get(entity.canonical_id)
        if existing is None:
            self.entities[entity.canonical_id] = KnowledgeEntity(
                entity.canonical_id, set(entity.names), entity.entity_class,
                dict(entity.attributes),
            )
        else:
            existing.names |= entity.names
            for k, v in entity.attributes.items():
                existing.attributes.setdefault(k, v)

    def add_triple(self, triple: Triple) -> None:
        for endpoint in (triple.head, triple.tail):
            if endpoint not in self.entities:
                raise UnknownEntityError(f"unknown entity {endpoint!r}")
        head, tail = triple.head, triple.tail
        if triple.relation in SYMMETRIC_RELATIONS and head > tail:
            head, tail = tail, head
        key = (head, triple.relation, tail)
        existing = self._triples.get(key)
        if existing is None:
            self._triples[key] = Triple(head, triple.relation, tail,
                                        triple.confidence, triple.provenance)
        else:
            self._triples[key] = Triple(
                head, triple.relation, tail,
                max(existing.confidence, triple.confidence),
                existing.provenance | triple.provenance,
            )

    @property
    def triples(self) -> List[Triple]:
        return [self._triples[k] for k in sorted(self._triples)]

    def neighbors(self, node: str) -> List[Tuple[str, str, str]]:
        """(relation, direction, neighbor) edges touching node, in the
        deterministic expansion order (relation, neighbor, direction)."""
        out: List[Tuple[str, str, str]] = []
        for (h, r, t) in self._triples:
            if h == node:
                out.append((r, FWD, t))
            if t == node:
                out.append((r, REV, h))
        out.sort(key=lambda e: (e[0], e[2], e[1]))
        return out

    # -- queries -------------------------------------------------------------

    def _require(self, *ids: str) -> None:
        for i in ids:
            if i not in self.entities:
                raise UnknownEntityError(f"unknown entity {i!r}")

    def k_hop_subgraph(self, seeds: Sequence[str], k: int) -> "KnowledgeGraph":
        """Multi-source BFS up to depth k (both directions); induced subgraph."""
        self._require(*seeds)
        if k < 0:
            raise ValueError("k must be >= 0")
        reached = set(seeds)
        frontier = list(seeds)
        for _ in range(k):
            nxt = []
            for node in frontier:
                for _rel, _d, nb in self.neighbors(node):
                    if nb not in reached:
                        reached.add(nb)
                        nxt.append(nb)
            frontier = nxt
        sub = KnowledgeGraph()
        for node in sorted(reached):
            sub.add_entity(self.entities[node])
        for key, triple in self._triples.items():
            if key[0] in reached and key[2] in reached:
                sub.add_triple(triple)
        return sub

    def bfs_tree(self, root: str) -> Dict[str, Tuple[Optional[str], int, Optional[Tuple[str, str]]]]:
        """BFS spanning tree: node -> (parent, depth, (relation, direction)).

        Neighbor expansion is ordered by (relation, neighbor id), so the tree
        is deterministic.
        """
        self._require(root)
        tree: Dict[str, Tuple[Optional[str], int, Optional[Tuple[str, str]]]] = {
            root: (None, 0, None)
        }
        queue = deque([root])
        while queue:
            node = queue.popleft()
            depth = tree[node][1]
            for rel, direction, nb in self.neighbors(node):
                if nb not in tree:
                    tree[nb] = (node, depth + 1, (rel, direction))
                    queue.append(nb)
        return tree

    def shortest_path(
        self, src: str, dst: str
    ) -> Optional[List[Tuple[str, str, str]]]:
        """Hop-count shortest path as (entity, relation, direction) steps, or
        None if unreachable.  Empty path when src == dst."""
        self._require(src, dst)
        if src == dst:
            return []
        tree = self.bfs_tree(src)
        if dst not in tree:
            return None
        steps: List[Tuple[str, str, str]] = []
        node = dst
        while node != src:
            parent, _depth, edge = tree[node]
            steps.append((node, edge[0], edge[1]))
            node = parent
        steps.reverse()
        return steps

    # -- persistence ---------------------------------------------------------

    def manifest(self) -> dict:
        per_relation = {r: 0 for r in RELATIONS}
        for (_h, r, _t) in self._triples:
            per_relation[r] += 1
        classes = {"CON": 0, "LEG": 0}
        for e in self.entities.values():
            classes[e.entity_class] = classes.get(e.entity_class, 0) + 1
        return {
            "entities": len(self.entities),
            "entity_classes": classes,
            "triples": len(self._triples),
            "triples_per_relation": per_relation,
        }

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        write_entities(list(self.entities.values()), os.path.join(directory, "entities.jsonl"))
        write_triples(self.triples, os.path.join(directory, "triples.tsv"))
        with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as f:
            json.dump(self.manifest(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, directory: str) -> "KnowledgeGraph":
        graph = cls()
        epath = os.path.join(directory, "entities.jsonl")
        tpath = os.path.join(directory, "triples.tsv")
        if os.path.exists(epath):
            for e in read_entities(epath):
                graph.add_entity(e)
        if os.path.exists(tpath):
            for t in read_triples(tpath):
                graph.add_triple(t)
        return graph

    @classmethod
    def build(cls, entities: Iterable[KnowledgeEntity], triples: Iterable[Triple]) -> "KnowledgeGraph":
        graph = cls()
        for e in entities:
            graph.add_entity(e)
        for t in triples:
            graph.add_triple(t)
        return graph
