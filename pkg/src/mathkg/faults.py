"""Faults analysis: mastery stats from answer logs, fault trees, source ranking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .graphstore import KnowledgeGraph

FAILED = "failed"
MASTERED = "mastered"
UNOBSERVED = "unobserved"

UNOBSERVED_PRIOR = 0.5
DEFAULT_DECAY = 0.5
DEFAULT_EVIDENCE_THRESHOLD = 0.25
DEFAULT_HOPS = 2


@dataclass
class AnswerRecord:
    student_id: str
    question_id: str
    knowledge_points: List[str]
    correct: bool
    timestamp: int = 0

    def __post_init__(self):
        if not self.knowledge_points:
            raise ValueError("knowledge_points must be non-empty")


@dataclass
class MasteryStats:
    counts: Dict[str, Tuple[int, int]] = field(default_factory=dict)  # id -> (correct, incorrect)

    def correct(self, point: str) -> int:
        return self.counts.get(point, (0, 0))[0]

    def incorrect(self, point: str) -> int:
        return self.counts.get(point, (0, 0))[1]

    def status(self, point: str) -> str:
        c, i = self.counts.get(point, (0, 0))
        if c == 0 and i == 0:
            return UNOBSERVED
        return FAILED if i > c else MASTERED

    def failed_points(self) -> List[str]:
        return sorted(p for p in self.counts if self.status(p) == FAILED)

    def failure_rate(self, point: str) -> float:
        c, i = self.counts.get(point, (0, 0))
        if c + i == 0:
            return UNOBSERVED_PRIOR
        return i / (c + i)


@dataclass
class FaultNode:
    id: str
    depth: int
    parent: Optional[str]
    failure_rate: float
    score: float
    children: List[str] = field(default_factory=list)


@dataclass
class FaultTree:
    root: str
    nodes: Dict[str, FaultNode]
    evidence_paths: List[List[str]]

    def path_to(self, node: str) -> List[str]:
        path = []
        cur: Optional[str] = node
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
        return list(reversed(path))

    def to_json(self) -> dict:
        def render(node_id: str) -> dict:
            node = self.nodes[node_id]
            return {
                "id": node.id,
                "depth": node.depth,
                "failure_rate": node.failure_rate,
                "score": node.score,
                "children": [render(c) for c in node.children],
            }

        return {"root": render(self.root), "evidence_paths": self.evidence_paths}


def compute_mastery(records: Sequence[AnswerRecord], student_id: str) -> MasteryStats:
    """Per knowledge point, count correct/incorrect answers; every listed
    point of a question gets the full increment."""
    stats = MasteryStats()
    for rec in records:
        if rec.student_id != student_id:
            continue
        for point in rec.knowledge_points:
            c, i = stats.counts.get(point, (0, 0))
            stats.counts[point] = (c + 1, i) if rec.correct else (c, i + 1)
    return stats


def build_fault_tree(
    graph: KnowledgeGraph,
    stats: MasteryStats,
    root: str,
    k: int = DEFAULT_HOPS,
    decay: float = DEFAULT_DECAY,
    evidence_threshold: float = DEFAULT_EVIDENCE_THRESHOLD,
) -> FaultTree:
    """BFS tree of the k-hop neighborhood of a failed knowledge point.

    node score = failure_rate * decay^depth; paths to nodes whose score
    reaches evidence_threshold are flagged as inference evidence.
    """
    if stats.status(root) != FAILED:
        raise ValueError(f"root {root!r} is not a failed knowledge point")
    if k < 1:
        raise ValueError("hop limit must be >= 1")
    if not 0 < decay <= 1:
        raise ValueError("decay must lie in (0, 1]")
    sub = graph.k_hop_subgraph([root], k)
    bfs = sub.bfs_tree(root)
    nodes: Dict[str, FaultNode] = {}
    for node_id, (parent, depth, _edge) in bfs.items():
        rate = stats.failure_rate(node_id)
        nodes[node_id] = FaultNode(node_id, depth, parent, rate, rate * decay**depth)
    for node_id in sorted(nodes):
        parent = nodes[node_id].parent
        if parent is not None:
            nodes[parent].children.append(node_id)
    tree = FaultTree(root, nodes, [])
    tree.evidence_paths = [
        tree.path_to(n) for n in sorted(nodes) if nodes[n].score >= evidence_threshold
    ]
    return tree


def rank_fault_sources(trees: Sequence[FaultTree]) -> List[Tuple[str, float]]:
    """Sum node scores across trees; tree roots are excluded from the ranking."""
    if not trees:
        raise ValueError("nothing to analyze: no fault trees")
    roots = {t.root for t in trees}
    totals: Dict[str, float] = {}
    for tree in trees:
        for node_id, node in tree.nodes.items():
            if node_id in roots:
                continue
            totals[node_id] = totals.get(node_id, 0.0) + node.score
    return sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))


def read_answers(path: str) -> List[AnswerRecord]:
    out: List[AnswerRecord] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: malformed answer line: {e}") from e
            out.append(
                AnswerRecord(
                    obj["student_id"],
                    obj["question_id"],
                    list(obj["knowledge_points"]),
                    bool(obj["correct"]),
                    int(obj.get("timestamp", 0)),
                )
            )
    return out


def append_answer(record: AnswerRecord, path: str) -> None:
    with open(path, "a", encoding="utf-8") as f:
        f.write(
            json.dumps(
                {
                    "student_id": record.student_id,
                    "question_id": record.question_id,
                    "knowledge_points": record.knowledge_points,
                    "correct": record.correct,
                    "timestamp": record.timestamp,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
            + "\n"
        )
        f.flush()
