"""HTTP JSON API serving the graph, semantic search and faults analysis."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from threading import Lock
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from . import faults as faults_mod
from .embed import EmbeddingTable, load_table
from .faults import AnswerRecord, append_answer, build_fault_tree, compute_mastery, read_answers
from .graphstore import KnowledgeGraph, UnknownEntityError
from .search import NoTopicEntityError, answer_question

DEFAULT_PORT = 8750


@dataclass
class AppState:
    graph: KnowledgeGraph
    table: Optional[EmbeddingTable]
    answers_path: str
    hops: int = 2
    mix: float = 0.5
    decay: float = 0.5
    evidence_threshold: float = 0.25
    write_lock: Lock = field(default_factory=Lock)


def load_state(data_dir: str) -> AppState:
    graph = KnowledgeGraph.load(os.path.join(data_dir, "graph"))
    emb_path = os.path.join(data_dir, "embeddings.json")
    table = load_table(emb_path) if os.path.exists(emb_path) else None
    return AppState(graph, table, os.path.join(data_dir, "answers.jsonl"))


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="mathkg", version="0.1.0")
    app.state.mathkg = state

    @app.exception_handler(Exception)
    async def internal_error(_request: Request, exc: Exception):
        return _error(500, str(exc))

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "entities": len(state.graph.entities),
            "triples": len(state.graph.triples),
            "embeddings": state.table is not None,
        }

    @app.get("/api/entity/{entity_id}")
    def entity(entity_id: str):
        ent = state.graph.entities.get(entity_id)
        if ent is None:
            return _error(404, f"unknown entity {entity_id!r}")
        return {
            "canonical_id": ent.canonical_id,
            "names": sorted(ent.names),
            "entity_class": ent.entity_class,
            "attributes": {k: ent.attributes[k] for k in sorted(ent.attributes)},
            "neighbors": [
                {"relation": r, "direction": d, "neighbor": n}
                for r, d, n in state.graph.neighbors(entity_id)
            ],
        }

    @app.get("/api/subgraph")
    def subgraph(seed: str, k: int = Query(1, ge=0)):
        try:
            sub = state.graph.k_hop_subgraph([seed], k)
        except UnknownEntityError as e:
            return _error(404, str(e.args[0]))
        return {
            "entities": [
                {
                    "canonical_id": e.canonical_id,
                    "names": sorted(e.names),
                    "entity_class": e.entity_class,
                }
                for e in (sub.entities[i] for i in sorted(sub.entities))
            ],
            "triples": [
                {
                    "head": t.head,
                    "relation": t.relation,
                    "tail": t.tail,
                    "confidence": t.confidence,
                    "provenance": sorted(t.provenance),
                }
                for t in sub.triples
            ],
        }

    @app.get("/api/search")
    def search(
        q: str,
        k: int = Query(2, ge=1),
        mix: float = Query(0.5, ge=0.0, le=1.0, alias="lambda"),
        top: int = Query(10, ge=1),
    ):
        try:
            topic, results = answer_question(
                q, state.graph, state.table, k=k, mix=mix, top_n=top
            )
        except NoTopicEntityError as e:
            return _error(400, str(e))
        return {
            "topic": topic,
            "results": [
                {
                    "entity": r.entity,
                    "score": r.score,
                    "lexical_score": r.lexical_score,
                    "embedding_score": r.embedding_score,
                    "path": [
                        {"entity": e, "relation": rel, "direction": d}
                        for e, rel, d in r.path
                    ],
                }
                for r in results
            ],
        }

    @app.post("/api/answers")
    def post_answer(payload: dict):
        try:
            record = AnswerRecord(
                str(payload["student_id"]),
                str(payload["question_id"]),
                list(payload["knowledge_points"]),
                bool(payload["correct"]),
                int(payload.get("timestamp", 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            return _error(400, f"invalid answer record: {e}")
        unknown = [p for p in record.knowledge_points if p not in state.graph.entities]
        if unknown:
            return _error(400, f"unknown knowledge points: {unknown}")
        with state.write_lock:
            append_answer(record, state.answers_path)
        return {"ok": True}

    @app.get("/api/faults")
    def get_faults(student: str):
        records = (
            read_answers(state.answers_path)
            if os.path.exists(state.answers_path)
            else []
        )
        stats = compute_mastery(records, student)
        mastery = {
            point: {
                "correct": stats.correct(point),
                "incorrect": stats.incorrect(point),
                "status": stats.status(point),
            }
            for point in sorted(stats.counts)
        }
        trees = []
        for root in stats.failed_points():
            if root not in state.graph.entities:
                continue
            trees.append(
                build_fault_tree(
                    state.graph, stats, root, k=state.hops,
                    decay=state.decay, evidence_threshold=state.evidence_threshold,
                )
            )
        if trees:
            ranking = faults_mod.rank_fault_sources(trees)
            message = ""
        else:
            ranking = []
            message = "nothing to analyze"
        return {
            "student": student,
            "mastery": mastery,
            "trees": [t.to_json() for t in trees],
            "ranking": [{"entity": e, "score": s} for e, s in ranking],
            "message": message,
        }

    return app
