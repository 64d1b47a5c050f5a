import numpy as np
import pytest

from mathkg import distant, pipeline
from mathkg.corpus import ingest_corpus, mini_corpus_path
from mathkg.embed import EmbeddingTable
from mathkg.fusion import KnowledgeEntity, Triple
from mathkg.graphstore import KnowledgeGraph


@pytest.fixture(scope="session")
def mini_docs():
    return ingest_corpus(mini_corpus_path())


@pytest.fixture(scope="session")
def mini_gazetteer(mini_docs):
    return distant.recall_seed_entities(mini_docs, 8.0)


@pytest.fixture(scope="session")
def mini_seeds(mini_docs):
    return pipeline.extract_seed_triples(mini_docs)


def _entity(eid, names=(), cls="CON"):
    return KnowledgeEntity(eid, set(names) | {eid}, cls)


@pytest.fixture()
def fig2b_graph():
    """Fig 2(b)-shaped fixture: triangle --Pro--> circumradius plus context.

    The radius entity id is not the query phrase, so the longest graph-name
    match in "the circumscribed circle radius of a triangle" is "triangle".
    """
    g = KnowledgeGraph()
    for ent in [
        _entity("triangle"),
        _entity("circumradius"),
        _entity("isosceles triangle"),
        _entity("plane geometry"),
        _entity("pythagorean theorem", cls="LEG"),
        _entity("right triangle"),
    ]:
        g.add_entity(ent)
    g.add_triple(Triple("triangle", "Pro", "circumradius", 0.9, frozenset({"infobox"})))
    g.add_triple(Triple("isosceles triangle", "Aff", "triangle", 0.9, frozenset({"infobox"})))
    g.add_triple(Triple("triangle", "Aff", "plane geometry", 0.9, frozenset({"infobox"})))
    g.add_triple(Triple("right triangle", "Aff", "triangle", 0.9, frozenset({"infobox"})))
    g.add_triple(Triple("right triangle", "Dep", "pythagorean theorem", 0.9, frozenset({"pattern"})))
    return g


@pytest.fixture()
def fig2b_table(fig2b_graph):
    """Hand-built embeddings where triangle + Pro lands exactly on circumradius."""
    dim = 4
    rng = np.random.default_rng(7)
    ent = {}
    for eid in fig2b_graph.entities:
        v = rng.normal(size=dim)
        ent[eid] = v / np.linalg.norm(v)
    rel = {r: rng.normal(size=dim) * 0.1 for r in ("Pro", "Aff", "Dep")}
    ent["circumradius"] = ent["triangle"] + rel["Pro"]
    return EmbeddingTable(dim, ent, rel)
