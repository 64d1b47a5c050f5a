import numpy as np
import pytest

from mathkg.corpus import token_surfaces
from mathkg.embed import EmbeddingTable
from mathkg.fusion import KnowledgeEntity, Triple
from mathkg.graphstore import FWD, REV, KnowledgeGraph
from mathkg.search import (
    NoTopicEntityError,
    answer_question,
    detect_topic_entity,
)

QUESTION = "the circumscribed circle radius of a triangle"


class TestTopicDetection:
    def test_longest_match_wins(self, fig2b_graph):
        assert detect_topic_entity("what is an isosceles triangle", fig2b_graph) == (
            "isosceles triangle"
        )

    def test_fig_question_topic(self, fig2b_graph):
        assert detect_topic_entity(QUESTION, fig2b_graph) == "triangle"

    def test_alias_matches(self):
        g = KnowledgeGraph()
        g.add_entity(KnowledgeEntity("rectangle", names={"rectangle", "orthogon"}))
        assert detect_topic_entity("area of an orthogon", g) == "rectangle"

    def test_leftmost_then_id_tie_break(self):
        g = KnowledgeGraph()
        g.add_entity(KnowledgeEntity("b-ent", names={"shared"}))
        g.add_entity(KnowledgeEntity("a-ent", names={"shared"}))
        assert detect_topic_entity("shared word", g) == "a-ent"

    def test_no_topic_raises(self, fig2b_graph):
        with pytest.raises(NoTopicEntityError):
            detect_topic_entity("completely unrelated words", fig2b_graph)

    def test_tagger_fallback(self, fig2b_graph):
        class StubTagger:
            def predict(self, sentences):
                return [["O", "B-CON", "I-CON"] for _ in sentences]

        # no graph name contains "circumscribed"/"circle", but the tagger span
        # overlaps nothing either -> still raises
        with pytest.raises(NoTopicEntityError):
            detect_topic_entity("about nothing known", fig2b_graph, tagger=StubTagger())

        g = KnowledgeGraph()
        g.add_entity(KnowledgeEntity("right triangle"))
        topic = detect_topic_entity("give me triangle facts", g, tagger=StubTagger())
        assert topic == "right triangle"


class TestAnswer:
    def test_fig_reproduction(self, fig2b_graph, fig2b_table):
        topic, results = answer_question(QUESTION, fig2b_graph, fig2b_table)
        assert topic == "triangle"
        assert results[0].entity == "circumradius"
        assert results[0].embedding_score == pytest.approx(1.0)
        assert results[0].path == [("circumradius", "Pro", FWD)]

    def test_results_exclude_topic_and_sorted(self, fig2b_graph, fig2b_table):
        topic, results = answer_question(QUESTION, fig2b_graph, fig2b_table)
        ids = [r.entity for r in results]
        assert topic not in ids
        scores = [r.score for r in results]
        assert scores == sorted(scores, reverse=True)

    def test_pure_lexical_mix(self, fig2b_graph):
        _, results = answer_question(
            "is an isosceles triangle in plane geometry", fig2b_graph, None, mix=1.0
        )
        by_id = {r.entity: r for r in results}
        # topic is "isosceles triangle"; "plane geometry" matches 2/2 name tokens
        assert results[0].entity == "plane geometry"
        assert results[0].score == 1.0
        assert by_id["circumradius"].score == 0.0
        for r in results:
            assert r.embedding_score == 0.0

    def test_mix_zero_is_pure_embedding(self, fig2b_graph, fig2b_table):
        _, results = answer_question(QUESTION, fig2b_graph, fig2b_table, mix=0.0)
        for r in results:
            assert r.score == pytest.approx(r.embedding_score)

    def test_top_n_truncates(self, fig2b_graph, fig2b_table):
        _, results = answer_question(QUESTION, fig2b_graph, fig2b_table, top_n=2)
        assert len(results) == 2

    def test_k_limits_recall(self, fig2b_graph, fig2b_table):
        _, results = answer_question(QUESTION, fig2b_graph, fig2b_table, k=1)
        ids = {r.entity for r in results}
        assert "pythagorean theorem" not in ids  # 2 hops from triangle
        _, results2 = answer_question(QUESTION, fig2b_graph, fig2b_table, k=2)
        assert "pythagorean theorem" in {r.entity for r in results2}

    def test_paths_have_signed_directions(self, fig2b_graph, fig2b_table):
        _, results = answer_question(QUESTION, fig2b_graph, fig2b_table)
        by_id = {r.entity: r for r in results}
        assert by_id["isosceles triangle"].path == [("isosceles triangle", "Aff", REV)]
        assert by_id["pythagorean theorem"].path == [
            ("right triangle", "Aff", REV),
            ("pythagorean theorem", "Dep", FWD),
        ]

    def test_invalid_mix_and_k(self, fig2b_graph):
        with pytest.raises(ValueError):
            answer_question(QUESTION, fig2b_graph, mix=1.5)
        with pytest.raises(ValueError):
            answer_question(QUESTION, fig2b_graph, k=0)

    def test_embedding_score_uses_signed_path(self, fig2b_graph, fig2b_table):
        # isosceles triangle is reached against the Aff edge, so the
        # translation subtracts the Aff vector
        _, results = answer_question(QUESTION, fig2b_graph, fig2b_table, mix=0.0)
        by_id = {r.entity: r for r in results}
        expected_dist = float(
            np.linalg.norm(
                fig2b_table.entity("triangle")
                - fig2b_table.relation("Aff")
                - fig2b_table.entity("isosceles triangle")
            )
        )
        assert by_id["isosceles triangle"].embedding_score == pytest.approx(
            1.0 / (1.0 + expected_dist)
        )
