import pytest

from mathkg.faults import (
    FAILED,
    MASTERED,
    UNOBSERVED,
    AnswerRecord,
    append_answer,
    build_fault_tree,
    compute_mastery,
    rank_fault_sources,
    read_answers,
)
from mathkg.fusion import KnowledgeEntity, Triple
from mathkg.graphstore import KnowledgeGraph

QE = "quadratic equation of one variable"
QF = "quadratic function"


def study_graph():
    g = KnowledgeGraph()
    for e in ["equation", QE, QF, "function", "algebra"]:
        g.add_entity(KnowledgeEntity(e))
    g.add_triple(Triple("equation", "Dep", QE))
    g.add_triple(Triple(QE, "Dep", QF))
    g.add_triple(Triple(QF, "Aff", "function"))
    g.add_triple(Triple(QE, "Aff", "algebra"))
    return g


def study_records():
    recs = []

    def add(points, correct, n):
        for i in range(n):
            recs.append(
                AnswerRecord("s1", f"q{len(recs)}", list(points), correct, timestamp=len(recs))
            )

    add([QF], True, 2)
    add([QF], False, 3)
    add([QE], True, 1)
    add([QE], False, 2)
    add(["function"], True, 2)
    add(["function"], False, 2)
    add(["equation"], True, 1)
    # noise from a different student must be ignored
    recs.append(AnswerRecord("s2", "qx", [QF], False))
    return recs


@pytest.fixture()
def stats():
    return compute_mastery(study_records(), "s1")


class TestMastery:
    def test_counts(self, stats):
        assert stats.counts[QF] == (2, 3)
        assert stats.counts[QE] == (1, 2)
        assert stats.counts["function"] == (2, 2)
        assert stats.counts["equation"] == (1, 0)

    def test_statuses(self, stats):
        assert stats.status(QF) == FAILED  # 3 incorrect > 2 correct
        assert stats.status("function") == MASTERED  # tie is not a failure
        assert stats.status("equation") == MASTERED
        assert stats.status("algebra") == UNOBSERVED

    def test_failure_rates(self, stats):
        assert stats.failure_rate(QF) == pytest.approx(0.6)
        assert stats.failure_rate(QE) == pytest.approx(2 / 3)
        assert stats.failure_rate("algebra") == 0.5  # unobserved prior
        assert stats.failure_rate("equation") == 0.0

    def test_failed_points_sorted(self, stats):
        assert stats.failed_points() == [QE, QF]

    def test_multi_point_question_increments_all(self):
        recs = [AnswerRecord("s1", "q0", ["a", "b"], False)]
        st = compute_mastery(recs, "s1")
        assert st.counts == {"a": (0, 1), "b": (0, 1)}

    def test_empty_points_rejected(self):
        with pytest.raises(ValueError):
            AnswerRecord("s1", "q0", [], True)


class TestFaultTree:
    def test_root_must_be_failed(self, stats):
        with pytest.raises(ValueError):
            build_fault_tree(study_graph(), stats, "function")

    def test_qf_tree_scores(self, stats):
        tree = build_fault_tree(study_graph(), stats, QF, k=2, decay=0.5)
        scores = {n: node.score for n, node in tree.nodes.items()}
        assert scores[QF] == pytest.approx(0.6)
        assert scores[QE] == pytest.approx((2 / 3) * 0.5)
        assert scores["function"] == pytest.approx(0.25)
        assert scores["algebra"] == pytest.approx(0.125)
        assert scores["equation"] == 0.0
        assert tree.nodes[QE].depth == 1
        assert tree.nodes["algebra"].depth == 2

    def test_qf_tree_evidence_paths(self, stats):
        tree = build_fault_tree(study_graph(), stats, QF, k=2, decay=0.5,
                                evidence_threshold=0.25)
        assert tree.evidence_paths == [
            [QF, "function"],
            [QF, QE],
            [QF],
        ]

    def test_hop_limit_truncates(self, stats):
        tree = build_fault_tree(study_graph(), stats, QF, k=1)
        assert set(tree.nodes) == {QF, QE, "function"}

    def test_to_json_nested(self, stats):
        tree = build_fault_tree(study_graph(), stats, QF, k=1)
        payload = tree.to_json()
        assert payload["root"]["id"] == QF
        child_ids = {c["id"] for c in payload["root"]["children"]}
        assert child_ids == {QE, "function"}


class TestRanking:
    def test_hand_computed_ranking(self, stats):
        g = study_graph()
        trees = [build_fault_tree(g, stats, r, k=2, decay=0.5)
                 for r in stats.failed_points()]
        ranking = rank_fault_sources(trees)
        assert [r[0] for r in ranking] == ["algebra", "function", "equation"]
        assert ranking[0][1] == pytest.approx(0.375)
        assert ranking[1][1] == pytest.approx(0.375)  # tie broken by id
        assert ranking[2][1] == 0.0

    def test_roots_excluded_across_trees(self, stats):
        g = study_graph()
        trees = [build_fault_tree(g, stats, r) for r in stats.failed_points()]
        ranked_ids = {r[0] for r in rank_fault_sources(trees)}
        assert QF not in ranked_ids and QE not in ranked_ids

    def test_empty_error(self):
        with pytest.raises(ValueError):
            rank_fault_sources([])


class TestAnswerLog:
    def test_roundtrip(self, tmp_path):
        p = str(tmp_path / "answers.jsonl")
        recs = study_records()
        for r in recs:
            append_answer(r, p)
        assert read_answers(p) == recs

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "answers.jsonl"
        p.write_text("{bad\n")
        with pytest.raises(ValueError, match="answers.jsonl:1"):
            read_answers(str(p))
