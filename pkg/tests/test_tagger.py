import itertools
import random

import pytest

from mathkg.distant import Gazetteer, KerExample, validate_bio
from mathkg.tagger import (
    BOS,
    TAGSET,
    CrfModel,
    CrfTagger,
    bio_spans,
    decode,
    evaluate_spans,
    extract_features,
    load_model,
    save_model,
    sequence_score,
    train,
    transition_allowed,
)


def brute_force_decode(model, tokens):
    """Exhaustive argmax oracle; ties to lexicographically smallest sequence."""
    best_seq, best_score = None, float("-inf")
    for seq in itertools.product(TAGSET, repeat=len(tokens)):
        score = sequence_score(model, tokens, seq)
        if score == float("-inf"):
            continue
        key = tuple(TAGSET.index(t) for t in seq)
        if score > best_score or (score == best_score and key < best_key):
            best_seq, best_score, best_key = list(seq), score, key
    return best_seq, best_score


def random_model(rng, tokens):
    feat_w = {}
    for pos in range(len(tokens)):
        for f in extract_features(tokens, pos):
            for tag in TAGSET:
                feat_w[(f, tag)] = rng.uniform(-1, 1)
    trans_w = {
        (a, b): rng.uniform(-1, 1) for a in TAGSET + (BOS,) for b in TAGSET
    }
    return CrfModel(feat_w, trans_w)


class TestFeatures:
    def test_singleton_includes_sentinels(self):
        feats = extract_features(["triangle"], 0)
        assert "w0=triangle" in feats
        assert "w-1=BOS" in feats
        assert "w+1=EOS" in feats

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            extract_features(["a"], 1)

    def test_exact_feature_multiset(self):
        feats = extract_features(["An", "isosceles", "triangle"], 1)
        assert sorted(feats) == sorted(
            [
                "w0=isosceles",
                "low=isosceles",
                "w-1=An",
                "w-2=BOS",
                "w+1=triangle",
                "w+2=EOS",
                "pre1=i", "suf1=s",
                "pre2=is", "suf2=es",
                "pre3=iso", "suf3=les",
            ]
        )

    def test_digit_and_gazetteer_flags(self):
        assert "isdigit" in extract_features(["42"], 0)
        gaz = Gazetteer()
        gaz.add("triangle", "CON", "title")
        assert "gaz=CON" in extract_features(["triangle"], 0, gaz)


class TestDecode:
    def test_empty(self):
        assert decode(CrfModel(), []) == []

    def test_all_zero_weights_tie_break(self):
        # all valid sequences tie at 0; B-CON is index 0 and always a legal
        # successor, so the lexicographically smallest optimum is all-B-CON
        assert decode(CrfModel(), ["a", "b", "c"]) == ["B-CON", "B-CON", "B-CON"]

    @pytest.mark.parametrize("trial", range(20))
    def test_matches_brute_force(self, trial):
        rng = random.Random(trial)
        tokens = [f"t{i}" for i in range(rng.randint(1, 6))]
        model = random_model(rng, tokens)
        got = decode(model, tokens)
        want, want_score = brute_force_decode(model, tokens)
        assert sequence_score(model, tokens, got) == want_score
        assert got == want

    @pytest.mark.parametrize("trial", range(20))
    def test_output_always_bio_wellformed(self, trial):
        rng = random.Random(1000 + trial)
        tokens = [f"t{i}" for i in range(rng.randint(1, 8))]
        model = random_model(rng, tokens)
        validate_bio(decode(model, tokens))

    def test_invalid_transitions_blocked(self):
        assert not transition_allowed("O", "I-CON")
        assert not transition_allowed("B-LEG", "I-CON")
        assert transition_allowed("B-CON", "I-CON")
        assert transition_allowed("I-CON", "I-CON")


class TestTrain:
    def test_empty_dataset_error(self):
        with pytest.raises(ValueError):
            CrfTagger().fit([])

    def test_singleton_memorized(self):
        ex = KerExample(
            ["Learning", "addition", "helps"], ["O", "B-CON", "O"]
        )
        model = train([ex], epochs=5, seed=0)
        assert decode(model, ex.tokens) == ex.tags

    def test_paper_sentence_recovered(self):
        tokens = "Learning addition helps us understand the definition of subtraction".split()
        tags = ["O", "B-CON", "O", "O", "O", "O", "O", "O", "B-CON"]
        dataset = [
            KerExample(tokens, tags),
            KerExample("A triangle has three sides".split(), ["O", "B-CON", "O", "O", "O"]),
            KerExample("Nothing here".split(), ["O", "O"]),
        ]
        model = train(dataset, epochs=10, seed=0)
        decoded = decode(model, tokens)
        assert bio_spans(decoded) == [(1, 2, "CON"), (8, 9, "CON")]

    def test_deterministic(self):
        dataset = [
            KerExample(["a", "b"], ["B-CON", "I-CON"]),
            KerExample(["c"], ["O"]),
        ]
        m1 = train(dataset, epochs=3, seed=5)
        m2 = train(dataset, epochs=3, seed=5)
        assert m1.feature_weights == m2.feature_weights
        assert m1.transition_weights == m2.transition_weights


class TestEvaluateSpans:
    def test_identity(self):
        gold = [KerExample(["a", "b"], ["B-CON", "I-CON"])]
        m = evaluate_spans(gold, [["B-CON", "I-CON"]])
        assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)

    def test_nothing_predicted(self):
        gold = [KerExample(["a"], ["B-CON"])]
        m = evaluate_spans(gold, [["O"]])
        assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)

    def test_half(self):
        gold = [KerExample(["a", "b", "c", "d"], ["B-CON", "O", "B-LEG", "O"])]
        m = evaluate_spans(gold, [["B-CON", "O", "O", "B-LEG"]])
        assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)

    def test_swap_symmetry(self):
        gold = [KerExample(["a", "b", "c"], ["B-CON", "O", "B-LEG"])]
        pred = [["B-CON", "B-CON", "O"]]
        m = evaluate_spans(gold, pred)
        swapped = evaluate_spans(
            [KerExample(["a", "b", "c"], pred[0])], [gold[0].tags]
        )
        assert m.precision == swapped.recall
        assert m.recall == swapped.precision
        assert m.f1 == swapped.f1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_spans([], [["O"]])


def test_model_json_roundtrip(tmp_path):
    dataset = [KerExample(["a", "b"], ["B-CON", "I-CON"]), KerExample(["x"], ["O"])]
    model = train(dataset, epochs=3, seed=1)
    path = str(tmp_path / "model.json")
    save_model(model, path)
    loaded = load_model(path)
    for ex in dataset:
        assert decode(loaded, ex.tokens) == decode(model, ex.tokens)
    save_model(loaded, str(tmp_path / "again.json"))
    assert (tmp_path / "model.json").read_bytes() == (tmp_path / "again.json").read_bytes()
