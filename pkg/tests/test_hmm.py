import numpy as np
import pytest

from rawphone.errors import NoLegalPathError
from rawphone.hmm import build_duration_graph, decode_scores, hmm_decode

from oracles import hmm_enum_best_score, min_duration_sequences


def run_lengths(frame_labels):
    lengths = []
    current = 1
    for a, b in zip(frame_labels[:-1], frame_labels[1:]):
        if a == b:
            current += 1
        else:
            lengths.append(current)
            current = 1
    lengths.append(current)
    return lengths


class TestDurationGraph:
    def test_state_count(self):
        g = build_duration_graph(2, 3)
        assert g.num_states == 6

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            build_duration_graph(0, 3)
        with pytest.raises(ValueError):
            build_duration_graph(2, 0)


class TestDecodeScores:
    def test_three_frame_forced_choice(self):
        # T == D: only the two all-one-phoneme paths are legal
        log_e = np.array([[0.0, -10.0], [0.0, -10.0], [-1.0, 0.0]])
        result = decode_scores(log_e, build_duration_graph(2, 3))
        assert result.phonemes == [0]
        assert result.score == pytest.approx(-1.0)

    def test_uniform_scores_pick_smallest_phoneme(self):
        log_e = np.zeros((5, 3))
        result = decode_scores(log_e, build_duration_graph(3, 3))
        assert result.phonemes == [0]
        np.testing.assert_array_equal(result.frame_labels, np.zeros(5))

    def test_clean_two_segment_split(self):
        strong = np.log(0.98)
        weak = np.log(0.02)
        log_e = np.array([[strong, weak]] * 3 + [[weak, strong]] * 3)
        result = decode_scores(log_e, build_duration_graph(2, 3))
        assert result.phonemes == [0, 1]
        assert run_lengths(result.frame_labels) == [3, 3]
        # oracle: enumerate all min-duration segmentations of T=6
        assert result.score == hmm_enum_best_score(log_e, 2, 3)

    def test_too_short_sequence_raises(self):
        with pytest.raises(NoLegalPathError):
            decode_scores(np.zeros((2, 2)), build_duration_graph(2, 3))

    def test_single_phoneme_graph(self):
        log_e = np.random.default_rng(0).normal(size=(4, 1))
        result = decode_scores(log_e, build_duration_graph(1, 3))
        assert result.phonemes == [0]
        assert result.score == pytest.approx(log_e.sum())

    def test_min_duration_one_is_framewise_argmax(self):
        rng = np.random.default_rng(1)
        log_e = rng.normal(size=(9, 4))
        result = decode_scores(log_e, build_duration_graph(4, 1))
        np.testing.assert_array_equal(result.frame_labels, log_e.argmax(axis=1))

    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.default_rng(2)
        for _ in range(120):
            t = int(rng.integers(3, 10))
            k = int(rng.integers(1, 4))
            log_e = rng.normal(scale=2.0, size=(t, k))
            result = decode_scores(log_e, build_duration_graph(k, 3))
            assert result.score == hmm_enum_best_score(log_e, k, 3)
            assert min(run_lengths(result.frame_labels)) >= 3

    def test_every_segment_meets_min_duration(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            t = int(rng.integers(4, 40))
            k = int(rng.integers(2, 5))
            d = int(rng.integers(1, 4))
            if t < d:
                continue
            log_e = rng.normal(size=(t, k))
            result = decode_scores(log_e, build_duration_graph(k, d))
            assert min(run_lengths(result.frame_labels)) >= d
            # collapsed sequence matches the frame labels
            collapsed = [result.frame_labels[0]]
            for x in result.frame_labels[1:]:
                if x != collapsed[-1]:
                    collapsed.append(x)
            assert result.phonemes == [int(x) for x in collapsed]


class TestHmmDecode:
    def posterior_matrix(self, log_like):
        p = np.exp(log_like)
        return p / p.sum(axis=1, keepdims=True)

    def test_decodes_posteriors(self):
        rng = np.random.default_rng(4)
        p = self.posterior_matrix(rng.normal(size=(8, 3)))
        result = hmm_decode(p, build_duration_graph(3, 3))
        assert min(run_lengths(result.frame_labels)) >= 3

    def test_row_sum_validated(self):
        bad = np.full((6, 2), 0.6)
        with pytest.raises(ValueError, match="sums to"):
            hmm_decode(bad, build_duration_graph(2, 3))

    def test_negative_probability_rejected(self):
        bad = np.array([[1.2, -0.2]] * 6)
        with pytest.raises(ValueError, match="non-negative"):
            hmm_decode(bad, build_duration_graph(2, 3))

    def test_agrees_with_decode_scores(self):
        rng = np.random.default_rng(5)
        p = self.posterior_matrix(rng.normal(size=(10, 2)))
        via_posteriors = hmm_decode(p, build_duration_graph(2, 3))
        via_scores = decode_scores(np.log(p), build_duration_graph(2, 3))
        assert via_posteriors.phonemes == via_scores.phonemes


class TestOracleSanity:
    def test_sequence_counts_for_small_cases(self):
        # T=6, K=2, D=3: all-a, all-b, a^3 b^3, b^3 a^3
        assert len(min_duration_sequences(6, 2, 3)) == 4
        # T=3..5, K=2, D=3: only the two single-run sequences
        for t in (3, 4, 5):
            assert len(min_duration_sequences(t, 2, 3)) == 2
        assert min_duration_sequences(2, 2, 3) == []
