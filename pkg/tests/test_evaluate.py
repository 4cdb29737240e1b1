import math

import numpy as np
import pytest

from stylo.config import TrainConfig
from stylo.corpus import WordList, build_vocab
from stylo.errors import DataError
from stylo.evaluate import (
    author_comparison,
    carve_chunks,
    checkpoint_perplexity,
    compare_architectures,
    non_dictionary_rate,
    perplexity,
)
from stylo.nn.params import init_params, zero_params

TEXT_A = ("the quiet forest keeps the old stone path, and the river carries the "
          "morning light. " * 40)
TEXT_B = ("unit four reports nominal output. sector nine logs a minor fault. " * 45)


class TestPerplexity:
    def test_uniform_model_scores_vocab_size(self):
        vocab = build_vocab(TEXT_A)
        params = zero_params("bilstm", 4, vocab.size)
        loss, pp = perplexity(params, vocab, 10, TEXT_A[:300])
        assert abs(loss - math.log(vocab.size)) < 1e-9
        assert abs(pp - vocab.size) < 1e-6

    def test_half_probability_fixture(self):
        # V=2 and zero params give exactly p=0.5 at every position
        text = "abababab" * 10
        vocab = build_vocab(text)
        params = zero_params("lstm_uni", 3, 2)
        loss, pp = perplexity(params, vocab, 4, text)
        assert abs(pp - 2.0) < 1e-9

    def test_matches_probability_dump_recomputation(self):
        vocab = build_vocab(TEXT_A)
        params = init_params("bilstm", 5, vocab.size, seed=2)
        dump = []
        loss, pp = perplexity(params, vocab, 8, TEXT_A[:200], prob_dump=dump)
        # oracle: recompute mean NLL from the dumped probabilities
        nll = [-math.log(p + 1e-12) for _, _, p in dump]
        assert loss == pytest.approx(sum(nll) / len(nll), abs=1e-12)
        assert pp == pytest.approx(math.exp(sum(nll) / len(nll)), rel=1e-12)

    def test_log_domain_equals_product_domain(self):
        # exp(mean NLL) must equal (prod p_i)^(-1/n) while the product
        # still fits in float64
        vocab = build_vocab(TEXT_A)
        params = init_params("bilstm", 4, vocab.size, seed=3)
        dump = []
        text = TEXT_A[:200]
        _, pp = perplexity(params, vocab, 25, text, prob_dump=dump)
        prod = 1.0
        for _, _, p in dump:
            prod *= p + 1e-12
        assert prod > 0.0
        pp_product = prod ** (-1.0 / len(dump))
        assert abs(pp - pp_product) / pp_product < 1e-9

    def test_too_short_text(self):
        vocab = build_vocab("ab")
        params = zero_params("rnn", 2, 2)
        with pytest.raises(DataError, match="too short"):
            perplexity(params, vocab, 10, "ababab")

    def test_position_count(self):
        vocab = build_vocab("ab")
        params = zero_params("rnn", 2, 2)
        dump = []
        perplexity(params, vocab, 4, "ab" * 20, prob_dump=dump)
        assert len(dump) == 40 - 4


class TestAuthorComparison:
    def test_identical_sides_no_wins(self):
        vocab = build_vocab(TEXT_A)
        params = init_params("bilstm", 4, vocab.size, seed=0)
        chunks = carve_chunks(TEXT_A, 3, 300)
        report = author_comparison(params, vocab, 10, chunks, chunks, 3)
        assert report.metadata["wins_same_author"] == 0  # strict inequality

    def test_row_identity(self):
        vocab = build_vocab(TEXT_A + TEXT_B)
        params = init_params("bilstm", 4, vocab.size, seed=1)
        report = author_comparison(params, vocab, 10, carve_chunks(TEXT_A, 2, 250),
                                   carve_chunks(TEXT_B, 2, 250), 2)
        for row in report.rows:
            assert row.perplexity == pytest.approx(math.exp(row.loss), rel=1e-12)

    def test_insufficient_chunks(self):
        vocab = build_vocab(TEXT_A)
        params = zero_params("rnn", 2, vocab.size)
        with pytest.raises(DataError):
            author_comparison(params, vocab, 10, ["abc" * 50], ["def" * 50], 2)


class TestCarveChunks:
    def test_disjoint_consecutive(self):
        chunks = carve_chunks("abcdefghij", 3, 3)
        assert chunks == ["abc", "def", "ghi"]

    def test_insufficient_text(self):
        with pytest.raises(DataError):
            carve_chunks("short", 2, 10)


class TestNonDictionaryRate:
    DICT = WordList(frozenset({"the", "cat"}), "dictionary")

    def test_one_of_three(self):
        rate = non_dictionary_rate("the qzx cat", self.DICT)
        assert rate == pytest.approx(100.0 / 3.0, abs=0.01)

    def test_all_known(self):
        assert non_dictionary_rate("the cat the cat", self.DICT) == 0.0

    def test_empty_text(self):
        assert non_dictionary_rate("... 123 !!!", self.DICT) == 0.0

    def test_punctuation_invariance(self):
        a = non_dictionary_rate("the, qzx cat.", self.DICT)
        b = non_dictionary_rate("the qzx; (cat)", self.DICT)
        assert a == b

    def test_empty_dictionary_rejected(self):
        with pytest.raises(DataError):
            non_dictionary_rate("text", WordList(frozenset(), "dictionary"))


class TestCompareArchitectures:
    def test_zero_budget_uniform(self):
        cfg = TrainConfig(seq_len=8, hidden=4, steps_author=0, steps_ground=0,
                          steps_neutral=0, log_window=10, neutral_chunk_len=20)
        report = compare_architectures(TEXT_A, TEXT_A[:300], cfg, seeds=(0,),
                                       architectures=("bilstm", "lstm_uni", "rnn"))
        v = len(set(TEXT_A))
        for row in report.rows:
            assert row.perplexity == pytest.approx(v, abs=1e-6)

    def test_report_shape_and_ranking(self):
        cfg = TrainConfig(seq_len=8, hidden=4, steps_author=30, steps_ground=0,
                          steps_neutral=0, log_window=10, neutral_chunk_len=20)
        report = compare_architectures(TEXT_A, TEXT_A[:200], cfg, seeds=(0, 1),
                                       architectures=("lstm_uni", "rnn"))
        assert len(report.rows) == 4
        assert set(report.metadata["ranking"]) == {"lstm_uni", "rnn"}


class TestCheckpointPerplexity:
    def test_wrapper_consistency(self):
        from stylo.train import train_full_pipeline

        cfg = TrainConfig(seq_len=8, hidden=4, steps_author=20, steps_ground=0,
                          steps_neutral=0, log_window=10, neutral_chunk_len=20)
        ckpt = train_full_pipeline(TEXT_A, cfg=cfg).checkpoint
        a = checkpoint_perplexity(ckpt, TEXT_A[:200])
        b = perplexity(ckpt.params, ckpt.vocab, 8, TEXT_A[:200])
        assert a == b
