"""Model evaluation: sliding-window perplexity, same-vs-other-author
comparisons, non-dictionary word rate, and the multi-architecture shootout.

Character-level perplexity here is exp(mean negative log likelihood in
nats), equivalently the inverse geometric-mean probability of the true
characters. A model that knows nothing scores exactly the vocabulary size.
"""
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .config import TrainConfig
from .corpus import WordList, encode, normalize_text, tokenize_words
from .errors import DataError
from .train import train_full_pipeline

EVAL_STRIDE = 1  # every position of the test text is predicted once


def perplexity(params, vocab, seq_len: int, text: str, prob_dump: list = None):
    """Mean NLL and perplexity of `text` under the model.

    Slides a seq_len window with stride 1; each position after the first
    window contributes -log p(true next char). When prob_dump is a list it
    receives (position, char, prob) rows for external recomputation.
    """
    if len(text) < seq_len + 1:
        raise DataError(
            f"text too short for evaluation: need at least {seq_len + 1} characters, "
            f"got {len(text)}"
        )
    ids = encode(text, vocab)
    total = 0.0
    count = 0
    for pos in range(seq_len, ids.shape[0], EVAL_STRIDE):
        probs = nn.forward(params, ids[pos - seq_len : pos]).probs
        p = float(probs[ids[pos]])
        total += -math.log(p + nn.LOG_EPS)
        count += 1
        if prob_dump is not None:
            prob_dump.append((pos, text[pos], p))
    loss = total / count
    return loss, math.exp(loss)


def checkpoint_perplexity(checkpoint, text: str, prob_dump: list = None):
    return perplexity(
        checkpoint.params, checkpoint.vocab, checkpoint.config.seq_len, text, prob_dump
    )


@dataclass
class ReportRow:
    experiment: int
    corpus: str
    loss: float
    perplexity: float
    non_dictionary_rate: float = None
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment", "corpus", "loss", "perplexity", "non_dictionary_rate"])
            for r in self.rows:
                writer.writerow([
                    r.experiment, r.corpus, repr(r.loss), repr(r.perplexity),
                    "" if r.non_dictionary_rate is None else repr(r.non_dictionary_rate),
                ])

    def write_json(self, path):
        payload = {
            "metadata": self.metadata,
            "rows": [
                {
                    "experiment": r.experiment,
                    "corpus": r.corpus,
                    "loss": r.loss,
                    "perplexity": r.perplexity,
                    "non_dictionary_rate": r.non_dictionary_rate,
                    **r.extra,
                }
                for r in self.rows
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def carve_chunks(text: str, n: int, size: int):
    """First n disjoint consecutive chunks of `size` characters."""
    if len(text) < n * size:
        raise DataError(
            f"need {n} disjoint chunks of {size} characters ({n * size} total), "
            f"text has {len(text)}"
        )
    return [text[i * size : (i + 1) * size] for i in range(n)]


def author_comparison(params, vocab, seq_len: int, same_author_chunks, other_author_chunks,
                      n_experiments: int) -> ExperimentReport:
    """Per-experiment perplexity on one same-author and one other-author
    chunk; a win means the same-author side scored strictly lower."""
    if len(same_author_chunks) < n_experiments or len(other_author_chunks) < n_experiments:
        raise DataError(
            f"need {n_experiments} chunks per side, got "
            f"{len(same_author_chunks)} same / {len(other_author_chunks)} other"
        )
    rows = []
    wins = 0
    for i in range(n_experiments):
        loss_same, pp_same = perplexity(params, vocab, seq_len, same_author_chunks[i])
        loss_other, pp_other = perplexity(params, vocab, seq_len, other_author_chunks[i])
        win = pp_same < pp_other
        wins += int(win)
        rows.append(ReportRow(i, "same_author", loss_same, pp_same, extra={"win": win}))
        rows.append(ReportRow(i, "other_author", loss_other, pp_other))
    return ExperimentReport(rows, metadata={"wins_same_author": wins, "experiments": n_experiments})


def non_dictionary_rate(text: str, dictionary: WordList) -> float:
    """Percentage of word tokens absent from the dictionary; 0 for no tokens."""
    if not dictionary.words:
        raise DataError("dictionary word list is empty")
    tokens = tokenize_words(text)
    if not tokens:
        return 0.0
    unknown = sum(1 for t in tokens if t not in dictionary.words)
    return 100.0 * unknown / len(tokens)


def compare_architectures(author_text: str, test_text: str, base_cfg: TrainConfig,
                          seeds=(0, 1, 2), architectures=("bilstm", "lstm_uni", "rnn")) -> ExperimentReport:
    """Train each architecture under the same budget and seed policy, then
    score held-out perplexity. Emits one row per (architecture, seed) plus a
    ranking by mean perplexity."""
    from dataclasses import replace

    rows = []
    means = {}
    for arch in architectures:
        pps = []
        for seed in seeds:
            cfg = replace(base_cfg, architecture=arch, seed=seed)
            result = train_full_pipeline(author_text, cfg=cfg, vocab_extra_text=test_text)
            ckpt = result.checkpoint
            eval_text = normalize_text(test_text) if cfg.normalize else test_text
            loss, pp = checkpoint_perplexity(ckpt, eval_text)
            pps.append(pp)
            rows.append(ReportRow(seed, arch, loss, pp))
        means[arch] = float(np.mean(pps))
    ranking = sorted(means, key=means.get)
    return ExperimentReport(
        rows,
        metadata={"mean_perplexity": means, "ranking": ranking, "seeds": list(seeds)},
    )
