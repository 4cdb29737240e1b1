"""Three-phase training pipeline.

Phase A fits the model to the author corpus; Phase B continues on the
ground-truth chunks that survive the contradiction filter; Phase C trains on
neutral-text chunks carrying stop words the author never used, extending the
usable vocabulary. One step = one window, batch size 1; the log records
windowed mean loss and its exponential (character-level perplexity).
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn
from .checkpoint import Checkpoint, save_checkpoint
from .config import TrainConfig
from .corpus import (
    TextChunk,
    build_vocab,
    candidate_extension_words,
    chunk_id,
    make_training_pairs,
    missing_words,
    normalize_text,
    select_neutral_chunks,
    split_chunks,
)
from .errors import DataError, NumericError
from .filtering import ChunkBin, FilterConfig, FilterResult, filter_corpus
from .nn.backend import active_backend
from .nn.params import init_params
from .optim import OptimConfig, OptimState, apply_update

logger = logging.getLogger(__name__)


@dataclass
class LogRow:
    window: int
    mean_loss: float
    mean_perplexity: float


class TrainingLog:
    """Windowed training curve; every row satisfies pp = exp(mean loss),
    computed with math.exp so the identity is bit-reproducible."""

    def __init__(self):
        self.rows = []

    def add(self, mean_loss: float) -> LogRow:
        row = LogRow(len(self.rows), float(mean_loss), math.exp(mean_loss))
        self.rows.append(row)
        return row

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("window,mean_loss,mean_perplexity\n")
            for r in self.rows:
                fh.write(f"{r.window},{r.mean_loss!r},{r.mean_perplexity!r}\n")

    @staticmethod
    def read_csv(path) -> "TrainingLog":
        log = TrainingLog()
        with open(path, encoding="utf-8") as fh:
            next(fh)  # header
            for line in fh:
                _, loss, pp = line.rstrip("\n").split(",")
                row = LogRow(len(log.rows), float(loss), float(pp))
                log.rows.append(row)
        return log


def train_step(params, pair, state: OptimState, ocfg: OptimConfig) -> float:
    """One forward/backward/update on a single training pair.

    Returns the pre-update loss. Divergence (non-finite loss or gradients)
    raises before any parameter is touched, so the caller still holds the
    last good model.
    """
    trace = nn.forward(params, pair.window)
    loss = nn.cross_entropy(trace.probs, pair.target)
    if not np.isfinite(loss):
        raise NumericError("divergence detected: non-finite loss")
    grads = nn.bptt_backward(trace, pair.target, params)
    apply_update(params, grads, state, ocfg)
    return loss


def _pairs_from_chunks(chunks, vocab, cfg: TrainConfig):
    pairs = []
    for chunk in chunks:
        try:
            pairs.extend(make_training_pairs(chunk.text, vocab, cfg.seq_len, cfg.stride))
        except DataError as exc:
            logger.warning("skipping chunk %s: %s", chunk.id, exc)
    return pairs


def run_phase(params, chunks, steps: int, cfg: TrainConfig, state: OptimState,
              log: TrainingLog, vocab, ocfg: OptimConfig = None,
              loss_dump: list = None, stop_below_pp: float = None) -> int:
    """Train for `steps` windows drawn from `chunks` in order, cycling when
    the corpus is shorter than the step budget. Appends one log row per
    log_window steps (plus a final partial window). When stop_below_pp is
    set, the phase ends early once a log row's perplexity drops below it.
    loss_dump, when given, receives one (log_window_index, loss) tuple per
    step so window means can be recomputed externally. Returns the number of
    steps actually taken."""
    if steps == 0:
        return 0
    ocfg = ocfg or cfg.optim
    pairs = _pairs_from_chunks(chunks, vocab, cfg)
    if not pairs:
        logger.warning("phase has no usable training pairs; skipping")
        return 0
    window_losses = []
    taken = 0
    for step in range(steps):
        pair = pairs[step % len(pairs)]
        loss = train_step(params, pair, state, ocfg)
        taken += 1
        if loss_dump is not None:
            loss_dump.append((len(log.rows), loss))
        window_losses.append(loss)
        if len(window_losses) == cfg.log_window:
            row = log.add(float(np.mean(window_losses)))
            window_losses.clear()
            if stop_below_pp is not None and row.mean_perplexity < stop_below_pp:
                return taken
    if window_losses:
        log.add(float(np.mean(window_losses)))
    return taken


@dataclass
class PipelineResult:
    checkpoint: Checkpoint
    log: TrainingLog
    filter_result: FilterResult = None
    extension_chunks: list = field(default_factory=list)
    extension_not_found: list = field(default_factory=list)
    steps_taken: dict = field(default_factory=dict)


def train_full_pipeline(author_text: str, ground_text: str = None,
                        neutral_text: str = None, dictionary=None, stopwords=None,
                        provider=None, cfg: TrainConfig = None,
                        fcfg: FilterConfig = None, bin: ChunkBin = None,
                        loss_dump: list = None, vocab_extra_text: str = None,
                        abort_path=None) -> PipelineResult:
    """Run phases A/B/C and assemble the checkpoint.

    The vocabulary is built over the union of all corpora up front, so the
    later phases never meet an unknown character; vocab_extra_text widens it
    further (e.g. to cover a known evaluation text) without being trained
    on. Phase B trains only on filter-accepted chunks; an empty accepted set
    skips the phase with a warning. On numeric divergence the last good
    parameters are checkpointed to abort_path (when given) before the error
    propagates. Deterministic for fixed (texts, config, provider, seed).
    """
    cfg = cfg or TrainConfig()
    if not author_text:
        raise DataError("empty corpus: author corpus is required")
    if cfg.normalize:
        author_text = normalize_text(author_text)
        ground_text = normalize_text(ground_text) if ground_text else ground_text
        neutral_text = normalize_text(neutral_text) if neutral_text else neutral_text
        vocab_extra_text = normalize_text(vocab_extra_text) if vocab_extra_text else vocab_extra_text

    ground_chunks = []
    if ground_text:
        ground_chunks = split_chunks(
            ground_text, cfg.ground_chunk_len, "ground_truth", min_len=cfg.seq_len + 1
        )
    extension_chunks, not_found = [], []
    if neutral_text and dictionary is not None and stopwords is not None:
        candidates = candidate_extension_words(missing_words(dictionary, author_text), stopwords)
        extension_chunks, not_found = select_neutral_chunks(
            neutral_text, candidates, cfg.neutral_chunk_len, cfg.max_per_word
        )

    union = author_text + (ground_text or "") + (neutral_text or "")
    vocab = build_vocab(union + (vocab_extra_text or ""))
    pad_char = _most_frequent_char(union)

    params = init_params(cfg.architecture, cfg.hidden, vocab.size, cfg.seed)
    state = OptimState(params, cfg.optim.algorithm)
    log = TrainingLog()
    steps_taken = {}

    filter_result = None
    try:
        author_chunk = TextChunk(text=author_text, source="author")
        steps_taken["author"] = run_phase(
            params, [author_chunk], cfg.steps_author, cfg, state, log, vocab,
            loss_dump=loss_dump,
        )

        if ground_chunks and cfg.steps_ground > 0:
            provider = provider or _default_provider()
            fcfg = fcfg or FilterConfig()
            bin = bin if bin is not None else ChunkBin()
            premises = split_chunks(author_text, cfg.author_chunk_len, "author")
            filter_result = filter_corpus(ground_chunks, premises, provider, fcfg, bin)
            if filter_result.accepted:
                ocfg = cfg.optim if cfg.lr_ground is None else replace(cfg.optim, learning_rate=cfg.lr_ground)
                steps_taken["ground"] = run_phase(
                    params, filter_result.accepted, cfg.steps_ground, cfg, state, log,
                    vocab, ocfg=ocfg, loss_dump=loss_dump,
                )
            else:
                logger.warning("no ground-truth chunks accepted by the filter; phase skipped")
                steps_taken["ground"] = 0

        if extension_chunks and cfg.steps_neutral > 0:
            ocfg = cfg.optim if cfg.lr_neutral is None else replace(cfg.optim, learning_rate=cfg.lr_neutral)
            steps_taken["neutral"] = run_phase(
                params, extension_chunks, cfg.steps_neutral, cfg, state, log, vocab,
                ocfg=ocfg, loss_dump=loss_dump,
            )
    except NumericError:
        if abort_path is not None:
            # train_step raises before mutating, so params are the last good state
            aborted = Checkpoint(
                config=cfg, vocab=vocab, params=params, optim_state=state,
                step=state.t, pad_char=pad_char,
                provenance={"aborted": True, "steps_taken": steps_taken},
            )
            save_checkpoint(aborted, abort_path)
            logger.error("divergence detected; last good state saved to %s", abort_path)
        raise

    provenance = {
        "author_corpus_id": chunk_id(author_text),
        "ground_corpus_id": chunk_id(ground_text) if ground_text else None,
        "neutral_corpus_id": chunk_id(neutral_text) if neutral_text else None,
        "kernel_backend": active_backend(),
        "premise_role": "author",
        "steps_taken": steps_taken,
    }
    if filter_result is not None:
        provenance["filter"] = {
            "provider": provider.name,
            "threshold": fcfg.threshold,
            "accepted": len(filter_result.accepted),
            "rejected": len(filter_result.rejected),
            "undecided": len(filter_result.undecided),
            "provider_calls": filter_result.provider_calls,
        }
    if extension_chunks or not_found:
        provenance["extension"] = {
            "chunks": len(extension_chunks),
            "words_not_found": sorted(not_found),
        }

    ckpt = Checkpoint(
        config=cfg, vocab=vocab, params=params, optim_state=state,
        step=state.t, pad_char=pad_char, provenance=provenance,
    )
    return PipelineResult(
        checkpoint=ckpt, log=log, filter_result=filter_result,
        extension_chunks=extension_chunks, extension_not_found=not_found,
        steps_taken=steps_taken,
    )


def _default_provider():
    from .filtering import HeuristicProvider

    return HeuristicProvider()


def _most_frequent_char(text: str) -> str:
    from collections import Counter

    # Ties break by first appearance (Counter preserves insertion order).
    return Counter(text).most_common(1)[0][0]
