"""stylo: character-level Bi-LSTM language modeling of an author's style.

Trains on an author corpus, augments with ground-truth text screened by an
NLI contradiction check, extends the usable vocabulary through neutral-text
chunks, and generates/evaluates continuations from a prompt.
"""
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig, TrainConfig, load_run_config
from .corpus import (
    TextChunk,
    TrainingPair,
    Vocabulary,
    WordList,
    build_vocab,
    decode,
    encode,
    make_training_pairs,
    normalize_text,
    one_hot,
    tokenize_words,
)
from .errors import (
    ConfigError,
    DataError,
    IntegrityError,
    NumericError,
    ProtocolError,
    ProviderError,
    StyloError,
)
from .filtering import (
    ChunkBin,
    FilterConfig,
    HeuristicProvider,
    NliProvider,
    NliVerdict,
    RemoteProvider,
    filter_corpus,
    is_contradicted,
    make_provider,
)
from .generate import SamplingConfig, generate
from .nn.backend import active_backend
from .optim import OptimConfig, OptimState, adam_step, clip_gradients, gradient_check
from .train import TrainingLog, run_phase, train_full_pipeline, train_step

__version__ = "0.1.0"
