"""Text ingestion and character-level corpus utilities.

Covers vocabulary construction, encoding, training-window extraction, text
chunking, and the vocabulary-extension procedure (dictionary words the author
never used, narrowed to stop words, located in neutral text).

All functions here are pure; nothing keeps mutable state.
"""
import re
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

# 64-bit FNV-1a over the UTF-8 bytes of the chunk text. Chunk identity must be
# stable across runs and platforms, so the hash is fixed here and must not
# change: the contradiction bin stores these ids on disk.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF

_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*", re.UNICODE)


def chunk_id(text: str) -> str:
    """Content hash of a chunk: 16 hex digits, FNV-1a 64 over UTF-8 bytes."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    return f"{h:016x}"


class Vocabulary:
    """Bijective character <-> id map in first-appearance order.

    Built once from the combined training text; every text the model ever
    sees must be covered (unknown characters are an error at encode time).
    """

    def __init__(self, chars):
        self.chars = list(chars)
        self.index_of = {ch: i for i, ch in enumerate(self.chars)}
        if len(self.index_of) != len(self.chars):
            raise DataError("vocabulary contains duplicate characters")

    @property
    def size(self) -> int:
        return len(self.chars)

    def __len__(self) -> int:
        return len(self.chars)

    def __contains__(self, ch) -> bool:
        return ch in self.index_of

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.chars == other.chars

    def id(self, ch: str) -> int:
        return self.index_of[ch]

    def char(self, i: int) -> str:
        return self.chars[i]


def build_vocab(text: str) -> Vocabulary:
    """Distinct characters of `text` in first-appearance order."""
    if not text:
        raise DataError("empty corpus")
    return Vocabulary(dict.fromkeys(text))


def encode(text: str, vocab: Vocabulary) -> np.ndarray:
    """Map text to an int64 id array; rejects out-of-vocabulary characters."""
    index = vocab.index_of
    try:
        return np.array([index[ch] for ch in text], dtype=np.int64)
    except KeyError:
        for i, ch in enumerate(text):
            if ch not in index:
                byte_off = len(text[:i].encode("utf-8"))
                raise DataError(
                    f"character {ch!r} at byte offset {byte_off} is not in the vocabulary"
                ) from None
        raise


def decode(ids, vocab: Vocabulary) -> str:
    chars = vocab.chars
    return "".join(chars[int(i)] for i in ids)


def one_hot(char_id: int, vocab_size: int) -> np.ndarray:
    """Unit basis vector of length `vocab_size` with a 1 at `char_id`."""
    if not 0 <= char_id < vocab_size:
        raise DataError(f"id {char_id} out of range for vocabulary of size {vocab_size}")
    v = np.zeros(vocab_size, dtype=np.float64)
    v[char_id] = 1.0
    return v


def normalize_text(text: str) -> str:
    """Default corpus normalization: lowercase, drop non-printable characters,
    collapse whitespace runs to single spaces. Keeps the character vocabulary
    small without inventing padding symbols."""
    t = text.lower()
    t = "".join(" " if unicodedata.category(c).startswith("C") else c for c in t)
    return re.sub(r"\s+", " ", t).strip()


@dataclass
class TrainingPair:
    """A fixed-length character window and the id of the character after it."""

    window: np.ndarray  # int64, exactly seq_len ids
    target: int


def make_training_pairs(text: str, vocab: Vocabulary, seq_len: int, stride: int = 1):
    """All (window, next char) pairs of `text`, windows starting every `stride`.

    Pair i covers text[i*stride : i*stride + seq_len] with the following
    character as target; source order is preserved.
    """
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")
    if len(text) < seq_len + 1:
        raise DataError(
            f"chunk too short: need at least {seq_len + 1} characters, got {len(text)}"
        )
    ids = encode(text, vocab)
    pairs = []
    for start in range(0, len(text) - seq_len, stride):
        pairs.append(TrainingPair(window=ids[start : start + seq_len], target=int(ids[start + seq_len])))
    return pairs


@dataclass(frozen=True)
class TextChunk:
    """A piece of corpus text tagged with its origin.

    The id is a pure function of the text, so the same chunk keeps its
    identity across runs and across sources.
    """

    text: str
    source: str  # author | ground_truth | neutral
    id: str = field(default="")

    def __post_init__(self):
        object.__setattr__(self, "id", chunk_id(self.text))


def split_chunks(text: str, chunk_len: int, source: str, min_len: int = 1):
    """Consecutive chunks of `chunk_len` characters; a shorter tail is kept
    only when it has at least `min_len` characters."""
    if chunk_len < 1:
        raise DataError(f"chunk_len must be >= 1, got {chunk_len}")
    chunks = []
    for start in range(0, len(text), chunk_len):
        piece = text[start : start + chunk_len]
        if len(piece) >= min_len:
            chunks.append(TextChunk(text=piece, source=source))
    return chunks


@dataclass(frozen=True)
class WordList:
    """Deduplicated lowercase word set with its role (dictionary or stopwords)."""

    words: frozenset
    kind: str

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, w) -> bool:
        return w in self.words


def load_word_list(path, kind: str) -> WordList:
    """One word per line, lowercased; blank lines and `#` comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    return WordList(words=frozenset(words), kind=kind)


def tokenize_words(text: str):
    """Lowercased maximal runs of letters, keeping internal apostrophes
    ("cat's" is one token); everything else separates tokens."""
    return _WORD_RE.findall(text.lower())


def missing_words(dictionary: WordList, author_text: str) -> WordList:
    """Dictionary words that never occur as whole tokens in the author text."""
    if not dictionary.words:
        raise DataError("dictionary word list is empty")
    used = set(tokenize_words(author_text))
    return WordList(words=frozenset(dictionary.words - used), kind=dictionary.kind)


def candidate_extension_words(missing: WordList, stopwords: WordList) -> WordList:
    """Missing words the author plausibly knows: the stop words among them."""
    return WordList(words=frozenset(missing.words & stopwords.words), kind="stopwords")


def select_neutral_chunks(neutral_text: str, targets: WordList, chunk_len: int, max_per_word: int):
    """Locate training chunks for each target word inside the neutral text.

    For every target (scanned in sorted order for determinism) the first
    `max_per_word` whole-token occurrences each yield one chunk of exactly
    `chunk_len` characters around the occurrence. Duplicate chunks are
    returned once. Returns (chunks, words_not_found).
    """
    if chunk_len < 1:
        raise DataError(f"chunk_len must be >= 1, got {chunk_len}")
    chunks = []
    seen_ids = set()
    not_found = []
    lowered = neutral_text.lower()
    text_len = len(neutral_text)
    for word in sorted(targets.words):
        if text_len < chunk_len:
            not_found.append(word)
            continue
        taken = 0
        for m in re.finditer(rf"(?<![^\W\d_]){re.escape(word)}(?![^\W\d_'])", lowered):
            if taken >= max_per_word:
                break
            # Center the window on the occurrence, clamped to the text.
            start = min(max(0, m.start() - (chunk_len - len(word)) // 2), text_len - chunk_len)
            piece = neutral_text[start : start + chunk_len]
            if word not in tokenize_words(piece):
                continue
            taken += 1
            chunk = TextChunk(text=piece, source="neutral")
            if chunk.id not in seen_ids:
                seen_ids.add(chunk.id)
                chunks.append(chunk)
        if taken == 0:
            not_found.append(word)
    return chunks, not_found
