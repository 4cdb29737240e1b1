"""Contradiction filtering of ground-truth chunks against the author corpus.

A ground chunk is scanned against the author chunks in order; the first NLI
verdict whose contradiction probability reaches the threshold rejects the
chunk and records it in a persistent bin, so later runs skip the provider
entirely for chunks already judged contradictory. Chunks whose provider
calls keep failing are excluded conservatively ("undecided") rather than
trained on.

The premise is always the author chunk and the hypothesis the ground chunk;
NLI is asymmetric, so the order is pinned here and echoed in run reports.
"""
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .corpus import TextChunk, tokenize_words
from .errors import ConfigError, ProtocolError, ProviderError


@dataclass(frozen=True)
class NliVerdict:
    """Three-way MNLI probability distribution for an ordered text pair."""

    contradiction: float
    neutral: float
    entailment: float

    def __post_init__(self):
        vals = (self.contradiction, self.neutral, self.entailment)
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise ProtocolError(f"verdict components outside [0, 1]: {vals}")
        if abs(sum(vals) - 1.0) > 1e-6:
            raise ProtocolError(f"verdict does not sum to 1: {vals}")

    @property
    def label(self) -> str:
        pairs = [
            ("contradiction", self.contradiction),
            ("neutral", self.neutral),
            ("entailment", self.entailment),
        ]
        return max(pairs, key=lambda kv: kv[1])[0]


class NliProvider:
    """Interface: classify an ordered (premise, hypothesis) pair."""

    name = "base"

    def classify(self, premise: str, hypothesis: str) -> NliVerdict:
        raise NotImplementedError

    def classify_batch(self, pairs):
        return [self.classify(p, h) for p, h in pairs]


# Fixed simplex points the heuristic provider emits.
_CONTRADICTION_POINT = NliVerdict(0.8, 0.1, 0.1)
_ENTAILMENT_POINT = NliVerdict(0.1, 0.1, 0.8)
_NEUTRAL_POINT = NliVerdict(0.1, 0.8, 0.1)

_NEGATIONS = ("not", "never", "no")

# Function words ignored when measuring content overlap.
_FUNCTION_WORDS = frozenset(
    """a an the is are was were be been being am of in on at to and or but it its
    this that these those with as for by from he she they we you i his her their
    our your him them us me has have had do does did will would shall should can
    could may might must there here then than so if while when where who whom
    which what""".split()
)


def _content_words(tokens):
    return {t for t in tokens if t not in _FUNCTION_WORDS and not _is_negation(t)}


def _is_negation(token: str) -> bool:
    return token in _NEGATIONS or token.endswith("n't")


def _negation_next_to_shared(tokens, shared) -> bool:
    for i, tok in enumerate(tokens):
        if _is_negation(tok):
            if i > 0 and tokens[i - 1] in shared:
                return True
            if i + 1 < len(tokens) and tokens[i + 1] in shared:
                return True
    return False


def heuristic_classify(premise: str, hypothesis: str) -> NliVerdict:
    """Deterministic lexical stand-in for a real MNLI model.

    Rule table (checked in order, first hit wins):
      contradiction: the sides share >= 30% of their content words and exactly
        one side has a negation marker (not/never/no/*n't) directly next to a
        shared content word;
      entailment: one side's full token set contains the other's;
      neutral: everything else.
    """
    if not premise or not hypothesis:
        raise ProviderError("premise and hypothesis must be non-empty")
    p_tokens = tokenize_words(premise)
    h_tokens = tokenize_words(hypothesis)
    p_content = _content_words(p_tokens)
    h_content = _content_words(h_tokens)
    shared = p_content & h_content
    smaller = min(len(p_content), len(h_content))
    overlap = len(shared) / smaller if smaller else 0.0
    if overlap >= 0.3:
        p_neg = _negation_next_to_shared(p_tokens, shared)
        h_neg = _negation_next_to_shared(h_tokens, shared)
        if p_neg != h_neg:
            return _CONTRADICTION_POINT
    p_set, h_set = set(p_tokens), set(h_tokens)
    if p_set and h_set and (p_set <= h_set or h_set <= p_set):
        return _ENTAILMENT_POINT
    return _NEUTRAL_POINT


class HeuristicProvider(NliProvider):
    """Offline provider backed by heuristic_classify."""

    name = "heuristic"

    def classify(self, premise: str, hypothesis: str) -> NliVerdict:
        return heuristic_classify(premise, hypothesis)


class RemoteProvider(NliProvider):
    """Client for the NLI microservice wire protocol.

    POST /classify {"premise","hypothesis"} -> {"contradiction","neutral",
    "entailment"}; POST /classify_batch {"pairs":[[p,h],...]} ->
    {"verdicts":[...]}; GET /health -> {"status","model"}.
    """

    name = "remote"

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.session = requests.Session()

    def _parse_verdict(self, obj) -> NliVerdict:
        try:
            verdict = NliVerdict(
                contradiction=float(obj["contradiction"]),
                neutral=float(obj["neutral"]),
                entailment=float(obj["entailment"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed verdict object: {str(obj)[:200]}") from exc
        # The service contract is looser (1e-4) than the local invariant.
        if abs(verdict.contradiction + verdict.neutral + verdict.entailment - 1.0) > 1e-4:
            raise ProtocolError(f"verdict probabilities do not sum to 1: {obj}")
        return verdict

    def _post(self, path: str, payload: dict) -> dict:
        try:
            resp = self.session.post(f"{self.endpoint}{path}", json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"NLI service unreachable at {self.endpoint}: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(
                f"NLI service returned HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response body: {resp.text[:200]}") from exc

    def classify(self, premise: str, hypothesis: str) -> NliVerdict:
        body = self._post("/classify", {"premise": premise, "hypothesis": hypothesis})
        return self._parse_verdict(body)

    def classify_batch(self, pairs):
        body = self._post("/classify_batch", {"pairs": [[p, h] for p, h in pairs]})
        verdicts = body.get("verdicts")
        if not isinstance(verdicts, list) or len(verdicts) != len(pairs):
            raise ProtocolError(f"batch response shape mismatch: {str(body)[:200]}")
        return [self._parse_verdict(v) for v in verdicts]

    def health(self) -> dict:
        try:
            resp = self.session.get(f"{self.endpoint}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"NLI service unreachable at {self.endpoint}: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"NLI service unhealthy: HTTP {resp.status_code}")
        return resp.json()


def make_provider(spec: str) -> NliProvider:
    """Build a provider from its config string: "heuristic" or "remote:<url>"."""
    if spec == "heuristic":
        return HeuristicProvider()
    m = re.fullmatch(r"remote:(.+)", spec)
    if m:
        return RemoteProvider(m.group(1))
    raise ConfigError(f"unknown provider spec {spec!r}; expected 'heuristic' or 'remote:<url>'")


class ChunkBin:
    """Persistent set of chunk ids judged contradictory.

    Append-only within a run. On disk: one 16-hex-digit id per line, sorted,
    `#` comment lines allowed, so two bins diff cleanly.
    """

    def __init__(self, ids=()):
        self.ids = set(ids)
        self._lock = threading.Lock()

    def __contains__(self, cid: str) -> bool:
        return cid in self.ids

    def __len__(self) -> int:
        return len(self.ids)

    def add(self, cid: str):
        with self._lock:
            self.ids.add(cid)

    @classmethod
    def load(cls, path) -> "ChunkBin":
        ids = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    ids.add(line)
        return cls(ids)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# contradiction bin: one chunk id per line\n")
            for cid in sorted(self.ids):
                fh.write(cid + "\n")


@dataclass
class FilterConfig:
    threshold: float = 0.5
    max_author_chunks: int = None
    bin_path: str = None
    retries: int = 2  # extra attempts per provider call
    parallelism: int = 4  # chunks classified concurrently

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.retries < 0 or self.parallelism < 1:
            raise ConfigError("retries must be >= 0 and parallelism >= 1")


@dataclass
class ChunkDecision:
    """Verdict trail for one ground chunk."""

    chunk_id: str
    verdict: str  # accepted | rejected | undecided
    provider_calls: int
    from_bin: bool
    matched_author_index: int = None
    contradiction_score: float = None
    error: str = None


@dataclass
class FilterResult:
    accepted: list
    rejected: list
    undecided: list
    decisions: list
    provider_calls: int = 0

    def decision_for(self, cid: str) -> ChunkDecision:
        for d in self.decisions:
            if d.chunk_id == cid:
                return d
        raise KeyError(cid)


def _classify_with_retry(provider, premise, hypothesis, retries):
    last = None
    for attempt in range(retries + 1):
        try:
            return provider.classify(premise, hypothesis)
        except ProviderError as exc:
            last = exc
            if attempt < retries:
                time.sleep(min(0.2 * (attempt + 1), 1.0))
    raise last


def _scan_chunk(chunk, author_chunks, provider, cfg, bin) -> ChunkDecision:
    if chunk.id in bin:
        return ChunkDecision(chunk.id, "rejected", 0, from_bin=True)
    premises = author_chunks
    if cfg.max_author_chunks is not None:
        premises = premises[: cfg.max_author_chunks]
    calls = 0
    for idx, author_chunk in enumerate(premises):
        try:
            verdict = _classify_with_retry(provider, author_chunk.text, chunk.text, cfg.retries)
        except ProviderError as exc:
            return ChunkDecision(chunk.id, "undecided", calls, from_bin=False, error=str(exc))
        calls += 1
        if verdict.contradiction >= cfg.threshold:
            bin.add(chunk.id)
            return ChunkDecision(
                chunk.id, "rejected", calls, from_bin=False,
                matched_author_index=idx, contradiction_score=verdict.contradiction,
            )
    return ChunkDecision(chunk.id, "accepted", calls, from_bin=False)


def is_contradicted(chunk: TextChunk, author_chunks, provider: NliProvider,
                    cfg: FilterConfig, bin: ChunkBin) -> bool:
    """Does this ground-truth chunk contradict the author corpus?

    Bin hits answer immediately with zero provider calls (the bin only ever
    holds rejected chunks). Otherwise scan author chunks in order and stop at
    the first contradiction probability >= threshold, binning the chunk.
    Raises ProviderError when the provider keeps failing.
    """
    if not author_chunks:
        raise ConfigError("author_chunks must be non-empty")
    decision = _scan_chunk(chunk, author_chunks, provider, cfg, bin)
    if decision.verdict == "undecided":
        raise ProviderError(decision.error)
    return decision.verdict == "rejected"


def filter_corpus(ground_chunks, author_chunks, provider: NliProvider,
                  cfg: FilterConfig, bin: ChunkBin) -> FilterResult:
    """Partition ground chunks into accepted / rejected / undecided.

    Input order is preserved in each part. Chunks are scanned concurrently
    (cfg.parallelism in flight); each chunk's own author scan is sequential
    and short-circuits. Provider failures after retries park the chunk in
    `undecided` instead of raising.
    """
    if not ground_chunks:
        return FilterResult([], [], [], [])
    if cfg.parallelism == 1 or len(ground_chunks) == 1:
        decisions = [_scan_chunk(c, author_chunks, provider, cfg, bin) for c in ground_chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            decisions = list(
                pool.map(lambda c: _scan_chunk(c, author_chunks, provider, cfg, bin), ground_chunks)
            )
    result = FilterResult([], [], [], decisions)
    for chunk, decision in zip(ground_chunks, decisions):
        result.provider_calls += decision.provider_calls
        if decision.verdict == "accepted":
            result.accepted.append(chunk)
        elif decision.verdict == "rejected":
            result.rejected.append(chunk)
        else:
            result.undecided.append(chunk)
    return result
