import json
import os
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from stylo.corpus import TextChunk
from stylo.errors import ConfigError, ProtocolError, ProviderError
from stylo.filtering import (
    ChunkBin,
    FilterConfig,
    HeuristicProvider,
    NliProvider,
    NliVerdict,
    RemoteProvider,
    filter_corpus,
    heuristic_classify,
    is_contradicted,
    make_provider,
)

AUTHOR = [TextChunk(text=f"author chunk {i} about the quiet forest", source="author")
          for i in range(4)]


def ground(text):
    return TextChunk(text=text, source="ground_truth")


class StubProvider(NliProvider):
    """Configurable test provider that counts calls."""

    name = "stub"

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0
        self._lock = threading.Lock()

    def classify(self, premise, hypothesis):
        with self._lock:
            self.calls += 1
        return self.fn(premise, hypothesis)


def constant(c, n, e):
    return StubProvider(lambda p, h: NliVerdict(c, n, e))


class TestNliVerdict:
    def test_simplex_enforced(self):
        with pytest.raises(ProtocolError):
            NliVerdict(0.9, 0.2, 0.1)
        with pytest.raises(ProtocolError):
            NliVerdict(-0.1, 0.6, 0.5)

    def test_label(self):
        assert NliVerdict(0.7, 0.2, 0.1).label == "contradiction"
        assert NliVerdict(0.1, 0.2, 0.7).label == "entailment"


class TestHeuristic:
    def test_negation_contradiction(self):
        v = heuristic_classify("the sky is blue", "the sky is not blue")
        assert v.label == "contradiction"

    def test_no_overlap_neutral(self):
        v = heuristic_classify("the cat sat", "quantum flux rose")
        assert v.label == "neutral"

    def test_containment_entailment(self):
        v = heuristic_classify("the cat sat", "the cat sat on the mat")
        assert v.label == "entailment"

    def test_symmetric_negation_not_contradiction(self):
        # both sides negate: no one-sided clash
        v = heuristic_classify("the sky is not blue", "the sky is not blue")
        assert v.label != "contradiction"

    def test_nt_suffix_counts_as_negation(self):
        v = heuristic_classify("the river is patient", "the river isn't patient")
        assert v.label == "contradiction"

    def test_empty_inputs_rejected(self):
        with pytest.raises(ProviderError):
            heuristic_classify("", "something")

    def test_deterministic(self):
        a = heuristic_classify("the quiet forest waits", "the forest is not quiet")
        b = heuristic_classify("the quiet forest waits", "the forest is not quiet")
        assert a == b


class TestIsContradicted:
    def test_threshold_crossing_one_call(self):
        prov = constant(0.9, 0.05, 0.05)
        bin = ChunkBin()
        chunk = ground("some claim")
        assert is_contradicted(chunk, AUTHOR, prov, FilterConfig(threshold=0.5), bin)
        assert prov.calls == 1
        assert chunk.id in bin

    def test_never_contradicted_scans_all(self):
        prov = constant(0.05, 0.05, 0.9)
        bin = ChunkBin()
        chunk = ground("benign claim")
        assert not is_contradicted(chunk, AUTHOR, prov, FilterConfig(threshold=0.5), bin)
        assert prov.calls == len(AUTHOR)
        assert len(bin) == 0

    def test_binned_chunk_short_circuits(self):
        prov = constant(0.9, 0.05, 0.05)
        bin = ChunkBin()
        chunk = ground("claim")
        cfg = FilterConfig(threshold=0.5)
        assert is_contradicted(chunk, AUTHOR, prov, cfg, bin)
        calls_before = prov.calls
        assert is_contradicted(chunk, AUTHOR, prov, cfg, bin)
        assert prov.calls == calls_before  # zero provider calls on the rerun

    def test_max_author_chunks_cap(self):
        prov = constant(0.05, 0.05, 0.9)
        cfg = FilterConfig(threshold=0.5, max_author_chunks=2)
        assert not is_contradicted(ground("x"), AUTHOR, prov, cfg, ChunkBin())
        assert prov.calls == 2

    def test_empty_author_chunks_rejected(self):
        with pytest.raises(ConfigError):
            is_contradicted(ground("x"), [], constant(0.9, 0.05, 0.05),
                            FilterConfig(), ChunkBin())

    def test_provider_failure_raises_after_retries(self):
        def boom(p, h):
            raise ProviderError("service down")

        prov = StubProvider(boom)
        cfg = FilterConfig(retries=1)
        with pytest.raises(ProviderError):
            is_contradicted(ground("x"), AUTHOR, prov, cfg, ChunkBin())
        assert prov.calls == 2  # initial + 1 retry

    def test_retry_then_success(self):
        state = {"n": 0}

        def flaky(p, h):
            state["n"] += 1
            if state["n"] == 1:
                raise ProviderError("transient")
            return NliVerdict(0.05, 0.05, 0.9)

        prov = StubProvider(flaky)
        cfg = FilterConfig(retries=2)
        assert not is_contradicted(ground("x"), AUTHOR, prov, cfg, ChunkBin())


class TestFilterCorpus:
    def test_all_entailment_accepts_everything(self):
        chunks = [ground(f"claim {i}") for i in range(6)]
        res = filter_corpus(chunks, AUTHOR, constant(0.05, 0.05, 0.9),
                            FilterConfig(), ChunkBin())
        assert res.accepted == chunks
        assert res.rejected == [] and res.undecided == []

    def test_marker_stub_rejects_exactly_marked(self):
        def marker(p, h):
            if "XMARKERX" in h:
                return NliVerdict(1.0 - 1e-9, 1e-9, 0.0)
            return NliVerdict(0.0, 1e-9, 1.0 - 1e-9)

        chunks = [ground("plain one"), ground("bad XMARKERX two"), ground("plain three"),
                  ground("XMARKERX again"), ground("plain five")]
        res = filter_corpus(chunks, AUTHOR, StubProvider(marker), FilterConfig(), ChunkBin())
        assert [c.text for c in res.rejected] == ["bad XMARKERX two", "XMARKERX again"]
        assert [c.text for c in res.accepted] == ["plain one", "plain three", "plain five"]

    def test_partition_property_randomized(self):
        rng = np.random.default_rng(0)

        def noisy(p, h):
            r = rng.random()
            if r < 0.1:
                raise ProviderError("flaky")
            c = rng.random()
            rest = 1.0 - c
            return NliVerdict(c, rest / 2, rest / 2)

        chunks = [ground(f"c{i}") for i in range(30)]
        cfg = FilterConfig(retries=0, parallelism=1)
        res = filter_corpus(chunks, AUTHOR, StubProvider(noisy), cfg, ChunkBin())
        assert len(res.accepted) + len(res.rejected) + len(res.undecided) == len(chunks)
        assert set(c.id for c in res.accepted + res.rejected + res.undecided) == \
            set(c.id for c in chunks)

    def test_order_preserved(self):
        chunks = [ground(f"c{i}") for i in range(10)]
        res = filter_corpus(chunks, AUTHOR, constant(0.05, 0.05, 0.9),
                            FilterConfig(), ChunkBin())
        assert [c.id for c in res.accepted] == [c.id for c in chunks]

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(7)
        scores = {}

        def scored(p, h):
            key = h
            if key not in scores:
                c = float(rng.uniform(0, 1))
                scores[key] = c
            c = scores[key]
            return NliVerdict(c, (1 - c) / 2, (1 - c) / 2)

        chunks = [ground(f"chunk {i}") for i in range(25)]
        rejected = {}
        for t in (0.01, 0.5, 0.99):
            res = filter_corpus(chunks, AUTHOR, StubProvider(scored),
                                FilterConfig(threshold=t), ChunkBin())
            rejected[t] = {c.id for c in res.rejected}
        assert rejected[0.99] <= rejected[0.5] <= rejected[0.01]

    def test_parallel_equals_serial(self):
        def by_text(p, h):
            c = 0.9 if "reject" in h else 0.1
            return NliVerdict(c, (1 - c) / 2, (1 - c) / 2)

        chunks = [ground(f"{'reject' if i % 3 == 0 else 'keep'} {i}") for i in range(12)]
        serial = filter_corpus(chunks, AUTHOR, StubProvider(by_text),
                               FilterConfig(parallelism=1), ChunkBin())
        parallel = filter_corpus(chunks, AUTHOR, StubProvider(by_text),
                                 FilterConfig(parallelism=4), ChunkBin())
        assert [c.id for c in serial.rejected] == [c.id for c in parallel.rejected]
        assert [c.id for c in serial.accepted] == [c.id for c in parallel.accepted]

    def test_undecided_on_persistent_failure(self):
        def broken(p, h):
            raise ProviderError("down")

        chunks = [ground("a"), ground("b")]
        res = filter_corpus(chunks, AUTHOR, StubProvider(broken),
                            FilterConfig(retries=0), ChunkBin())
        assert res.undecided == chunks
        for d in res.decisions:
            assert d.verdict == "undecided" and d.error

    def test_call_budget_bound(self):
        prov = constant(0.05, 0.05, 0.9)
        chunks = [ground(f"c{i}") for i in range(5)]
        res = filter_corpus(chunks, AUTHOR, prov, FilterConfig(), ChunkBin())
        assert res.provider_calls <= len(chunks) * len(AUTHOR)
        assert prov.calls == res.provider_calls


class TestChunkBin:
    def test_save_load_identity(self, tmp_path):
        bin = ChunkBin({"00ff" * 4, "abcd" * 4})
        path = tmp_path / "bin.txt"
        bin.save(path)
        loaded = ChunkBin.load(path)
        assert loaded.ids == bin.ids

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "bin.txt"
        path.write_text("# comment\nabc123\n\n# another\ndef456\n")
        assert ChunkBin.load(path).ids == {"abc123", "def456"}

    def test_sorted_on_disk(self, tmp_path):
        bin = ChunkBin({"zz", "aa", "mm"})
        path = tmp_path / "bin.txt"
        bin.save(path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert lines == ["aa", "mm", "zz"]


class TestMakeProvider:
    def test_heuristic(self):
        assert isinstance(make_provider("heuristic"), HeuristicProvider)

    def test_remote(self):
        p = make_provider("remote:http://localhost:9999")
        assert isinstance(p, RemoteProvider)

    def test_unknown(self):
        with pytest.raises(ConfigError):
            make_provider("llm")


class _StubNliHandler(BaseHTTPRequestHandler):
    """Minimal wire-protocol peer for client testing."""

    behavior = "ok"

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/health":
            self._send(200, {"status": "ok", "model": "stub-mnli"})
        else:
            self._send(404, {"error": "nope"})

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        mode = type(self).behavior
        if mode == "http500":
            self._send(500, {"error": "boom"})
            return
        if mode == "malformed":
            self._send(200, {"something": "else"})
            return
        if mode == "nonsimplex":
            self._send(200, {"contradiction": 0.9, "neutral": 0.9, "entailment": 0.1})
            return
        if self.path == "/classify":
            self._send(200, self._verdict(body["premise"], body["hypothesis"]))
        elif self.path == "/classify_batch":
            verdicts = [self._verdict(p, h) for p, h in body["pairs"]]
            self._send(200, {"verdicts": verdicts})

    @staticmethod
    def _verdict(premise, hypothesis):
        c = 0.8 if "awake" in hypothesis else 0.1
        return {"contradiction": c, "neutral": (1 - c) / 2, "entailment": (1 - c) / 2}

    def _send(self, code, obj):
        payload = json.dumps(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubNliHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubNliHandler.behavior = "ok"
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestRemoteProvider:
    def test_health_round_trip(self, stub_server):
        prov = RemoteProvider(stub_server)
        assert prov.health() == {"status": "ok", "model": "stub-mnli"}

    def test_classify(self, stub_server):
        prov = RemoteProvider(stub_server)
        v = prov.classify("A man is sleeping", "A man is awake")
        assert v.label == "contradiction"

    def test_batch_order_preserved(self, stub_server):
        prov = RemoteProvider(stub_server)
        out = prov.classify_batch([("x", "man awake"), ("y", "man asleep")])
        assert out[0].label == "contradiction"
        assert out[1].label != "contradiction"

    def test_malformed_response(self, stub_server):
        _StubNliHandler.behavior = "malformed"
        with pytest.raises(ProtocolError):
            RemoteProvider(stub_server).classify("a", "b")

    def test_nonsimplex_response(self, stub_server):
        _StubNliHandler.behavior = "nonsimplex"
        with pytest.raises(ProtocolError):
            RemoteProvider(stub_server).classify("a", "b")

    def test_http_error(self, stub_server):
        _StubNliHandler.behavior = "http500"
        with pytest.raises(ProviderError):
            RemoteProvider(stub_server).classify("a", "b")

    def test_unreachable(self):
        prov = RemoteProvider("http://127.0.0.1:1", timeout=0.2)
        with pytest.raises(ProviderError):
            prov.classify("a", "b")


class TestAgreementFixture:
    FIXTURE = os.path.join(os.path.dirname(__file__), "..", "fixtures", "nli_pairs_50.json")

    def test_heuristic_matches_golden_labels(self):
        # the committed fixture freezes the heuristic's verdicts; any rule
        # change must be deliberate and regenerate the file
        with open(self.FIXTURE) as fh:
            records = json.load(fh)
        assert len(records) == 50
        for rec in records:
            got = heuristic_classify(rec["premise"], rec["hypothesis"]).label
            assert got == rec["heuristic_label"], rec

    def test_agreement_with_live_service(self):
        # measured against a deployed MNLI service when one is configured
        endpoint = os.environ.get("STYLO_NLI_ENDPOINT")
        if not endpoint:
            pytest.skip("STYLO_NLI_ENDPOINT not set; agreement run needs a live service")
        with open(self.FIXTURE) as fh:
            records = json.load(fh)
        remote = RemoteProvider(endpoint)
        agree = sum(
            1 for rec in records
            if remote.classify(rec["premise"], rec["hypothesis"]).label
            == rec["heuristic_label"]
        )
        assert agree / len(records) >= 0.70
