import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, strategies as st

from tampers.errors import ProtocolError, TransportError
from tampers.victim import (
    Prediction,
    make_builtin_linear,
    make_builtin_softmax,
    make_remote,
)


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestPrediction:
    def test_argmax_first_on_ties(self):
        assert Prediction(probs=(0.5, 0.5)).label == 0
        assert Prediction(probs=(0.2, 0.4, 0.4)).label == 1


class TestBuiltinLinear:
    def test_hand_computed_logistic(self):
        handle = make_builtin_linear({"good": 2.0, "bad": -2.0}, bias=0.0)
        pred = handle.classify_batch(["good good"])[0]
        assert pred.probs[1] == pytest.approx(logistic(4.0))
        assert pred.probs[0] == pytest.approx(logistic(-4.0))

    def test_zero_logit(self):
        handle = make_builtin_linear({"good": 2.0}, bias=0.0)
        assert handle.classify_batch(["the the"])[0].probs == (0.5, 0.5)

    def test_single_weight_value(self):
        handle = make_builtin_linear({"good": 1.0})
        assert handle.classify_batch(["good"])[0].probs[1] == pytest.approx(
            0.7311, abs=1e-4
        )

    def test_monotone_in_token_count(self):
        handle = make_builtin_linear({"good": 1.0})
        p1 = handle.classify_batch(["good"])[0].probs[1]
        p2 = handle.classify_batch(["good good"])[0].probs[1]
        assert p2 > p1

    def test_degenerate_model(self):
        handle = make_builtin_linear({}, bias=0.0)
        assert handle.classify_batch(["anything at all"])[0].probs == (0.5, 0.5)

    def test_punctuation_ignored(self):
        handle = make_builtin_linear({"good": 1.0})
        a = handle.classify_batch(["good"])[0]
        b = handle.classify_batch(["Good!"])[0]
        assert a.probs == b.probs

    def test_duplicate_queries_identical(self):
        handle = make_builtin_linear({"good": 1.0})
        preds = handle.classify_batch(["good film"] * 4)
        assert len(set(p.probs for p in preds)) == 1


class TestBuiltinSoftmax:
    def test_probs_sum_to_one(self):
        handle = make_builtin_softmax({"x": (1.0, 0.0, -1.0)}, (0.0, 0.0, 0.0))
        pred = handle.classify_batch(["x x"])[0]
        assert sum(pred.probs) == pytest.approx(1.0)
        assert pred.label == 0


class TestLedger:
    def test_batch_accounting(self):
        handle = make_builtin_linear({})
        handle.classify_batch(["a", "b", "c"])
        assert handle.ledger.total_queries == 3

    def test_empty_batch_rejected(self):
        handle = make_builtin_linear({})
        with pytest.raises(ValueError):
            handle.classify_batch([])

    def test_clone_has_fresh_ledger(self):
        handle = make_builtin_linear({})
        handle.classify_batch(["a"])
        clone = handle.clone()
        assert clone.ledger.total_queries == 0
        assert handle.ledger.total_queries == 1

    @given(st.lists(st.integers(min_value=1, max_value=7), min_size=1, max_size=20))
    def test_total_equals_sum_of_batches(self, sizes):
        handle = make_builtin_linear({"good": 1.0})
        for size in sizes:
            handle.classify_batch(["good"] * size)
        assert handle.ledger.total_queries == sum(sizes)


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        self.send_response(404)
        self.end_headers()

    def do_POST(self):
        server = self.server
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        server.batches.append(len(body["texts"]))
        mode = server.mode
        if mode == "error":
            self.send_response(500)
            self.end_headers()
            return
        if mode == "ok":
            probs = [[0.25, 0.75] for _ in body["texts"]]
        elif mode == "wrong-count":
            probs = [[0.25, 0.75] for _ in body["texts"]][:-1]
        elif mode == "wrong-classes":
            probs = [[0.2, 0.3, 0.5] for _ in body["texts"]]
        elif mode == "bad-sum":
            probs = [[0.3, 0.3] for _ in body["texts"]]
        payload = json.dumps({"probs": probs}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    server.mode = "ok"
    server.batches = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


def _url(server):
    return f"http://127.0.0.1:{server.server_address[1]}"


class TestRemote:
    def test_chunking(self, stub_server):
        handle = make_remote(_url(stub_server), max_batch=2)
        preds = handle.classify_batch(["a", "b", "c", "d", "e"])
        assert len(preds) == 5
        assert stub_server.batches == [2, 2, 1]
        assert handle.ledger.total_queries == 5

    def test_probs_passed_through(self, stub_server):
        handle = make_remote(_url(stub_server))
        assert handle.classify_batch(["a"])[0].probs == (0.25, 0.75)

    def test_wrong_alignment(self, stub_server):
        stub_server.mode = "wrong-count"
        handle = make_remote(_url(stub_server))
        with pytest.raises(ProtocolError):
            handle.classify_batch(["a", "b"])

    def test_wrong_class_count(self, stub_server):
        handle = make_remote(_url(stub_server), num_classes=2)
        stub_server.mode = "wrong-classes"
        with pytest.raises(ProtocolError):
            handle.classify_batch(["a"])

    def test_bad_probability_sum(self, stub_server):
        stub_server.mode = "bad-sum"
        handle = make_remote(_url(stub_server))
        with pytest.raises(ProtocolError):
            handle.classify_batch(["a"])

    def test_non_200_is_transport_error(self, stub_server):
        stub_server.mode = "error"
        handle = make_remote(_url(stub_server))
        with pytest.raises(TransportError):
            handle.classify_batch(["a"])

    def test_unreachable(self):
        handle = make_remote("http://127.0.0.1:1", timeout=0.5)
        with pytest.raises(TransportError):
            handle.classify_batch(["a"])

    def test_invalid_url_rejected(self):
        with pytest.raises(ValueError):
            make_remote("not-a-url")
