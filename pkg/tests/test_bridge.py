import math
import shlex
import sys
from pathlib import Path

import pytest

from rimegen.bridge_client import BridgeClient, BridgeError, bridge_connect
from rimegen.corpus import TrainingPair
from rimegen.lm import EOS_TOKEN, LmContext, train_ngram

_MOCK = Path(__file__).parent / "mock_bridge.py"


def mock_command(mode: str = "") -> str:
    parts = [shlex.quote(sys.executable), shlex.quote(str(_MOCK))]
    if mode:
        parts.append(mode)
    return " ".join(parts)


class TestHandshake:
    def test_hello_fields(self):
        with bridge_connect(mock_command()) as client:
            assert client.name == "mock-bridge"
            assert client.version == "1.0"
            assert client.eos_token == EOS_TOKEN

    def test_missing_program(self):
        with pytest.raises(BridgeError, match="cannot start"):
            bridge_connect("/nonexistent/bridge-program")

    def test_empty_command(self):
        with pytest.raises(BridgeError, match="empty"):
            bridge_connect("   ")

    def test_immediate_exit(self):
        with pytest.raises(BridgeError):
            bridge_connect(mock_command("exit"))

    def test_garbage_line(self):
        with pytest.raises(BridgeError, match="not JSON"):
            bridge_connect(mock_command("garbage"))

    def test_timeout(self):
        with pytest.raises(BridgeError, match="no response within"):
            bridge_connect(mock_command("slow"), timeout=0.5)

    def test_wrong_id_echo(self):
        with pytest.raises(BridgeError, match="answered id"):
            bridge_connect(mock_command("wrong-id"))


class TestTopK:
    def test_sorted_and_bounded(self):
        with bridge_connect(mock_command()) as client:
            cands = client.top_k(LmContext.for_generation(["mer"], []), 5)
            assert 0 < len(cands) <= 5
            logprobs = [c.logprob for c in cands]
            assert logprobs == sorted(logprobs, reverse=True)

    def test_deterministic_across_connections(self):
        ctx = LmContext.for_generation(["la", "nuit"], ["sous", "la"])
        with bridge_connect(mock_command()) as one:
            first = one.top_k(ctx, 8)
        with bridge_connect(mock_command()) as two:
            second = two.top_k(ctx, 8)
        assert first == second

    def test_error_response(self):
        with bridge_connect(mock_command("error-top-k")) as client:
            with pytest.raises(BridgeError, match="mock refuses"):
                client.top_k(LmContext.for_generation(["mer"], []), 5)

    def test_unsorted_candidates_rejected(self):
        with bridge_connect(mock_command("unsorted")) as client:
            with pytest.raises(BridgeError, match="not sorted"):
                client.top_k(LmContext.for_generation(["mer"], []), 5)

    def test_invalid_k(self):
        with bridge_connect(mock_command()) as client:
            with pytest.raises(ValueError):
                client.top_k(LmContext.for_generation(["mer"], []), 0)

    def test_close_is_idempotent(self):
        client = bridge_connect(mock_command())
        client.close()
        client.close()


@pytest.fixture(params=["ngram", "bridge"])
def backend(request):
    if request.param == "ngram":
        pairs = [
            TrainingPair("mer ciel", "la mer sous le ciel"),
            TrainingPair("la mer sous le ciel", "la nuit dans le coeur"),
        ]
        yield train_ngram(pairs, order=2)
    else:
        client = bridge_connect(mock_command())
        yield client
        client.close()


class TestBackendContract:
    def test_top_k_postconditions(self, backend):
        cands = backend.top_k(LmContext.for_generation(["la", "mer"], ["sous"]), 5)
        assert 0 < len(cands) <= 5
        logprobs = [c.logprob for c in cands]
        assert all(math.isfinite(lp) for lp in logprobs)
        assert logprobs == sorted(logprobs, reverse=True)
        assert len({c.token for c in cands}) == len(cands)

    def test_eos_token_nonempty(self, backend):
        assert isinstance(backend.eos_token, str) and backend.eos_token
