"""Recorded-script replay against a live server process."""

import json
import math
import subprocess
import sys

import pytest


def replay(model_dir, lines):
    proc = subprocess.run(
        [sys.executable, "-m", "verse_bridge.server", "--model", str(model_dir)],
        input="\n".join(lines) + "\n",
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    return [json.loads(line) for line in proc.stdout.splitlines()]


SCRIPT = [
    json.dumps({"id": 1, "op": "hello"}),
    json.dumps({"id": 2, "op": "top_k", "context": ["mer", "lune", "<sep>"], "k": 5}),
    json.dumps({"id": 3, "op": "top_k", "context": ["mer", "lune", "<sep>", "la"], "k": 10}),
    "pas du json",
    json.dumps({"id": 4, "op": "nope"}),
    json.dumps({"id": 5, "op": "top_k", "context": "mer", "k": 2}),
    json.dumps({"id": 6, "op": "top_k", "context": ["mer"], "k": 0}),
    json.dumps({"op": "hello"}),
    json.dumps({"id": 7, "op": "top_k", "context": ["mer", "lune", "<sep>"], "k": 5}),
]


@pytest.fixture(scope="module")
def responses(tiny_model_dir):
    return replay(tiny_model_dir, SCRIPT)


def test_one_response_per_request(responses):
    assert len(responses) == len(SCRIPT)


def test_hello_schema(responses):
    hello = responses[0]
    assert hello["id"] == 1
    assert hello["name"] == "verse-bridge"
    assert isinstance(hello["version"], str) and hello["version"]
    assert hello["eos_token"] == "<eos>"


def check_candidates(response, rid, k):
    assert response["id"] == rid
    candidates = response["candidates"]
    assert 0 < len(candidates) <= k
    for entry in candidates:
        assert set(entry) == {"token", "logprob"}
        assert isinstance(entry["token"], str) and entry["token"]
        assert math.isfinite(entry["logprob"])
    logprobs = [entry["logprob"] for entry in candidates]
    assert logprobs == sorted(logprobs, reverse=True)


def test_top_k_schema(responses):
    check_candidates(responses[1], rid=2, k=5)
    check_candidates(responses[2], rid=3, k=10)


def test_k_words_returned(responses):
    assert len(responses[2]["candidates"]) == 10


def test_unparsable_line_gets_id_minus_one(responses):
    assert responses[3]["id"] == -1
    assert "error" in responses[3]


def test_unknown_op_is_an_error_with_id(responses):
    assert responses[4]["id"] == 4
    assert "nope" in responses[4]["error"]


def test_malformed_context_is_an_error(responses):
    assert responses[5]["id"] == 5
    assert "context" in responses[5]["error"]


def test_bad_k_is_an_error(responses):
    assert responses[6]["id"] == 6
    assert "k" in responses[6]["error"]


def test_missing_id_gets_id_minus_one(responses):
    assert responses[7]["id"] == -1
    assert "error" in responses[7]


def test_identical_requests_identical_candidates(responses):
    assert responses[8]["candidates"] == responses[1]["candidates"]


def test_missing_model_dir_fails_cleanly(tmp_path):
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "verse_bridge.server",
            "--model",
            str(tmp_path / "missing"),
        ],
        input="",
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 2
    assert "cannot load model" in proc.stderr
