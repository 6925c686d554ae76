"""Line-delimited JSON server for word-level top-k requests.

One request object per stdin line, one response object per stdout line,
flushed per response. Handshake: {"id":1,"op":"hello"} answers name,
version, and the EOS token string. {"id":2,"op":"top_k","context":
[...],"k":10} answers candidates sorted by logprob non-increasing. A bad
request gets an error response (id -1 when no usable id exists); the
loop itself never dies on input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import TextIO

from . import __version__
from .model import BackendError, WordBackend

SERVER_NAME = "verse-bridge"


def handle(backend: WordBackend, request: dict) -> dict:
    rid = request.get("id")
    if not isinstance(rid, int) or isinstance(rid, bool):
        return {"id": -1, "error": "request id must be an integer"}
    op = request.get("op")
    if op == "hello":
        return {
            "id": rid,
            "name": SERVER_NAME,
            "version": __version__,
            "eos_token": backend.eos_token,
        }
    if op == "top_k":
        context = request.get("context")
        k = request.get("k")
        if not isinstance(context, list) or not all(
            isinstance(token, str) for token in context
        ):
            return {"id": rid, "error": "context must be a list of strings"}
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            return {"id": rid, "error": "k must be a positive integer"}
        try:
            candidates = backend.top_k(context, k)
        except BackendError as exc:
            return {"id": rid, "error": str(exc)}
        return {
            "id": rid,
            "candidates": [
                {"token": c.token, "logprob": c.logprob} for c in candidates
            ],
        }
    return {"id": rid, "error": f"unknown op {op!r}"}


def serve(backend: WordBackend, stdin: TextIO, stdout: TextIO) -> None:
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("not an object")
        except ValueError:
            response = {"id": -1, "error": "request is not a JSON object"}
        else:
            try:
                response = handle(backend, request)
            except Exception as exc:  # a bad request must never kill the loop
                rid = request.get("id")
                if not isinstance(rid, int) or isinstance(rid, bool):
                    rid = -1
                response = {"id": rid, "error": f"internal: {exc}"}
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog=SERVER_NAME, description=__doc__)
    parser.add_argument(
        "--model",
        required=True,
        help="directory holding the causal model and its tokenizer",
    )
    parser.add_argument("--max-pieces", type=int, default=6)
    parser.add_argument("--branch-factor", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        backend = WordBackend(
            args.model,
            max_pieces=args.max_pieces,
            branch_factor=args.branch_factor,
        )
    except Exception as exc:
        print(f"error: cannot load model from {args.model}: {exc}", file=sys.stderr)
        return 2
    serve(backend, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
