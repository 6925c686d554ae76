"""Stdio JSON-lines bridge used by the test suite.

Speaks the external-model wire protocol with a fixed vocabulary and a
deterministic hash-based distribution. Misbehaviour modes for client
tests are selected by argv[1]:

    ok (default)  well-behaved bridge
    garbage       emits a non-JSON line before serving
    exit          exits immediately without answering
    slow          never answers
    wrong-id      echoes a wrong request id
    error-top-k   answers every top_k with an error
    unsorted      returns candidates in ascending logprob order
"""

import hashlib
import json
import sys
import time

VOCAB = [
    "mer", "ciel", "nuit", "jour", "fleur", "coeur", "vent", "rose",
    "ombre", "clair", "sombre", "sous", "dans", "la", "le", "une",
]
EOS = "<eos>"
SEP = "<sep>"


def _score(token, context):
    digest = hashlib.md5()
    digest.update(token.encode("utf-8"))
    digest.update(b"\x00")
    digest.update("|".join(context).encode("utf-8"))
    return int.from_bytes(digest.digest()[:4], "big") / 2**32


def candidates(context, k):
    try:
        sep_at = context.index(SEP)
    except ValueError:
        sep_at = len(context) - 1
    n_generated = len(context) - sep_at - 1
    scored = [(-1.5 + _score(token, context), token) for token in VOCAB]
    # End-of-sequence becomes attractive as the verse grows, so
    # generation terminates well before any length cap.
    scored.append((min(-0.01, -4.0 + 0.5 * n_generated), EOS))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        {"token": token, "logprob": logprob}
        for logprob, token in scored[: max(k, 0)]
    ]


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    if mode == "exit":
        return 0
    if mode == "slow":
        time.sleep(3600)
    if mode == "garbage":
        print("bonjour, pas du json", flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            print(json.dumps({"id": -1, "error": "request is not valid JSON"}), flush=True)
            continue
        rid = request.get("id", -1)
        if mode == "wrong-id":
            rid = rid + 1
        op = request.get("op")
        if op == "hello":
            response = {
                "id": rid,
                "name": "mock-bridge",
                "version": "1.0",
                "eos_token": EOS,
            }
        elif op == "top_k":
            if mode == "error-top-k":
                response = {"id": rid, "error": "mock refuses to score"}
            else:
                cands = candidates(request.get("context") or [], int(request.get("k", 10)))
                if mode == "unsorted":
                    cands = list(reversed(cands))
                response = {"id": rid, "candidates": cands}
        else:
            response = {"id": rid, "error": f"unknown op {op!r}"}
        print(json.dumps(response, ensure_ascii=False), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
