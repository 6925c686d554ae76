"""Client for external next-token models speaking JSON lines over stdio.

The bridge process is spawned from a shell-style command string. Every
request carries a fresh integer id; the response must echo it. One
request is in flight at a time.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from typing import Optional

from rimegen.lm import SEP_TOKEN, LmContext, TokenCandidate

DEFAULT_TIMEOUT = 30.0

_EOF = object()


class BridgeError(Exception):
    """Raised when the bridge process misbehaves or goes away."""

    def __init__(self, message: str, request_id: Optional[int] = None) -> None:
        if request_id is not None:
            message = f"request {request_id}: {message}"
        super().__init__(message)
        self.request_id = request_id


class BridgeClient:
    """Wraps a bridge subprocess behind the next-token backend surface."""

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT) -> None:
        argv = shlex.split(command)
        if not argv:
            raise BridgeError("empty bridge command")
        self._timeout = timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot start bridge {argv[0]!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        reader = threading.Thread(target=self._pump, daemon=True)
        reader.start()
        self._lock = threading.Lock()
        self._next_id = 1
        try:
            hello = self._request({"op": "hello"})
            name = hello.get("name")
            version = hello.get("version")
            eos = hello.get("eos_token")
            if not (
                isinstance(name, str)
                and name
                and isinstance(version, str)
                and isinstance(eos, str)
                and eos
            ):
                raise BridgeError(
                    "malformed hello response: needs name, version and eos_token"
                )
            self.name = name
            self.version = version
            self._eos_token = eos
        except BridgeError:
            self.close()
            raise

    @property
    def eos_token(self) -> str:
        return self._eos_token

    @property
    def sep_token(self) -> str:
        return SEP_TOKEN

    def top_k(self, context: LmContext, k: int) -> list[TokenCandidate]:
        if k < 1:
            raise ValueError("k must be at least 1")
        response = self._request(
            {"op": "top_k", "context": list(context.tokens), "k": k}
        )
        rid = response["id"]
        raw = response.get("candidates")
        if not isinstance(raw, list) or len(raw) > k:
            raise BridgeError(f"expected up to {k} candidates, got {raw!r}", rid)
        candidates = []
        previous = math.inf
        for entry in raw:
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("token"), str)
                or not isinstance(entry.get("logprob"), (int, float))
                or isinstance(entry.get("logprob"), bool)
            ):
                raise BridgeError(f"malformed candidate entry: {entry!r}", rid)
            logprob = float(entry["logprob"])
            if not math.isfinite(logprob):
                raise BridgeError(
                    f"non-finite logprob for token {entry['token']!r}", rid
                )
            if logprob > previous:
                raise BridgeError("candidates are not sorted by logprob", rid)
            previous = logprob
            candidates.append(TokenCandidate(entry["token"], logprob))
        return candidates

    def close(self) -> None:
        proc = self._proc
        if proc.stdin and not proc.stdin.closed:
            try:
                proc.stdin.close()
            except OSError:
                pass
        if proc.poll() is None:
            try:
                proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def __enter__(self) -> "BridgeClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _pump(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _request(self, payload: dict) -> dict:
        with self._lock:
            rid = self._next_id
            self._next_id += 1
            message = {"id": rid, **payload}
            try:
                self._proc.stdin.write(json.dumps(message, ensure_ascii=False) + "\n")
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                raise BridgeError(f"cannot write to bridge: {exc}", rid) from exc
            line = self._next_line(rid)
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(
                f"bridge sent a line that is not JSON: {line.strip()!r}", rid
            ) from exc
        if not isinstance(response, dict):
            raise BridgeError(
                f"bridge response is not an object: {line.strip()!r}", rid
            )
        if response.get("id") != rid:
            raise BridgeError(
                f"bridge answered id {response.get('id')!r}", rid
            )
        if "error" in response:
            raise BridgeError(f"bridge error: {response['error']}", rid)
        return response

    def _next_line(self, rid: int) -> str:
        try:
            item = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            raise BridgeError(
                f"no response within {self._timeout:g}s", rid
            ) from None
        if item is _EOF:
            raise BridgeError(
                f"bridge closed its output (exit code {self._proc.poll()})", rid
            )
        return item


def bridge_connect(command: str, timeout: float = DEFAULT_TIMEOUT) -> BridgeClient:
    return BridgeClient(command, timeout=timeout)
