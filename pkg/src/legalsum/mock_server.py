"""Offline chat-completions server for exercising the baseline client.

By default it answers with the first sentence of the document embedded in
the prompt. It can also return a canned reply, fail a fixed number of times
with a given status, or demand a specific bearer key.

Run standalone with ``python -m legalsum.mock_server --port 8089``.
"""

from __future__ import annotations

import argparse
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

from .corpus import clean, segment_sentences

_DOCUMENT = re.compile(r"<document>\n(.*)\n</document>", re.S)


def first_sentence(prompt: str) -> str:
    m = _DOCUMENT.search(prompt)
    text = m.group(1) if m else prompt
    return segment_sentences(clean(text))[0].raw


class MockChatServer:
    def __init__(
        self,
        reply: str | Callable[[str], str] | None = None,
        *,
        fail_times: int = 0,
        fail_status: int = 500,
        required_key: str | None = None,
        malformed: bool = False,
        host: str = "127.0.0.1",
        port: int = 0,
    ) -> None:
        self.reply = reply if reply is not None else first_sentence
        self.fail_times = fail_times
        self.fail_status = fail_status
        self.required_key = required_key
        self.malformed = malformed
        self.requests: list[dict] = []
        self.attempts = 0
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer((host, port), self._handler())
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/v1/chat/completions"

    def start(self) -> "MockChatServer":
        self._thread = threading.Thread(target=self._server.serve_forever, args=(0.05,), daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "MockChatServer":
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.stop()

    def _respond(self, body: dict, auth: str | None) -> tuple[int, bytes]:
        with self._lock:
            self.attempts += 1
            attempt = self.attempts
            self.requests.append(body)
        if self.required_key is not None and auth != f"Bearer {self.required_key}":
            return 401, json.dumps({"error": {"message": "invalid api key"}}).encode()
        if attempt <= self.fail_times:
            return self.fail_status, json.dumps({"error": {"message": "induced failure"}}).encode()
        if self.malformed:
            return 200, b'{"choices": []}'
        prompt = "\n".join(m.get("content", "") for m in body.get("messages", []) if m.get("role") == "user")
        text = self.reply(prompt) if callable(self.reply) else self.reply
        payload = {
            "id": f"mock-{attempt}",
            "object": "chat.completion",
            "model": body.get("model", "mock"),
            "choices": [{"index": 0, "finish_reason": "stop", "message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": len(prompt.split()), "completion_tokens": len(text.split())},
        }
        return 200, json.dumps(payload).encode()

    def _handler(self) -> type[BaseHTTPRequestHandler]:
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def do_POST(self) -> None:  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                try:
                    body = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError:
                    status, data = 400, b'{"error": {"message": "bad json"}}'
                else:
                    status, data = server._respond(body, self.headers.get("Authorization"))
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, format: str, *args: object) -> None:
                pass

        return Handler


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8089)
    parser.add_argument("--reply", help="canned reply (default: echo the first sentence)")
    parser.add_argument("--fail-times", type=int, default=0)
    parser.add_argument("--fail-status", type=int, default=500)
    args = parser.parse_args(argv)
    server = MockChatServer(args.reply, fail_times=args.fail_times, fail_status=args.fail_status,
                            host=args.host, port=args.port)
    print(f"serving {server.url}", flush=True)
    try:
        server._server.serve_forever()
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
