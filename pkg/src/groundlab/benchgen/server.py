"""Minimal HTTP server exposing any scorer over the wire protocol.

POST a JSON object {"id": ..., "text": ...} (or an array of them) to any
path; the reply mirrors the shape with {"id": ..., "surprisal": ...}.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def make_handler(scorer):
    class ScoringHandler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # keep test output quiet
            pass

        def _reply(self, status: int, payload) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length).decode("utf-8"))
                single = isinstance(payload, dict)
                items = [payload] if single else payload
                scored = [
                    {"id": obj["id"], "surprisal": scorer.score(obj["text"])}
                    for obj in items
                ]
                self._reply(200, scored[0] if single else scored)
            except Exception as exc:  # surface the cause to the client
                self._reply(400, {"error": f"{type(exc).__name__}: {exc}"})

    return ScoringHandler


def serve_scorer(scorer, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind a scoring server; the caller drives serve_forever()/shutdown().

    Port 0 binds an ephemeral port; read the real one from
    server.server_address.
    """
    return ThreadingHTTPServer((host, port), make_handler(scorer))
