"""Local HTTP mode: one model instance, generation serialized behind a lock.

Endpoints:
  GET  /healthz   -> 200 {"status": "ok"} once the model is loaded,
                     503 {"status": "loading"} before that
  POST /generate  -> one InferenceRequest JSON in, one InferenceResponse out;
                     400 on malformed bodies or empty text, 503 while loading
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class InferenceServer:
    def __init__(self, generator_factory, port: int, host: str = "127.0.0.1"):
        self.generator = None
        self.load_error: str | None = None
        self._generate_lock = threading.Lock()
        self._factory = generator_factory

        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet by default
                pass

            def _send(self, status: int, payload: dict) -> None:
                body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path != "/healthz":
                    self._send(404, {"error": "not found"})
                elif server.load_error is not None:
                    self._send(503, {"status": "failed", "error": server.load_error})
                elif server.generator is None:
                    self._send(503, {"status": "loading"})
                else:
                    self._send(200, {"status": "ok"})

            def do_POST(self):
                if self.path != "/generate":
                    self._send(404, {"error": "not found"})
                    return
                if server.generator is None:
                    self._send(503, {"status": "loading"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    record = json.loads(self.rfile.read(length).decode("utf-8"))
                except (ValueError, json.JSONDecodeError):
                    self._send(400, {"error": "body must be a JSON object"})
                    return
                if not isinstance(record, dict):
                    self._send(400, {"error": "body must be a JSON object"})
                    return
                text = record.get("text") or ""
                if not str(text).strip():
                    self._send(400, {"error": "text must be nonempty"})
                    return
                with server._generate_lock:
                    try:
                        generated = server.generator.generate(
                            str(text), record.get("max_new_tokens")
                        )
                    except Exception as exc:
                        self._send(500, {"error": str(exc)})
                        return
                self._send(200, {"doc_id": str(record.get("doc_id", "")), "generated": generated})

        self.httpd = ThreadingHTTPServer((host, port), Handler)

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def load_async(self) -> threading.Thread:
        def load():
            try:
                self.generator = self._factory()
            except Exception as exc:
                self.load_error = str(exc)

        thread = threading.Thread(target=load, daemon=True)
        thread.start()
        return thread

    def start(self) -> threading.Thread:
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


def serve(generator_factory, port: int, host: str = "127.0.0.1") -> None:
    """Blocking entry point: answer /healthz immediately, load in background."""
    server = InferenceServer(generator_factory, port, host=host)
    server.load_async()
    print(f"listening on http://{host}:{server.port}")
    try:
        server.httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
