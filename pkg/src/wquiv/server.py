"""HTTP session service for the interactive explorer.

The server holds one session and no mathematics: every transition is a
library call, state changes are serialized under a lock, and errors come
back as ``{code, message, witness?}`` with the state unchanged.  Replaying
the recorded history from the initial quiver always reproduces the current
quiver (the session invariant, asserted after every transition).
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import analysis, io, tame
from .groups import format_element
from .mutation import MutationError, mutate
from .quiver import QuiverError, WeightedQuiver, two_cycles


class SessionError(Exception):
    def __init__(self, code: str, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


class Session:
    """One mutable exploration: a quiver, an undo/redo history, and config."""

    def __init__(self, initial: WeightedQuiver, lenient: bool = False):
        self.initial = initial
        self.lenient = lenient
        self.states = [initial]
        self.history = []  # [{"type": "mutate", "vertex": k, "cancelled": [...]}, {"type": "frame"}]
        self.redo_stack = []
        self.lock = threading.Lock()

    @property
    def current(self) -> WeightedQuiver:
        return self.states[-1]

    def _replay_check(self) -> None:
        q = self.initial
        for event in self.history:
            if event["type"] == "mutate":
                q = mutate(q, event["vertex"], lenient=self.lenient).result
            else:
                q = analysis.frame(q)
        assert q == self.current, "session replay invariant broken"

    def do_mutate(self, vertex: int) -> None:
        try:
            record = mutate(self.current, vertex, lenient=self.lenient)
        except (MutationError, QuiverError) as err:
            raise SessionError("illegal-mutation", str(err)) from None
        self.states.append(record.result)
        self.history.append(
            {
                "type": "mutate",
                "vertex": vertex,
                "cancelled": [list(p) for p in record.cancelled],
            }
        )
        self.redo_stack.clear()
        self._replay_check()

    def do_frame(self) -> None:
        try:
            framed = analysis.frame(self.current)
        except QuiverError as err:
            raise SessionError("illegal-frame", str(err)) from None
        self.states.append(framed)
        self.history.append({"type": "frame"})
        self.redo_stack.clear()
        self._replay_check()

    def do_undo(self) -> None:
        if not self.history:
            raise SessionError("nothing-to-undo", "history is empty")
        self.redo_stack.append(self.history.pop())
        self.states.pop()
        self._replay_check()

    def do_redo(self) -> None:
        if not self.redo_stack:
            raise SessionError("nothing-to-redo", "redo stack is empty")
        event = self.redo_stack.pop()
        if event["type"] == "mutate":
            record = mutate(self.current, event["vertex"], lenient=self.lenient)
            self.states.append(record.result)
            event = {
                "type": "mutate",
                "vertex": event["vertex"],
                "cancelled": [list(p) for p in record.cancelled],
            }
        else:
            self.states.append(analysis.frame(self.current))
        self.history.append(event)
        self._replay_check()

    def is_framed(self) -> bool:
        return bool(self.current.frozen_ids())

    def state_json(self) -> dict:
        q = self.current
        blocked = sorted(
            {a.src for a, _, _ in two_cycles(q)} | {a.dst for a, _, _ in two_cycles(q)}
        )
        return {
            "schema_version": 1,
            "quiver": io.quiver_to_json(q),
            "quiver_text": io.canonical_text(q),
            "framed": self.is_framed(),
            "lenient": self.lenient,
            "history": self.history,
            "redo_depth": len(self.redo_stack),
            "two_cycle_vertices": blocked,
        }


def _cvectors_json(q: WeightedQuiver) -> dict:
    matrix = analysis.c_vectors(q)
    coherent, offending = analysis.is_sign_coherent(matrix)
    return {
        "schema_version": 1,
        "row_ids": list(matrix.row_ids),
        "col_ids": list(matrix.col_ids),
        "rows": matrix.matrix.tolist(),
        "sign_coherent": coherent,
        "offending_row": offending,
    }


def _two_cycles_json(q: WeightedQuiver) -> dict:
    return {
        "schema_version": 1,
        "pairs": [
            {
                "forward": {"src": a.src, "dst": a.dst, "weight": format_element(a.weight)},
                "backward": {"src": b.src, "dst": b.dst, "weight": format_element(b.weight)},
                "trivial": trivial,
            }
            for a, b, trivial in two_cycles(q)
        ],
    }


def _classify_json(q: WeightedQuiver) -> dict:
    verdict = tame.classify_tame(q)
    out = {"schema_version": 1, "kind": verdict.kind}
    if verdict.gauge is not None:
        out["gauge"] = {str(v): format_element(g) for v, g in sorted(verdict.gauge.items())}
    if verdict.membership is not None:
        out["t"] = format_element(verdict.membership.t)
    return out


def make_handler(session: Session, ui_dir=None):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()
            self.wfile.write(body)

        def _send_error(self, err: SessionError, status: int = 400) -> None:
            payload = {"code": err.code, "message": str(err)}
            if err.witness is not None:
                payload["witness"] = err.witness
            self._send(status, payload)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length", 0) or 0)
            if not length:
                return {}
            try:
                return json.loads(self.rfile.read(length).decode("utf-8"))
            except json.JSONDecodeError:
                raise SessionError("bad-json", "request body is not valid JSON")

        def _serve_static(self, path: str) -> bool:
            if ui_dir is None:
                return False
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (Path(ui_dir) / rel).resolve()
            if not str(target).startswith(str(Path(ui_dir).resolve())) or not target.is_file():
                return False
            body = target.read_bytes()
            content_type = {
                ".html": "text/html",
                ".js": "text/javascript",
                ".css": "text/css",
                ".json": "application/json",
            }.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return True

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def do_GET(self):
            try:
                with session.lock:
                    if self.path == "/state":
                        self._send(200, session.state_json())
                    elif self.path == "/c-vectors":
                        if not session.is_framed():
                            raise SessionError("not-framed", "frame the session first")
                        self._send(200, _cvectors_json(session.current))
                    elif self.path == "/analysis/two-cycles":
                        self._send(200, _two_cycles_json(session.current))
                    elif self.path == "/classify":
                        try:
                            self._send(200, _classify_json(session.current))
                        except QuiverError as err:
                            raise SessionError("not-classifiable", str(err)) from None
                    elif self._serve_static(self.path):
                        pass
                    else:
                        self._send(404, {"code": "not-found", "message": self.path})
            except SessionError as err:
                self._send_error(err)

        def do_POST(self):
            try:
                with session.lock:
                    if self.path == "/mutate":
                        body = self._read_body()
                        if "vertex" not in body:
                            raise SessionError("bad-request", "missing 'vertex'")
                        session.do_mutate(int(body["vertex"]))
                    elif self.path == "/undo":
                        session.do_undo()
                    elif self.path == "/redo":
                        session.do_redo()
                    elif self.path == "/frame":
                        session.do_frame()
                    else:
                        self._send(404, {"code": "not-found", "message": self.path})
                        return
                    self._send(200, session.state_json())
            except SessionError as err:
                self._send_error(err)

    return Handler


def make_server(
    initial: WeightedQuiver,
    host: str = "127.0.0.1",
    port: int = 8764,
    lenient: bool = False,
    ui_dir=None,
) -> ThreadingHTTPServer:
    session = Session(initial, lenient=lenient)
    handler = make_handler(session, ui_dir=ui_dir)
    server = ThreadingHTTPServer((host, port), handler)
    server.session = session
    return server


def run_server(initial, host="127.0.0.1", port=8764, lenient=False, ui_dir=None):
    server = make_server(initial, host=host, port=port, lenient=lenient, ui_dir=ui_dir)
    print(f"wquiv session on http://{host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
