"""Wire-format test for the HTTP chat-completion backend using a local stub."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from semlink.llm_http import HttpChatClient, LlmAgents, LlmBackendError, load_prompt


class _StubHandler(BaseHTTPRequestHandler):
    requests_seen = []
    fail_first = 0

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).requests_seen.append((self.path, dict(self.headers), body))
        if type(self).fail_first > 0:
            type(self).fail_first -= 1
            self.send_response(500)
            self.end_headers()
            return
        reply = {"choices": [{"message": {
            "role": "assistant",
            "content": "compressed: " + body["messages"][1]["content"][:40]}}]}
        payload = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    _StubHandler.requests_seen = []
    _StubHandler.fail_first = 0
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpClient:
    def test_wire_format(self, stub_server, monkeypatch):
        monkeypatch.setenv("SEMLINK_API_TOKEN", "secret-token")
        client = HttpChatClient(base_url=stub_server, model="demo-model")
        reply = client.complete("system text", "user text")
        assert reply.startswith("compressed:")
        path, headers, body = _StubHandler.requests_seen[-1]
        assert path == "/chat/completions"
        assert headers["Authorization"] == "Bearer secret-token"
        assert body["model"] == "demo-model"
        assert [m["role"] for m in body["messages"]] == ["system", "user"]

    def test_retries_then_succeeds(self, stub_server):
        _StubHandler.fail_first = 1
        client = HttpChatClient(base_url=stub_server, model="m", retries=2)
        assert client.complete("s", "u")
        assert len(_StubHandler.requests_seen) == 2

    def test_exhausted_retries_raise(self, stub_server):
        _StubHandler.fail_first = 10
        client = HttpChatClient(base_url=stub_server, model="m", retries=1)
        with pytest.raises(LlmBackendError):
            client.complete("s", "u")

    def test_agent_wrappers_render_prompts(self, stub_server):
        client = HttpChatClient(base_url=stub_server, model="m")
        agents = LlmAgents(client)
        agents.compress("a long message", target_ratio=0.4)
        _, _, body = _StubHandler.requests_seen[-1]
        assert "0.40" in body["messages"][0]["content"]
        assert "a long message" in body["messages"][1]["content"]
        agents.extract("text", class_terms={"dust"})
        _, _, body = _StubHandler.requests_seen[-1]
        assert "dust" in body["messages"][0]["content"]


class TestPrompts:
    def test_all_templates_present(self):
        for name in ("compressor", "extractor", "planner", "responder",
                     "reconstructor", "evaluator"):
            text = load_prompt(name)
            assert len(text.split()) > 10

    def test_planner_forbids_termination_phrase_in_instructions(self):
        assert "task complete" in load_prompt("planner")


class TestLiveSessionIntegration:
    def test_http_backend_drives_a_session(self, stub_server):
        # The stub plays both live roles: every completion echoes back, and
        # the planner side returns DONE on its third call, ending the loop.
        from semlink.session import Seeds, SessionConfig, run_session

        state = {"plans": 0}

        original = _StubHandler.do_POST

        def scripted(self):
            length = int(self.headers["Content-Length"])
            body = json.loads(self.rfile.read(length))
            system = body["messages"][0]["content"]
            if "coordinating agent" in system:
                state["plans"] += 1
                content = ("DONE" if state["plans"] >= 3
                           else "report the items you can see .")
            elif "robot agent" in system:
                content = "i see lamp cell-2-3 ; book cell-0-5 ."
            else:
                content = body["messages"][1]["content"].split("message:\n")[-1]
            reply = {"choices": [{"message": {"content": content}}]}
            payload = json.dumps(reply).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        _StubHandler.do_POST = scripted
        try:
            config = SessionConfig(method="LC", scenario="case2",
                                   mean_snr_db=30.0, seeds=Seeds(1, 1, 1),
                                   llm_backend="http",
                                   llm_base_url=stub_server,
                                   llm_model="demo")
            transcript = run_session(config)
        finally:
            _StubHandler.do_POST = original
        assert transcript.outcome == "CompletedByBS"
        assert transcript.num_rounds == 2
        assert "lamp cell-2-3" in transcript.rounds[0].response_received

    def test_http_backend_requires_base_url(self):
        from semlink.session import Seeds, SessionConfig
        import pytest as _pytest
        with _pytest.raises(ValueError):
            SessionConfig(method="LC", scenario="case2", mean_snr_db=10.0,
                          seeds=Seeds(1, 1, 1), llm_backend="http")
