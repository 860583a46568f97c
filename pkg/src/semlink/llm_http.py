"""Generic HTTP chat-completion backend for demo runs against a real model.

The mock agents drive every test; this client mirrors their call shapes so
a session can swap in live completions for planning, compression,
extraction and reconstruction.  Configuration is one base URL plus a model
name, with the auth token taken from an environment variable.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from importlib.resources import files

import requests

logger = logging.getLogger(__name__)

DEFAULT_TOKEN_ENV = "SEMLINK_API_TOKEN"


class LlmBackendError(RuntimeError):
    """The endpoint failed after all retries."""


def load_prompt(name: str) -> str:
    return files("semlink.prompts").joinpath(f"{name}.txt").read_text("utf-8")


@dataclass
class HttpChatClient:
    base_url: str
    model: str
    token_env: str = DEFAULT_TOKEN_ENV
    timeout_s: float = 60.0
    retries: int = 2

    def complete(self, system: str, user: str) -> str:
        """One blocking chat-completion exchange; returns the reply text."""
        url = self.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        last_error = None
        for attempt in range(self.retries + 1):
            try:
                resp = requests.post(url, headers=headers, json=payload,
                                     timeout=self.timeout_s)
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError,
                    json.JSONDecodeError) as exc:
                last_error = exc
                logger.warning("chat completion attempt %d failed: %s",
                               attempt + 1, exc)
                if attempt < self.retries:
                    time.sleep(min(2.0 ** attempt, 8.0))
        raise LlmBackendError(f"chat completion failed: {last_error}")


class LlmAgents:
    """Live-model versions of the agent operations (demo grade).

    Each method renders its prompt template and returns the model output
    verbatim; no parsing guarantees are made beyond being text.
    """

    def __init__(self, client: HttpChatClient):
        self.client = client

    def plan(self, history, task_text: str) -> str:
        rendered = "\n".join(f"query: {q}\nresponse: {a}" for q, a in history)
        return self.client.complete(load_prompt("planner"),
                                    f"task: {task_text}\n{rendered}")

    def compress(self, text: str, target_ratio: float, history=None) -> str:
        prompt = load_prompt("compressor")
        context = ""
        if history:
            context = "history:\n" + "\n".join(
                f"query: {q}\nresponse: {a}" for q, a in history) + "\n"
        return self.client.complete(
            prompt.replace("{target_ratio}", f"{target_ratio:.2f}"),
            context + "message:\n" + text)

    def respond(self, received_query: str, facts: str) -> str:
        return self.client.complete(load_prompt("responder"),
                                    f"sensor facts:\n{facts}\n"
                                    f"instruction:\n{received_query}")

    def extract(self, text: str, class_terms) -> str:
        prompt = load_prompt("extractor")
        return self.client.complete(
            prompt.replace("{class_terms}", ", ".join(sorted(class_terms))),
            text)

    def reconstruct(self, part1: str, part2: str, part3: str) -> str:
        return self.client.complete(
            load_prompt("reconstructor"),
            f"key items:\n{part1}\nmarked sentences:\n{part2}\n"
            f"remaining sentences:\n{part3}")

    def evaluate(self, transcript_text: str, feedback_text: str) -> str:
        return self.client.complete(
            load_prompt("evaluator"),
            f"transcript:\n{transcript_text}\nuser feedback:\n{feedback_text}")
