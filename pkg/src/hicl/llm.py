"""LLM clients: an HTTP chat-completion client with retry/backoff plus
deterministic stubs for testing and offline runs.

Client selectors:
    http                  chat-completion endpoint from env/explicit config
    stub:echo             returns the tail of the prompt
    stub:oracle-demo      picks the candidate carried by the best-scoring demo
    stub:fixed-script:F   replays newline-delimited replies from file F
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import httpx


class LLMError(Exception):
    pass


class LLMTimeoutError(LLMError):
    pass


class LLMTransportError(LLMError):
    pass


class LLMResponseError(LLMError):
    pass


@dataclass(frozen=True)
class DemoContext:
    score: float
    label: str   # display label at the current step (level label or path)
    text: str


@dataclass(frozen=True)
class LLMContext:
    """Structured view of the request, consumed by stub clients only."""

    mode: str                      # "level" | "full-path" | "pick-similar"
    candidates: tuple[str, ...]
    demos: tuple[DemoContext, ...]
    level: int = 0


class LLMClient:
    def complete(self, prompt: str, context: Optional[LLMContext] = None) -> str:
        raise NotImplementedError


class EchoClient(LLMClient):
    """Returns the last nonempty line of the prompt."""

    def complete(self, prompt: str, context: Optional[LLMContext] = None) -> str:
        lines = [ln for ln in prompt.splitlines() if ln.strip()]
        return lines[-1] if lines else ""


class OracleDemoClient(LLMClient):
    """Deterministic stub: answers with the candidate carried by the
    best-scoring demonstration."""

    def complete(self, prompt: str, context: Optional[LLMContext] = None) -> str:
        if context is None:
            raise LLMResponseError("oracle-demo stub requires request context")
        if context.mode == "pick-similar":
            return "1" if context.demos else ""
        for demo in sorted(context.demos, key=lambda d: -d.score):
            if demo.label in context.candidates:
                return demo.label
        if context.candidates:
            return context.candidates[0]
        return context.demos[0].label if context.demos else ""


class FixedScriptClient(LLMClient):
    """Replays a recorded list of replies, in order."""

    def __init__(self, replies: Sequence[str]):
        self._replies = list(replies)
        self._cursor = 0
        self.calls: list[str] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "FixedScriptClient":
        text = Path(path).read_text(encoding="utf-8")
        return cls([ln for ln in text.splitlines()])

    def complete(self, prompt: str, context: Optional[LLMContext] = None) -> str:
        self.calls.append(prompt)
        if self._cursor >= len(self._replies):
            raise LLMResponseError("fixed-script client exhausted its recorded replies")
        reply = self._replies[self._cursor]
        self._cursor += 1
        return reply


@dataclass
class HttpChatClient(LLMClient):
    """Chat-completion style HTTP client with bounded exponential-backoff
    retries and a line-delimited request/response audit log."""

    url: str
    model: str
    temperature: float = 0.2
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    headers: dict = field(default_factory=dict)
    audit_log: Optional[str] = None

    def complete(self, prompt: str, context: Optional[LLMContext] = None) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        last_error: Optional[LLMError] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = httpx.post(
                    self.url, json=body, headers=self.headers, timeout=self.timeout
                )
            except httpx.TimeoutException as exc:
                last_error = LLMTimeoutError(f"request timed out: {exc}")
                self._audit(prompt, error=str(last_error))
                continue
            except httpx.HTTPError as exc:
                last_error = LLMTransportError(f"transport failure: {exc}")
                self._audit(prompt, error=str(last_error))
                continue
            if resp.status_code >= 500:
                last_error = LLMTransportError(f"server error {resp.status_code}")
                self._audit(prompt, error=str(last_error))
                continue
            if resp.status_code != 200:
                err = LLMResponseError(f"unexpected status {resp.status_code}")
                self._audit(prompt, error=str(err))
                raise err
            try:
                reply = resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
                err = LLMResponseError(f"malformed response body: {exc}")
                self._audit(prompt, error=str(err))
                raise err
            self._audit(prompt, reply=reply)
            return reply
        assert last_error is not None
        raise last_error

    def _audit(self, prompt: str, reply: Optional[str] = None, error: Optional[str] = None):
        if not self.audit_log:
            return
        record = {
            "ts": time.time(),
            "url": self.url,
            "model": self.model,
            "prompt": prompt,
            "reply": reply,
            "error": error,
        }
        with open(self.audit_log, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def make_client(selector: str, temperature: float = 0.2,
                audit_log: Optional[str] = None) -> LLMClient:
    if selector == "stub:echo":
        return EchoClient()
    if selector == "stub:oracle-demo":
        return OracleDemoClient()
    if selector.startswith("stub:fixed-script:"):
        return FixedScriptClient.from_file(selector.split(":", 2)[2])
    if selector == "http":
        url = os.environ.get("HICL_LLM_URL")
        if not url:
            raise LLMError("http client selected but HICL_LLM_URL is not set")
        headers = {}
        api_key = os.environ.get("HICL_LLM_API_KEY")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return HttpChatClient(
            url=url,
            model=os.environ.get("HICL_LLM_MODEL", "gpt-3.5-turbo"),
            temperature=temperature,
            headers=headers,
            audit_log=audit_log,
        )
    raise LLMError(f"unknown llm client selector {selector!r}")
