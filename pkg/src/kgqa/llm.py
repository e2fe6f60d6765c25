"""One gateway for the three model roles: translator, selector and reader.

Live calls go to an OpenAI-compatible chat-completion endpoint.  Offline
runs use the deterministic stubs in :mod:`kgqa.stubs`.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from string import Template
from typing import Any, Literal, Mapping, Protocol

import httpx

log = logging.getLogger(__name__)

Role = Literal["translator", "selector", "reader"]
ROLES: tuple[str, ...] = ("translator", "selector", "reader")
PROMPT_VERSION = "v1"


class GatewayError(Exception):
    """A model call failed: transport error, bad status, or timeout."""

    def __init__(self, message: str, *, attempts: int = 1, status: int | None = None, retryable: bool = False):
        super().__init__(message)
        self.attempts = attempts
        self.status = status
        self.retryable = retryable


class MalformedResponseError(GatewayError):
    """The endpoint answered, but not with a chat-completion document."""


@dataclass(frozen=True)
class ModelRequest:
    role: Role
    user_content: str
    system_instruction: str = ""
    temperature: float = 0.0
    max_output: int = 512
    # structured copy of the prompt inputs; stubs read this, live backends ignore it
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if not self.user_content:
            raise ValueError("user_content must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_output < 1:
            raise ValueError("max_output must be positive")

    def messages(self) -> list[dict[str, str]]:
        msgs = []
        if self.system_instruction:
            msgs.append({"role": "system", "content": self.system_instruction})
        msgs.append({"role": "user", "content": self.user_content})
        return msgs


@dataclass(frozen=True)
class ModelResponse:
    text: str
    latency: float
    backend_id: str


class Backend(Protocol):
    backend_id: str

    def complete(self, request: ModelRequest) -> str: ...


def load_prompt(role: str, version: str = PROMPT_VERSION) -> tuple[str, Template]:
    """Return (system instruction, user template) for a role.

    Prompt files hold the system instruction, a line containing only
    ``---``, then the user template with ``$placeholders``.
    """
    text = resources.files("kgqa.prompts").joinpath(f"{role}_{version}.txt").read_text(encoding="utf-8")
    system, _, user = text.partition("\n---\n")
    return system.strip(), Template(user.strip())


def build_request(role: Role, meta: Mapping[str, Any], **fields: str) -> ModelRequest:
    system, template = load_prompt(role)
    return ModelRequest(role=role, system_instruction=system, user_content=template.substitute(fields), meta=dict(meta))


class OpenAIChatBackend:
    """HTTP backend speaking the OpenAI chat-completion wire format.

    Transport errors, timeouts, 429 and 5xx are retried up to ``max_retries``
    times with exponential backoff; other failures are raised at once.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str | None = "OPENAI_API_KEY",
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)
        self.backend_id = f"http:{model}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env) if self.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def payload(self, request: ModelRequest) -> dict[str, Any]:
        return {
            "model": self.model,
            "messages": request.messages(),
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        }

    def complete(self, request: ModelRequest) -> str:
        body = self.payload(request)
        attempt = 0
        while True:
            attempt += 1
            try:
                resp = self._client.post(self.endpoint, json=body, headers=self._headers(), timeout=self.timeout)
            except httpx.TimeoutException as exc:
                err = GatewayError(f"timeout calling {self.endpoint}: {exc}", attempts=attempt, retryable=True)
            except httpx.TransportError as exc:
                err = GatewayError(f"transport error calling {self.endpoint}: {exc}", attempts=attempt, retryable=True)
            else:
                if resp.status_code == 200:
                    return _read_content(resp, attempt)
                retryable = resp.status_code == 429 or resp.status_code >= 500
                err = GatewayError(
                    f"{self.endpoint} returned HTTP {resp.status_code}",
                    attempts=attempt,
                    status=resp.status_code,
                    retryable=retryable,
                )
            if not err.retryable or attempt > self.max_retries:
                raise err
            delay = self.backoff * 2 ** (attempt - 1)
            log.warning("%s; retry %d/%d in %.1fs", err, attempt, self.max_retries, delay)
            time.sleep(delay)


def _read_content(resp: httpx.Response, attempt: int) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponseError(f"malformed chat-completion response: {exc!r}", attempts=attempt) from None
    if not isinstance(content, str):
        raise MalformedResponseError("choices[0].message.content is not a string", attempts=attempt)
    return content


def generate(request: ModelRequest, backend: Backend) -> ModelResponse:
    start = time.perf_counter()
    text = backend.complete(request)
    return ModelResponse(text=text, latency=time.perf_counter() - start, backend_id=backend.backend_id)


class Gateway:
    """Routes requests to a backend per role, with a cap on calls in flight."""

    def __init__(self, backends: Mapping[str, Backend], max_in_flight: int = 4):
        missing = set(backends) - set(ROLES)
        if missing:
            raise ValueError(f"unknown roles: {sorted(missing)}")
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be positive")
        self.backends = dict(backends)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def has(self, role: str) -> bool:
        return role in self.backends

    def generate(self, request: ModelRequest) -> ModelResponse:
        try:
            backend = self.backends[request.role]
        except KeyError:
            raise GatewayError(f"no backend configured for role {request.role!r}") from None
        with self._slots:
            return generate(request, backend)
