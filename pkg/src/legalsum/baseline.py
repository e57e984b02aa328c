"""Client for abstractive baseline summaries from a chat-completions endpoint.

Request body::

    {"model": str, "temperature": float, "max_tokens": int,
     "messages": [{"role": "system", "content": str},
                  {"role": "user", "content": str}]}

The summary is read from ``choices[0].message.content``; token usage from
``usage.prompt_tokens`` / ``usage.completion_tokens`` when present. The API
key is sent as ``Authorization: Bearer <key>`` and read from the environment
variable named in the config at call time; it is never stored on the config,
serialized or logged.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import httpx

from .corpus import CleanDocument
from .errors import ConfigError, LegalSumError

logger = logging.getLogger(__name__)

PROMPT_VERSION = "legal-summary-v1"
SYSTEM_PROMPT = (
    "You summarize court opinions and other legal documents for legal professionals. "
    "Keep holdings, parties, cited authorities and dispositions. Do not add facts."
)
USER_TEMPLATE = (
    "Summarize the following legal document in at most {max_sentences} sentences.\n"
    "<document>\n{document}\n</document>"
)
PROMPT_HASH = hashlib.sha256(
    "\x1f".join((PROMPT_VERSION, SYSTEM_PROMPT, USER_TEMPLATE)).encode("utf-8")
).hexdigest()[:16]

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class BaselineError(LegalSumError):
    pass


class AuthError(BaselineError):
    pass


class RemoteTimeout(BaselineError):
    """No successful response within the retry budget (timeouts or 5xx replies)."""


class RateLimited(BaselineError):
    pass


class MalformedResponse(BaselineError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.4
    max_output_tokens: int = 512
    timeout_s: float = 60.0
    api_key_env_var: str = "LEGALSUM_API_KEY"
    max_retries: int = 3
    backoff_base_s: float = 1.0
    concurrency: int = 2
    max_sentences: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature must be in [0, 2], got {self.temperature}")
        if not self.timeout_s > 0:
            raise ConfigError("timeout_s must be > 0")
        if self.max_output_tokens < 1 or self.concurrency < 1 or self.max_retries < 0:
            raise ConfigError("max_output_tokens and concurrency must be >= 1, max_retries >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BaselineSummary:
    doc_id: str
    text: str
    model_name: str
    latency_s: float
    prompt_tokens: int | None
    completion_tokens: int | None
    prompt_hash: str = PROMPT_HASH

    def to_dict(self) -> dict:
        return asdict(self)


def build_request(doc: CleanDocument, cfg: LlmConfig) -> dict:
    return {
        "model": cfg.model_name,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_output_tokens,
        "messages": [
            {"role": "system", "content": SYSTEM_PROMPT},
            {"role": "user", "content": USER_TEMPLATE.format(max_sentences=cfg.max_sentences, document=doc.text)},
        ],
    }


def parse_response(payload: object) -> tuple[str, int | None, int | None]:
    try:
        text = payload["choices"][0]["message"]["content"]  # type: ignore[index]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("response lacks choices[0].message.content") from None
    if not isinstance(text, str):
        raise MalformedResponse("choices[0].message.content is not a string")
    usage = payload.get("usage") if isinstance(payload, dict) else None
    usage = usage if isinstance(usage, dict) else {}
    return text, usage.get("prompt_tokens"), usage.get("completion_tokens")


class BaselineClient:
    """Chat-completions client with bounded concurrency and shared back-off.

    When any request is rate limited, every worker waits out the same
    cooldown before its next attempt.
    """

    def __init__(
        self,
        cfg: LlmConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.cfg = cfg
        self._sleep = sleep
        self._http = httpx.Client(timeout=cfg.timeout_s, transport=transport)
        self._slots = threading.BoundedSemaphore(cfg.concurrency)
        self._lock = threading.Lock()
        self._cooldown_until = 0.0

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "BaselineClient":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def _key(self) -> str:
        key = os.environ.get(self.cfg.api_key_env_var, "")
        if not key:
            raise AuthError(f"environment variable {self.cfg.api_key_env_var} is not set")
        return key

    def _wait_cooldown(self) -> None:
        with self._lock:
            remaining = self._cooldown_until - time.monotonic()
        if remaining > 0:
            self._sleep(remaining)

    def _set_cooldown(self, delay: float) -> None:
        with self._lock:
            self._cooldown_until = max(self._cooldown_until, time.monotonic() + delay)

    def _post(self, body: dict, headers: dict) -> httpx.Response:
        cfg = self.cfg
        last_status: int | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = cfg.backoff_base_s * 2 ** (attempt - 1)
                logger.info("retry %d/%d in %.1fs (last status %s)", attempt, cfg.max_retries, delay, last_status)
                if last_status == 429:
                    self._set_cooldown(delay)
                    self._wait_cooldown()
                else:
                    self._sleep(delay)
            else:
                self._wait_cooldown()
            try:
                response = self._http.post(cfg.endpoint_url, json=body, headers=headers)
            except httpx.TimeoutException:
                last_status = None
                logger.warning("request to %s timed out (attempt %d)", cfg.endpoint_url, attempt + 1)
                continue
            except httpx.TransportError as exc:
                last_status = None
                logger.warning("transport error on attempt %d: %s", attempt + 1, type(exc).__name__)
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials (HTTP {response.status_code})")
            if response.status_code in RETRYABLE_STATUS:
                last_status = response.status_code
                continue
            if response.status_code >= 400:
                raise BaselineError(f"HTTP {response.status_code} from {cfg.endpoint_url}")
            return response
        if last_status == 429:
            raise RateLimited(f"still rate limited after {cfg.max_retries} retries")
        raise RemoteTimeout(f"no successful response after {cfg.max_retries} retries (last status {last_status})")

    def summarize(self, doc: CleanDocument) -> BaselineSummary:
        headers = {"Authorization": f"Bearer {self._key()}"}
        body = build_request(doc, self.cfg)
        with self._slots:
            start = time.perf_counter()
            response = self._post(body, headers)
            latency = time.perf_counter() - start
        try:
            payload = response.json()
        except ValueError:
            raise MalformedResponse("response body is not JSON") from None
        text, prompt_tokens, completion_tokens = parse_response(payload)
        return BaselineSummary(doc.id, text, self.cfg.model_name, latency, prompt_tokens, completion_tokens)

    def summarize_many(self, docs: Sequence[CleanDocument]) -> list[BaselineSummary | BaselineError]:
        """Summarize ``docs`` concurrently; results keep input order, failures are returned in place."""

        def one(doc: CleanDocument) -> BaselineSummary | BaselineError:
            try:
                return self.summarize(doc)
            except BaselineError as exc:
                return exc

        with ThreadPoolExecutor(max_workers=self.cfg.concurrency) as pool:
            return list(pool.map(one, docs))


def summarize_remote(
    doc: CleanDocument,
    cfg: LlmConfig,
    *,
    transport: httpx.BaseTransport | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> BaselineSummary:
    with BaselineClient(cfg, transport=transport, sleep=sleep) as client:
        return client.summarize(doc)
