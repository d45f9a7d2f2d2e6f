"""
LLM provider client for abstract rewriting.
Thin per-vendor adapters over one aiohttp transport, with retry and backoff,
plus a deterministic local mock provider for offline runs.
"""
import asyncio
import json
import logging
import random
import re
import time
from dataclasses import dataclass, field

import aiohttp

from config.credentials import mask_key, resolve_api_key
from config.settings import API_TIMEOUT, MAX_RETRIES, RETRY_DELAY_BASE

logger = logging.getLogger(__name__)


# ============================================================================
# ERRORS
# ============================================================================

class LLMError(Exception):
    """Base exception for LLM client errors."""

    retryable = False

    def __init__(self, message, status_code=None, body=None):
        self.status_code = status_code
        self.body = body
        super().__init__(message)


class LLMRateLimitError(LLMError):
    """HTTP 429."""

    retryable = True

    def __init__(self, message, retry_after=None, **kwargs):
        self.retry_after = retry_after
        super().__init__(message, **kwargs)


class LLMServerError(LLMError):
    """HTTP 5xx."""

    retryable = True


class LLMTransportError(LLMError):
    """Timeout or connection failure."""

    retryable = True


class LLMResponseError(LLMError):
    """Response body without usable text."""


# ============================================================================
# ADAPTERS
# ============================================================================

class ProviderAdapter:
    """Builds vendor requests and reads text out of vendor responses."""

    default_base_url = ""

    def build_request(self, base_url, model, prompt, api_key, params):
        raise NotImplementedError

    def parse_response(self, data):
        raise NotImplementedError

    @staticmethod
    def sent_params(body):
        """Everything sent except the prompt itself."""
        return {k: v for k, v in body.items() if k not in ("messages", "contents")}


class AnthropicAdapter(ProviderAdapter):
    default_base_url = "https://api.anthropic.com"
    api_version = "2023-06-01"

    def build_request(self, base_url, model, prompt, api_key, params):
        body = {"model": model, "max_tokens": 1024}
        body.update(params)
        body["messages"] = [{"role": "user", "content": prompt}]
        headers = {
            "x-api-key": api_key,
            "anthropic-version": self.api_version,
            "content-type": "application/json",
        }
        return f"{base_url}/v1/messages", headers, body

    def parse_response(self, data):
        blocks = data.get("content") or []
        return "".join(b.get("text", "") for b in blocks if b.get("type") == "text")


class ChatCompletionsAdapter(ProviderAdapter):
    """OpenAI-style /v1/chat/completions (OpenAI, Mistral)."""

    def __init__(self, default_base_url):
        self.default_base_url = default_base_url

    def build_request(self, base_url, model, prompt, api_key, params):
        body = {"model": model}
        body.update(params)
        body["messages"] = [{"role": "user", "content": prompt}]
        headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
        return f"{base_url}/v1/chat/completions", headers, body

    def parse_response(self, data):
        choices = data.get("choices") or []
        if not choices:
            return ""
        return (choices[0].get("message") or {}).get("content") or ""


class GeminiAdapter(ProviderAdapter):
    default_base_url = "https://generativelanguage.googleapis.com"

    def build_request(self, base_url, model, prompt, api_key, params):
        body = {}
        if params:
            body["generationConfig"] = dict(params)
        body["contents"] = [{"role": "user", "parts": [{"text": prompt}]}]
        headers = {"x-goog-api-key": api_key, "Content-Type": "application/json"}
        return f"{base_url}/v1beta/models/{model}:generateContent", headers, body

    def parse_response(self, data):
        candidates = data.get("candidates") or []
        if not candidates:
            return ""
        parts = (candidates[0].get("content") or {}).get("parts") or []
        return "".join(p.get("text", "") for p in parts)


ADAPTERS = {
    "anthropic": AnthropicAdapter(),
    "openai": ChatCompletionsAdapter("https://api.openai.com"),
    "mistral": ChatCompletionsAdapter("https://api.mistral.ai"),
    "gemini": GeminiAdapter(),
}


# ============================================================================
# TRANSPORTS
# ============================================================================

@dataclass
class HTTPResponse:
    status: int
    text: str
    headers: dict = field(default_factory=dict)


class AiohttpTransport:
    """Shared aiohttp session for all live providers."""

    def __init__(self):
        self.session = None

    async def __aenter__(self):
        await self._ensure_session()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        await self.close()

    async def _ensure_session(self):
        if self.session is None or self.session.closed:
            connector = aiohttp.TCPConnector(
                limit=32,
                limit_per_host=16,
                keepalive_timeout=30,
                enable_cleanup_closed=True
            )
            self.session = aiohttp.ClientSession(
                connector=connector,
                headers={'User-Agent': 'liwc-bias-audit/1.0'}
            )

    async def close(self):
        if self.session and not self.session.closed:
            await self.session.close()
            logger.debug("🔒 LLM transport session closed")

    async def post(self, url, headers, body, timeout):
        await self._ensure_session()
        try:
            async with self.session.post(
                url,
                headers=headers,
                json=body,
                timeout=aiohttp.ClientTimeout(total=timeout)
            ) as response:
                text = await response.text()
                return HTTPResponse(response.status, text, dict(response.headers))
        except asyncio.TimeoutError:
            raise LLMTransportError(f"Request timed out after {timeout}s") from None
        except aiohttp.ClientError as e:
            raise LLMTransportError(f"Connection error: {e}") from e


class MockTransport:
    """
    Scripted transport for tests. Each queued item is an HTTPResponse or an
    exception instance; the last item repeats once the queue is exhausted.
    """

    def __init__(self, responses=()):
        self.responses = list(responses)
        self.requests = []

    async def post(self, url, headers, body, timeout):
        self.requests.append({
            "url": url,
            "headers": dict(headers),
            "body": json.dumps(body, ensure_ascii=False, sort_keys=True),
        })
        if not self.responses:
            raise LLMTransportError("mock transport has no scripted response")
        item = self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        if isinstance(item, Exception):
            raise item
        return item

    async def close(self):
        pass


# ============================================================================
# MOCK PROVIDER
# ============================================================================

_SENTENCE_SPLIT_RE = re.compile(r'(?<=[.!?])\s+')
MOCK_REFUSAL_TEXT = "I'm sorry, but I can't help with rewriting this abstract."


def split_sentences(text):
    return [s for s in _SENTENCE_SPLIT_RE.split(text.strip()) if s]


def mock_paraphrase(abstract, style="reverse"):
    """
    Deterministic stand-in for a model rewrite.

    reverse: sentence order reversed, words preserved ("A. B." -> "B. A.")
    truncate: final sentence dropped (a single sentence is kept)
    """
    sentences = split_sentences(abstract)
    if style == "truncate":
        kept = sentences[:-1] if len(sentences) > 1 else sentences
        return " ".join(kept)
    return " ".join(reversed(sentences))


# ============================================================================
# CLIENT
# ============================================================================

@dataclass
class Completion:
    text: str
    attempts: int
    params: dict


class LLMClient:
    """
    One provider endpoint with retry logic.

    Transient failures (429, 5xx, timeouts, connection errors) are retried with
    exponential backoff and 0-50% jitter; other 4xx responses fail at once.
    """

    def __init__(self, provider, api_key=None, transport=None, max_retries=None,
                 retry_delay_base=None, prompt_prefix=""):
        """
        Initialize the client.

        Args:
            provider: ProviderConfig
            api_key: Resolved key for live providers
            transport: AiohttpTransport or MockTransport (live providers only)
            max_retries: Total attempts per request (default: from config)
            retry_delay_base: First backoff delay in seconds (default: from config)
            prompt_prefix: Fixed prompt template prefix, stripped by the mock provider
        """
        self.provider = provider
        self.name = provider.name
        self.model = provider.model
        self.api_key = api_key
        self.transport = transport
        self.max_retries = max_retries if max_retries is not None else MAX_RETRIES
        self.retry_delay_base = retry_delay_base if retry_delay_base is not None else RETRY_DELAY_BASE
        self.timeout = provider.timeout or API_TIMEOUT
        self.prompt_prefix = prompt_prefix
        self.adapter = ADAPTERS.get(provider.kind)
        if provider.kind != "mock" and self.transport is None:
            raise ValueError(f"Provider '{self.name}' needs a transport")

        self.stats = {
            'requests_sent': 0,
            'requests_successful': 0,
            'requests_failed': 0,
            'retries_attempted': 0,
            'rate_limit_hits': 0,
            'last_request_time': None
        }
        logger.debug(f"🤖 LLM client initialized: {self.name} ({provider.kind}/{self.model})")

    def _backoff(self, attempt, retry_after=None):
        if retry_after is not None:
            return retry_after
        return self.retry_delay_base * (2 ** (attempt - 1)) * (1 + random.uniform(0, 0.5))

    async def _call_mock(self, prompt):
        params = self.provider.params
        behavior = params.get("behavior", "ok")
        if behavior == "fail":
            raise LLMError(f"mock provider '{self.name}' is configured to fail")
        if behavior == "refuse":
            return MOCK_REFUSAL_TEXT
        abstract = prompt[len(self.prompt_prefix):] if prompt.startswith(self.prompt_prefix) else prompt
        return mock_paraphrase(abstract, params.get("style", "reverse"))

    async def _call_http(self, prompt):
        base_url = (self.provider.base_url or self.adapter.default_base_url).rstrip("/")
        url, headers, body = self.adapter.build_request(
            base_url, self.model, prompt, self.api_key, self.provider.params
        )
        response = await self.transport.post(url, headers, body, self.timeout)
        if response.status == 429:
            retry_after = response.headers.get("Retry-After")
            try:
                retry_after = float(retry_after) if retry_after is not None else None
            except ValueError:
                retry_after = None
            raise LLMRateLimitError("HTTP 429 rate limited", retry_after=retry_after,
                                    status_code=429, body=response.text)
        if response.status >= 500:
            raise LLMServerError(f"HTTP {response.status}", status_code=response.status, body=response.text)
        if response.status >= 400:
            raise LLMError(f"HTTP {response.status}: {response.text[:200]}",
                           status_code=response.status, body=response.text)
        try:
            data = json.loads(response.text)
        except json.JSONDecodeError:
            raise LLMResponseError("response is not JSON", status_code=response.status,
                                   body=response.text) from None
        return self.adapter.parse_response(data)

    def sent_params(self, prompt):
        """Request parameters recorded alongside cached responses."""
        if self.provider.kind == "mock":
            return {"model": self.model, **self.provider.params}
        _, _, body = self.adapter.build_request("", self.model, prompt, "", self.provider.params)
        return self.adapter.sent_params(body)

    async def complete(self, prompt):
        """
        Send one prompt, retrying transient failures.

        Returns:
            Completion

        Raises:
            LLMError: Non-retryable failure or retries exhausted; .attempts is set
        """
        attempt = 0
        while True:
            attempt += 1
            self.stats['requests_sent'] += 1
            self.stats['last_request_time'] = time.time()
            try:
                if self.provider.kind == "mock":
                    text = await self._call_mock(prompt)
                else:
                    text = await self._call_http(prompt)
                self.stats['requests_successful'] += 1
                return Completion(text=text, attempts=attempt, params=self.sent_params(prompt))
            except LLMError as e:
                e.attempts = attempt
                if isinstance(e, LLMRateLimitError):
                    self.stats['rate_limit_hits'] += 1
                if not e.retryable or attempt >= self.max_retries:
                    self.stats['requests_failed'] += 1
                    logger.error(f"❌ {self.name}: request failed after {attempt} attempt(s): {e}")
                    raise
                delay = self._backoff(attempt, getattr(e, "retry_after", None))
                self.stats['retries_attempted'] += 1
                logger.warning(
                    f"🔄 {self.name}: {e}; retrying in {delay:.1f}s (attempt {attempt + 1}/{self.max_retries})"
                )
                await asyncio.sleep(delay)

    def get_statistics(self):
        stats = self.stats.copy()
        sent = stats['requests_sent']
        stats['success_rate'] = (stats['requests_successful'] / sent * 100) if sent else 0
        return stats


def create_client(provider, transport=None, prompt_prefix="", **kwargs):
    """
    Build a client for a provider config, resolving its credential.

    Raises:
        CredentialError: A live provider's key variable is not set
    """
    api_key = resolve_api_key(provider.name, provider.kind, provider.api_key_env)
    if api_key:
        logger.info(f"🔐 {provider.name}: using key {mask_key(api_key)}")
    return LLMClient(provider, api_key=api_key, transport=transport, prompt_prefix=prompt_prefix, **kwargs)


__all__ = [
    'LLMError', 'LLMRateLimitError', 'LLMServerError', 'LLMTransportError', 'LLMResponseError',
    'ADAPTERS', 'HTTPResponse', 'AiohttpTransport', 'MockTransport', 'mock_paraphrase',
    'split_sentences', 'MOCK_REFUSAL_TEXT', 'Completion', 'LLMClient', 'create_client'
]
