"""
Abstract rewriting: the fixed prompt, request fingerprints, cache use and
bounded concurrent rewriting of a whole corpus.
"""
import asyncio
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from src.client.llm_client import LLMError
from src.utils.errors import CorpusFormatError, EmptyAbstractError
from src.utils.file_utils import fingerprint, read_jsonl, sha256_text, write_jsonl

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "Given the scientific abstract, imagine yourself to be an author and researcher, "
    "and rewrite this abstract.\nThe abstract is : "
)


class RewriteStatus(str, Enum):
    OK = "ok"
    REFUSED = "refused"
    FAILED = "failed"


@dataclass(frozen=True)
class RewriteResult:
    record_id: str
    provider: str
    text: str
    status: RewriteStatus
    fingerprint: str
    cause: str = None
    attempts: int = 0
    cached: bool = False

    def to_json(self):
        return {
            "record_id": self.record_id,
            "provider": self.provider,
            "text": self.text,
            "status": self.status.value,
            "fingerprint": self.fingerprint,
            "cause": self.cause,
            "attempts": self.attempts,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            record_id=str(data["record_id"]),
            provider=data["provider"],
            text=data.get("text") or "",
            status=RewriteStatus(data["status"]),
            fingerprint=data["fingerprint"],
            cause=data.get("cause"),
            attempts=int(data.get("attempts", 0)),
        )


def build_prompt(abstract):
    """The fixed rewrite prompt followed by the abstract, verbatim."""
    if abstract is None or not abstract.strip():
        raise EmptyAbstractError("abstract must be non-empty")
    return PROMPT_TEMPLATE + abstract


def request_fingerprint(provider_name, model, prompt):
    return fingerprint([provider_name, model, prompt])


def is_refusal(text, refusal_phrases=()):
    if not text or not text.strip():
        return True
    lowered = text.lower()
    return any(phrase in lowered for phrase in refusal_phrases)


async def rewrite_abstract(client, abstract, cache, record_id="", refusal_phrases=()):
    """
    Rewrite one abstract with one provider.

    A cached ok/refused result is returned without a network call; cached
    failures are re-requested. Provider errors become failed results.
    """
    prompt = build_prompt(abstract)
    key = request_fingerprint(client.name, client.model, prompt)

    cached = cache.get(key)
    if cached is not None and cached.get("status") in (RewriteStatus.OK.value, RewriteStatus.REFUSED.value):
        logger.debug(f"💾 Cache hit {client.name}/{record_id}")
        return RewriteResult(
            record_id, client.name, cached.get("response_text") or "", RewriteStatus(cached["status"]),
            key, cached.get("cause"), int(cached.get("attempts", 0)), cached=True,
        )

    try:
        completion = await client.complete(prompt)
        text, attempts, params = completion.text, completion.attempts, completion.params
        if is_refusal(text, refusal_phrases):
            status, cause = RewriteStatus.REFUSED, "empty output" if not text.strip() else "refusal phrase"
        else:
            status, cause = RewriteStatus.OK, None
    except LLMError as e:
        text, attempts, params = "", getattr(e, "attempts", 1), client.sent_params(prompt)
        status, cause = RewriteStatus.FAILED, str(e)

    if attempts > 1 or status is not RewriteStatus.OK:
        logger.info(f"📝 {client.name}/{record_id}: {status.value} after {attempts} attempt(s)")

    cache.put(key, {
        "provider": client.name,
        "model": client.model,
        "prompt_sha256": sha256_text(prompt),
        "params": params,
        "response_text": text,
        "status": status.value,
        "cause": cause,
        "attempts": attempts,
    })
    return RewriteResult(record_id, client.name, text, status, key, cause, attempts)


async def rewrite_corpus(clients, records, cache, max_in_flight=4, refusal_phrases=()):
    """
    Rewrite every (record, provider) pair once.

    Args:
        clients: LLMClient list, one per provider
        records: CorpusRecord list
        max_in_flight: outstanding requests allowed per provider

    Returns:
        list of RewriteResult ordered by record, then provider
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be positive")
    limits = {client.name: asyncio.Semaphore(max_in_flight) for client in clients}

    async def _one(client, record):
        async with limits[client.name]:
            try:
                return await rewrite_abstract(client, record.abstract, cache, record.id, refusal_phrases)
            except EmptyAbstractError as e:
                return RewriteResult(record.id, client.name, "", RewriteStatus.FAILED, "", str(e), 0)
            except Exception as e:
                logger.error(f"❌ {client.name}/{record.id}: unexpected error: {e}")
                return RewriteResult(record.id, client.name, "", RewriteStatus.FAILED, "", str(e), 0)

    tasks = [_one(client, record) for record in records for client in clients]
    results = list(await asyncio.gather(*tasks))
    log_rewrite_summary(results)
    return results


def summarize_results(results):
    """provider -> {ok, refused, failed, cached, attempts}"""
    summary = {}
    for result in results:
        counts = summary.setdefault(result.provider, {
            "ok": 0, "refused": 0, "failed": 0, "cached": 0, "attempts": 0,
        })
        counts[result.status.value] += 1
        counts["cached"] += int(result.cached)
        counts["attempts"] += 0 if result.cached else result.attempts
    return summary


def log_rewrite_summary(results):
    for provider, counts in summarize_results(results).items():
        logger.info(
            f"📊 {provider}: {counts['ok']} ok, {counts['refused']} refused, "
            f"{counts['failed']} failed ({counts['cached']} from cache)"
        )


def write_variants(path, results):
    return write_jsonl(path, [r.to_json() for r in results])


def read_variants(path):
    """
    Raises:
        CorpusFormatError: invalid JSON or a record missing its fields, with the line number
    """
    results = []
    for line_number, obj in read_jsonl(path):
        try:
            results.append(RewriteResult.from_json(obj))
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusFormatError(
                f"{Path(path).name} line {line_number}: bad variant record ({e})"
            ) from None
    return results


__all__ = [
    'PROMPT_TEMPLATE', 'RewriteStatus', 'RewriteResult', 'build_prompt', 'request_fingerprint',
    'is_refusal', 'rewrite_abstract', 'rewrite_corpus', 'summarize_results',
    'write_variants', 'read_variants'
]
